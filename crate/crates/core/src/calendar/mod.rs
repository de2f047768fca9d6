//! Calendar domain: events, query constraints, and the function library that
//! DataFlow programs call into.

mod events;
pub mod registry;
mod temporal;

use std::fmt;

use chrono::Weekday;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::{render_date, Date, DateTime, TimeOfDay, ValueKind};

pub use self::events::{
    create_event, delete_event, find_events, resolve_target, update_event, EventTarget,
    EventUpdate, NewEvent,
};
pub use self::registry::{lookup, CallContext, FunctionSpec, ParamSpec, REGISTRY};
pub use self::temporal::{
    date_time_of, hour_military, hour_minute_am, hour_minute_pm, month_day, next_dow, number_am,
    number_pm, today, tomorrow,
};

pub const DEFAULT_DURATION_MINUTES: i64 = 60;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CalendarEvent {
    pub id: u64,
    pub subject: String,
    pub start: DateTime,
    pub end: DateTime,
    #[serde(default)]
    pub attendees: Vec<String>,
    #[serde(default)]
    pub location: Option<String>,
}

impl CalendarEvent {
    pub fn overlaps(&self, start: DateTime, end: DateTime) -> bool {
        self.start < end && start < self.end
    }

    /// `standup on Tuesday, Jun 13 2023 from 10:00 PM to 11:00 PM`
    pub fn describe(&self) -> String {
        format!(
            "{} on {} from {} to {}",
            self.subject,
            render_date(self.start.date),
            self.start.time.render(),
            self.end.time.render()
        )
    }
}

/// Conjunctive event filter; unset fields match everything.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventConstraint {
    pub subject_contains: Option<String>,
    pub on_date: Option<Date>,
    pub starts_at: Option<TimeOfDay>,
    pub starts_after: Option<TimeOfDay>,
    pub starts_before: Option<TimeOfDay>,
    pub attendee: Option<String>,
    pub location: Option<String>,
}

impl EventConstraint {
    pub fn subject(text: impl Into<String>) -> Self {
        EventConstraint {
            subject_contains: Some(text.into()),
            ..Default::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == EventConstraint::default()
    }

    pub fn matches(&self, event: &CalendarEvent) -> bool {
        if let Some(needle) = &self.subject_contains {
            if !event.subject.to_lowercase().contains(&needle.to_lowercase()) {
                return false;
            }
        }
        if self.on_date.is_some_and(|d| event.start.date != d) {
            return false;
        }
        if self.starts_at.is_some_and(|t| event.start.time != t) {
            return false;
        }
        if self.starts_after.is_some_and(|t| event.start.time <= t) {
            return false;
        }
        if self.starts_before.is_some_and(|t| event.start.time >= t) {
            return false;
        }
        if let Some(who) = &self.attendee {
            if !event.attendees.iter().any(|a| a.eq_ignore_ascii_case(who)) {
                return false;
            }
        }
        if let Some(loc) = &self.location {
            if !event
                .location
                .as_deref()
                .is_some_and(|l| l.eq_ignore_ascii_case(loc))
            {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for EventConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(s) = &self.attendee {
            parts.push(format!("attendee={s:?}"));
        }
        if let Some(s) = &self.location {
            parts.push(format!("location={s:?}"));
        }
        if let Some(d) = self.on_date {
            parts.push(format!("on_date={d}"));
        }
        if let Some(t) = self.starts_after {
            parts.push(format!("starts_after={t}"));
        }
        if let Some(t) = self.starts_at {
            parts.push(format!("starts_at={t}"));
        }
        if let Some(t) = self.starts_before {
            parts.push(format!("starts_before={t}"));
        }
        if let Some(s) = &self.subject_contains {
            parts.push(format!("subject_contains={s:?}"));
        }
        write!(f, "EventConstraint({})", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DayOfWeek {
    Monday,
    Tuesday,
    Wednesday,
    Thursday,
    Friday,
    Saturday,
    Sunday,
}

impl DayOfWeek {
    pub const ALL: [DayOfWeek; 7] = [
        DayOfWeek::Monday,
        DayOfWeek::Tuesday,
        DayOfWeek::Wednesday,
        DayOfWeek::Thursday,
        DayOfWeek::Friday,
        DayOfWeek::Saturday,
        DayOfWeek::Sunday,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DayOfWeek::Monday => "Monday",
            DayOfWeek::Tuesday => "Tuesday",
            DayOfWeek::Wednesday => "Wednesday",
            DayOfWeek::Thursday => "Thursday",
            DayOfWeek::Friday => "Friday",
            DayOfWeek::Saturday => "Saturday",
            DayOfWeek::Sunday => "Sunday",
        }
    }

    /// Case-insensitive full name.
    pub fn parse(name: &str) -> Option<DayOfWeek> {
        DayOfWeek::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(name.trim()))
    }

    pub fn weekday(self) -> Weekday {
        match self {
            DayOfWeek::Monday => Weekday::Mon,
            DayOfWeek::Tuesday => Weekday::Tue,
            DayOfWeek::Wednesday => Weekday::Wed,
            DayOfWeek::Thursday => Weekday::Thu,
            DayOfWeek::Friday => Weekday::Fri,
            DayOfWeek::Saturday => Weekday::Sat,
            DayOfWeek::Sunday => Weekday::Sun,
        }
    }
}

/// Failures raised by the calendar function library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("{field} out of range {min}..{max} (got {got})")]
    OutOfRange {
        field: &'static str,
        min: i64,
        max: i64,
        got: i64,
    },
    #[error("invalid calendar day {month}/{day}")]
    InvalidDate { month: i64, day: i64 },
    #[error("unknown day of week '{0}'")]
    UnknownDay(String),
    #[error("event subject must not be empty")]
    EmptySubject,
    #[error("event must end after it starts ({start} to {end})")]
    InvalidInterval { start: DateTime, end: DateTime },
    #[error("overlap-conflict with '{}' ({} to {})", existing.subject, existing.start, existing.end)]
    OverlapConflict { existing: Box<CalendarEvent> },
    #[error("event constraint needs at least one predicate")]
    EmptyConstraint,
    #[error("no matching event")]
    NotFound,
    #[error("ambiguous reference: {count} events match")]
    AmbiguousReference { count: usize },
    #[error("nothing of kind {0} to refer to")]
    ReferenceNotFound(ValueKind),
    #[error("unknown value kind '{0}'")]
    UnknownValueKind(String),
}

impl DomainError {
    /// User-facing sentence for the agent response.
    pub fn sentence(&self) -> String {
        match self {
            DomainError::NotFound => "I couldn't find an event matching that.".to_string(),
            DomainError::AmbiguousReference { count } => {
                format!("I found {count} events matching that. Which event do you mean?")
            }
            DomainError::OverlapConflict { existing } => {
                format!("that overlaps with {}.", existing.describe())
            }
            DomainError::ReferenceNotFound(kind) => {
                format!("I don't know which {kind} you mean.")
            }
            other => format!("{other}."),
        }
    }
}
