//! Runtime values flowing along graph edges, plus the naive local date/time
//! types the calendar works in.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::calendar::{CalendarEvent, EventConstraint};

pub type Date = NaiveDate;

pub const MINUTES_PER_DAY: u16 = 24 * 60;

/// Minutes since midnight, `0..=1439`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeOfDay(u16);

impl TimeOfDay {
    pub fn from_minutes(minutes: u16) -> Option<Self> {
        (minutes < MINUTES_PER_DAY).then_some(TimeOfDay(minutes))
    }

    pub fn from_hm(hour: u16, minute: u16) -> Option<Self> {
        if hour < 24 && minute < 60 {
            Some(TimeOfDay(hour * 60 + minute))
        } else {
            None
        }
    }

    pub fn minutes(self) -> u16 {
        self.0
    }

    pub fn hour(self) -> u16 {
        self.0 / 60
    }

    pub fn minute(self) -> u16 {
        self.0 % 60
    }

    /// 12-hour clock rendering, e.g. `10:00 PM`, `12:30 AM`.
    pub fn render(self) -> String {
        let hour = self.hour();
        let suffix = if hour < 12 { "AM" } else { "PM" };
        let display_hour = match hour % 12 {
            0 => 12,
            h => h,
        };
        format!("{display_hour}:{:02} {suffix}", self.minute())
    }
}

impl fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.hour(), self.minute())
    }
}

/// `Tuesday, Jan 31 2023`
pub fn render_date(date: Date) -> String {
    date.format("%A, %b %-d %Y").to_string()
}

/// A naive, timezone-free local date and time with minute resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DateTime {
    pub date: Date,
    pub time: TimeOfDay,
}

impl DateTime {
    pub fn new(date: Date, time: TimeOfDay) -> Self {
        DateTime { date, time }
    }

    pub fn ymd_hm(year: i32, month: u32, day: u32, hour: u16, minute: u16) -> Option<Self> {
        Some(DateTime {
            date: NaiveDate::from_ymd_opt(year, month, day)?,
            time: TimeOfDay::from_hm(hour, minute)?,
        })
    }

    /// Shifts by a signed number of minutes, rolling the date as needed.
    pub fn add_minutes(self, minutes: i64) -> Self {
        let total = self.time.minutes() as i64 + minutes;
        let days = total.div_euclid(MINUTES_PER_DAY as i64);
        let rem = total.rem_euclid(MINUTES_PER_DAY as i64) as u16;
        DateTime {
            date: self.date + Duration::days(days),
            time: TimeOfDay(rem),
        }
    }

    /// Signed minutes from `self` to `other`.
    pub fn minutes_until(self, other: DateTime) -> i64 {
        let days = (other.date - self.date).num_days();
        days * MINUTES_PER_DAY as i64 + other.time.minutes() as i64 - self.time.minutes() as i64
    }

    pub fn render(self) -> String {
        format!("{} at {}", render_date(self.date), self.time.render())
    }
}

impl fmt::Display for DateTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:04}-{:02}-{:02}T{}",
            self.date.year(),
            self.date.month(),
            self.date.day(),
            self.time
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid datetime '{0}', expected YYYY-MM-DDTHH:MM")]
pub struct DateTimeParseError(pub String);

impl FromStr for DateTime {
    type Err = DateTimeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || DateTimeParseError(s.to_string());
        let (date, time) = s.split_once('T').ok_or_else(err)?;
        if time.len() != 5 || date.len() != 10 {
            return Err(err());
        }
        let date = NaiveDate::parse_from_str(date, "%Y-%m-%d").map_err(|_| err())?;
        let (h, m) = time.split_once(':').ok_or_else(err)?;
        let hour: u16 = h.parse().map_err(|_| err())?;
        let minute: u16 = m.parse().map_err(|_| err())?;
        Ok(DateTime {
            date,
            time: TimeOfDay::from_hm(hour, minute).ok_or_else(err)?,
        })
    }
}

impl Serialize for DateTime {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DateTime {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Int,
    Text,
    Bool,
    Time,
    Date,
    DateTime,
    EventRef,
    EventList,
    Constraint,
    Unit,
}

impl ValueKind {
    pub const ALL: [ValueKind; 10] = [
        ValueKind::Int,
        ValueKind::Text,
        ValueKind::Bool,
        ValueKind::Time,
        ValueKind::Date,
        ValueKind::DateTime,
        ValueKind::EventRef,
        ValueKind::EventList,
        ValueKind::Constraint,
        ValueKind::Unit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ValueKind::Int => "Int",
            ValueKind::Text => "Text",
            ValueKind::Bool => "Bool",
            ValueKind::Time => "Time",
            ValueKind::Date => "Date",
            ValueKind::DateTime => "DateTime",
            ValueKind::EventRef => "EventRef",
            ValueKind::EventList => "EventList",
            ValueKind::Constraint => "EventConstraint",
            ValueKind::Unit => "Unit",
        }
    }

    pub fn from_name(name: &str) -> Option<ValueKind> {
        ValueKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Text(String),
    Bool(bool),
    Time(TimeOfDay),
    Date(Date),
    DateTime(DateTime),
    EventRef(u64),
    EventList(Vec<CalendarEvent>),
    Constraint(EventConstraint),
    Unit,
}

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Int(_) => ValueKind::Int,
            Value::Text(_) => ValueKind::Text,
            Value::Bool(_) => ValueKind::Bool,
            Value::Time(_) => ValueKind::Time,
            Value::Date(_) => ValueKind::Date,
            Value::DateTime(_) => ValueKind::DateTime,
            Value::EventRef(_) => ValueKind::EventRef,
            Value::EventList(_) => ValueKind::EventList,
            Value::Constraint(_) => ValueKind::Constraint,
            Value::Unit => ValueKind::Unit,
        }
    }

    /// Compact rendering used in graph documents.
    pub fn render(&self) -> String {
        match self {
            Value::Int(n) => n.to_string(),
            Value::Text(s) => {
                let mut out = String::new();
                crate::expr::write_string_literal(s, &mut out);
                out
            }
            Value::Bool(b) => b.to_string(),
            Value::Time(t) => t.render(),
            Value::Date(d) => render_date(*d),
            Value::DateTime(dt) => dt.render(),
            Value::EventRef(id) => format!("event #{id}"),
            Value::EventList(events) => {
                let ids: Vec<String> = events.iter().map(|e| format!("#{}", e.id)).collect();
                format!("{} event(s) [{}]", events.len(), ids.join(", "))
            }
            Value::Constraint(c) => c.to_string(),
            Value::Unit => "()".to_string(),
        }
    }
}
