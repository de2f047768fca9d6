use crate::db::Database;
use crate::value::DateTime;

use super::{CalendarEvent, DomainError, EventConstraint, DEFAULT_DURATION_MINUTES};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewEvent {
    pub subject: String,
    pub start: DateTime,
    pub end: Option<DateTime>,
    pub attendees: Vec<String>,
    pub location: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventTarget {
    Id(u64),
    Constraint(EventConstraint),
}

/// Fields to overwrite; `None` leaves the stored value alone.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventUpdate {
    pub subject: Option<String>,
    pub start: Option<DateTime>,
    pub end: Option<DateTime>,
    pub attendees: Option<Vec<String>>,
    pub location: Option<String>,
}

impl EventUpdate {
    pub fn is_empty(&self) -> bool {
        *self == EventUpdate::default()
    }
}

/// Inserts the event, rejecting empty subjects, inverted intervals and
/// overlaps with anything already stored.
pub fn create_event(db: &mut Database, new: NewEvent) -> Result<u64, DomainError> {
    let subject = new.subject.trim().to_string();
    if subject.is_empty() {
        return Err(DomainError::EmptySubject);
    }
    let end = new
        .end
        .unwrap_or_else(|| new.start.add_minutes(DEFAULT_DURATION_MINUTES));
    if end <= new.start {
        return Err(DomainError::InvalidInterval {
            start: new.start,
            end,
        });
    }
    if let Some(existing) = db.events().find(|e| e.overlaps(new.start, end)) {
        return Err(DomainError::OverlapConflict {
            existing: Box::new(existing.clone()),
        });
    }
    Ok(db.insert(CalendarEvent {
        id: 0,
        subject,
        start: new.start,
        end,
        attendees: new.attendees,
        location: new.location,
    }))
}

/// Matching events ordered by `(start, id)`.
pub fn find_events(db: &Database, constraint: &EventConstraint) -> Vec<CalendarEvent> {
    let mut found: Vec<CalendarEvent> = db
        .events()
        .filter(|e| constraint.matches(e))
        .cloned()
        .collect();
    found.sort_by_key(|e| (e.start, e.id));
    found
}

/// Resolves a target to exactly one stored event id.
pub fn resolve_target(db: &Database, target: &EventTarget) -> Result<u64, DomainError> {
    match target {
        EventTarget::Id(id) => db.get(*id).map(|e| e.id).ok_or(DomainError::NotFound),
        EventTarget::Constraint(c) => {
            let found = find_events(db, c);
            match found.len() {
                0 => Err(DomainError::NotFound),
                1 => Ok(found[0].id),
                count => Err(DomainError::AmbiguousReference { count }),
            }
        }
    }
}

/// Returns `(before, after)`.
pub fn update_event(
    db: &mut Database,
    target: &EventTarget,
    update: EventUpdate,
) -> Result<(CalendarEvent, CalendarEvent), DomainError> {
    let id = resolve_target(db, target)?;
    let before = db.get(id).cloned().ok_or(DomainError::NotFound)?;
    let mut after = before.clone();
    if let Some(subject) = update.subject {
        let subject = subject.trim().to_string();
        if subject.is_empty() {
            return Err(DomainError::EmptySubject);
        }
        after.subject = subject;
    }
    if let Some(start) = update.start {
        after.start = start;
    }
    if let Some(end) = update.end {
        after.end = end;
    }
    if let Some(attendees) = update.attendees {
        after.attendees = attendees;
    }
    if let Some(location) = update.location {
        after.location = Some(location);
    }
    if after.end <= after.start {
        return Err(DomainError::InvalidInterval {
            start: after.start,
            end: after.end,
        });
    }
    db.replace(after.clone());
    Ok((before, after))
}

pub fn delete_event(db: &mut Database, target: &EventTarget) -> Result<CalendarEvent, DomainError> {
    let id = resolve_target(db, target)?;
    db.remove(id).ok_or(DomainError::NotFound)
}
