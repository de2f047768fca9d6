//! Session calendar store, snapshots, id-agnostic equality and diffs, and the
//! JSON database document.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::CalendarEvent;
use crate::value::DateTime;

#[derive(Debug, Error)]
pub enum DbError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed database document at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid event {event_id}: {message}")]
    InvalidEvent { event_id: u64, message: String },
    #[error("invalid database document: {0}")]
    Invalid(String),
}

/// Serialized form of a [`Database`] or [`Snapshot`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatabaseDocument {
    pub next_id: u64,
    pub events: Vec<CalendarEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database {
    events: BTreeMap<u64, CalendarEvent>,
    next_id: u64,
}

impl Default for Database {
    fn default() -> Self {
        Database {
            events: BTreeMap::new(),
            next_id: 1,
        }
    }
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn get(&self, id: u64) -> Option<&CalendarEvent> {
        self.events.get(&id)
    }

    /// Events in id order.
    pub fn events(&self) -> impl Iterator<Item = &CalendarEvent> {
        self.events.values()
    }

    /// Stores a new event under a fresh id and returns that id. The `id`
    /// field of `event` is overwritten.
    pub fn insert(&mut self, mut event: CalendarEvent) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        event.id = id;
        self.events.insert(id, event);
        id
    }

    /// Replaces an existing event; returns the previous version.
    pub fn replace(&mut self, event: CalendarEvent) -> Option<CalendarEvent> {
        match self.events.get_mut(&event.id) {
            Some(slot) => Some(std::mem::replace(slot, event)),
            None => None,
        }
    }

    pub fn remove(&mut self, id: u64) -> Option<CalendarEvent> {
        self.events.remove(&id)
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            events: self.events.values().cloned().collect(),
            next_id: self.next_id,
            label: None,
        }
    }

    pub fn to_document(&self) -> DatabaseDocument {
        DatabaseDocument {
            next_id: self.next_id,
            events: self.events.values().cloned().collect(),
        }
    }

    pub fn from_document(doc: DatabaseDocument) -> Result<Database, DbError> {
        let mut events = BTreeMap::new();
        for event in doc.events {
            validate_event(&event)?;
            if event.id >= doc.next_id {
                return Err(DbError::InvalidEvent {
                    event_id: event.id,
                    message: format!("id is not below next_id {}", doc.next_id),
                });
            }
            let id = event.id;
            if events.insert(id, event).is_some() {
                return Err(DbError::InvalidEvent {
                    event_id: id,
                    message: "duplicate id".to_string(),
                });
            }
        }
        if doc.next_id == 0 {
            return Err(DbError::Invalid("next_id must be positive".to_string()));
        }
        Ok(Database {
            events,
            next_id: doc.next_id,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("database serializes")
    }

    pub fn from_json(text: &str) -> Result<Database, DbError> {
        let doc: DatabaseDocument = serde_json::from_str(text).map_err(|e| DbError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Database::from_document(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DbError> {
        fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Database, DbError> {
        let text = fs::read_to_string(path)?;
        Database::from_json(&text)
    }
}

fn validate_event(event: &CalendarEvent) -> Result<(), DbError> {
    if event.subject.trim().is_empty() {
        return Err(DbError::InvalidEvent {
            event_id: event.id,
            message: "subject is empty".to_string(),
        });
    }
    if event.start >= event.end {
        return Err(DbError::InvalidEvent {
            event_id: event.id,
            message: format!("start {} is not before end {}", event.start, event.end),
        });
    }
    Ok(())
}

/// Immutable copy of a database at one point in time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    events: Vec<CalendarEvent>,
    next_id: u64,
    pub label: Option<String>,
}

impl Snapshot {
    pub fn empty() -> Self {
        Database::new().snapshot()
    }

    pub fn from_events(events: Vec<CalendarEvent>) -> Self {
        let next_id = events.iter().map(|e| e.id + 1).max().unwrap_or(1);
        Snapshot {
            events,
            next_id,
            label: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn events(&self) -> &[CalendarEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    /// Rebuilds a live database; fails only if ids collide or events are invalid.
    pub fn to_database(&self) -> Result<Database, DbError> {
        Database::from_document(self.to_document())
    }

    pub fn to_document(&self) -> DatabaseDocument {
        DatabaseDocument {
            next_id: self.next_id,
            events: self.events.clone(),
        }
    }
}

impl Serialize for Snapshot {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_document().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Snapshot {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = DatabaseDocument::deserialize(deserializer)?;
        let db = Database::from_document(doc).map_err(serde::de::Error::custom)?;
        Ok(db.snapshot())
    }
}

/// Comparison key for an event; surrogate ids and text casing don't count.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalEvent {
    pub subject: String,
    pub start: DateTime,
    pub end: DateTime,
    pub attendees: Vec<String>,
    pub location: Option<String>,
}

impl CanonicalEvent {
    pub fn of(event: &CalendarEvent) -> Self {
        let mut attendees: Vec<String> = event
            .attendees
            .iter()
            .map(|a| a.trim().to_lowercase())
            .collect();
        attendees.sort();
        CanonicalEvent {
            subject: event.subject.trim().to_lowercase(),
            start: event.start,
            end: event.end,
            attendees,
            location: event.location.as_ref().map(|l| l.trim().to_lowercase()),
        }
    }
}

fn canonical_multiset(events: &[CalendarEvent]) -> HashMap<CanonicalEvent, usize> {
    let mut counts = HashMap::new();
    for e in events {
        *counts.entry(CanonicalEvent::of(e)).or_insert(0) += 1;
    }
    counts
}

/// Multiset equality of canonical events.
pub fn db_equals(a: &Snapshot, b: &Snapshot) -> bool {
    a.events.len() == b.events.len() && canonical_multiset(&a.events) == canonical_multiset(&b.events)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DiffEntry {
    Added { event: CalendarEvent },
    Removed { event: CalendarEvent },
    Changed { before: CalendarEvent, after: CalendarEvent },
}

/// Edits turning `a` into `b`. Events that match canonically are left out;
/// an unmatched removal and addition sharing an id are reported as a change.
pub fn diff(a: &Snapshot, b: &Snapshot) -> Vec<DiffEntry> {
    let mut remaining = canonical_multiset(&a.events);
    let mut added: Vec<&CalendarEvent> = Vec::new();
    for e in &b.events {
        let key = CanonicalEvent::of(e);
        match remaining.get_mut(&key) {
            Some(n) if *n > 0 => *n -= 1,
            _ => added.push(e),
        }
    }
    // Walk `a` in order, consuming leftover counts to decide which copies were removed.
    let mut matched = canonical_multiset(&b.events);
    let mut removed: Vec<&CalendarEvent> = Vec::new();
    for e in &a.events {
        let key = CanonicalEvent::of(e);
        match matched.get_mut(&key) {
            Some(n) if *n > 0 => *n -= 1,
            _ => removed.push(e),
        }
    }

    let mut entries = Vec::new();
    let mut added_used = vec![false; added.len()];
    for r in removed {
        match added
            .iter()
            .enumerate()
            .position(|(i, e)| !added_used[i] && e.id == r.id)
        {
            Some(i) => {
                added_used[i] = true;
                entries.push(DiffEntry::Changed {
                    before: r.clone(),
                    after: added[i].clone(),
                });
            }
            None => entries.push(DiffEntry::Removed { event: r.clone() }),
        }
    }
    for (i, e) in added.into_iter().enumerate() {
        if !added_used[i] {
            entries.push(DiffEntry::Added { event: e.clone() });
        }
    }
    entries.sort_by_key(|entry| match entry {
        DiffEntry::Removed { event } => (event.id, 0),
        DiffEntry::Changed { before, .. } => (before.id, 1),
        DiffEntry::Added { event } => (event.id, 2),
    });
    entries
}

/// Applies `entries` (as produced by [`diff`]) to `base`.
pub fn apply_diff(base: &Snapshot, entries: &[DiffEntry]) -> Snapshot {
    let mut events = base.events.clone();
    let remove_one = |events: &mut Vec<CalendarEvent>, target: &CalendarEvent| {
        let key = CanonicalEvent::of(target);
        let pos = events
            .iter()
            .position(|e| e.id == target.id && CanonicalEvent::of(e) == key)
            .or_else(|| events.iter().position(|e| CanonicalEvent::of(e) == key));
        if let Some(pos) = pos {
            events.remove(pos);
        }
    };
    for entry in entries {
        match entry {
            DiffEntry::Removed { event } => remove_one(&mut events, event),
            DiffEntry::Changed { before, after } => {
                remove_one(&mut events, before);
                events.push(after.clone());
            }
            DiffEntry::Added { event } => events.push(event.clone()),
        }
    }
    events.sort_by_key(|e| e.id);
    let next_id = events
        .iter()
        .map(|e| e.id + 1)
        .max()
        .unwrap_or(1)
        .max(base.next_id);
    Snapshot {
        events,
        next_id,
        label: None,
    }
}
