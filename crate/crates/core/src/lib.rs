//! Parse, execute, and benchmark simplified DataFlow programs for calendar
//! scheduling.
//!
//! A turn's program text is parsed by [`expr`], turned into a computational
//! graph and evaluated against a session's calendar by [`graph`] using the
//! function library in [`calendar`], and scored against annotated
//! dialogues by [`eval`] with Exact Match and Execution Accuracy.

pub mod calendar;
pub mod cli;
pub mod db;
pub mod eval;
pub mod expr;
pub mod fixtures;
pub mod graph;
pub mod service;
pub mod stub;
pub mod value;

pub use calendar::{CalendarEvent, DomainError, EventConstraint};
pub use db::{db_equals, diff, Database, DiffEntry, Snapshot};
pub use expr::{canonicalize, exact_equal, parse_program, Program};
pub use graph::{run_turn, DataFlowGraph, EvaluationContext, ExecutionOutcome, GraphDocument};
pub use value::{DateTime, TimeOfDay, Value, ValueKind};
