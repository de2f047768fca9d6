//! Exact Match and Execution Accuracy over annotated dialogues.
//!
//! Each turn is replayed in isolation: the prediction runs on a fresh copy of
//! the turn's `db_before` under its `clock_now`, with the *gold* graphs of the
//! earlier turns as history. A turn counts as correctly executed only when
//! the response matches the oracle response (after whitespace
//! normalization) and the resulting database equals `db_after`.

mod dataset;
mod report;
mod score;

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::db::{db_equals, diff, DiffEntry};
use crate::graph::DataFlowGraph;
use crate::stub::stub_parse;

pub use self::dataset::{
    gold_predictions, index_predictions, load_dataset, load_predictions, parse_jsonl, to_jsonl,
    write_jsonl, BenchmarkTurn, DatasetError, DialogueRecord, Operation, PredictionRecord,
};
pub use self::report::{Cell, EvalReport, ReportRow, TurnDetail, CATEGORIES};
pub use self::score::{ea_score, em_score, execute_on_turn, normalize_response, FailureReason, Verdict};

/// What a prediction source sees for one turn.
#[derive(Debug, Clone)]
pub struct TurnQuery<'a> {
    pub dialogue_id: &'a str,
    pub turn: &'a BenchmarkTurn,
    /// Earlier user utterances and oracle responses, alternating.
    pub dialogue_history: Vec<String>,
}

#[derive(Debug, Clone, Error)]
#[error("prediction source failed: {0}")]
pub struct PredictionError(pub String);

/// Supplies a predicted program per turn. `Ok(None)` means no prediction.
pub trait PredictionSource: Sync {
    fn predict(&self, query: &TurnQuery<'_>) -> Result<Option<String>, PredictionError>;
}

/// Predictions keyed by `(dialogue_id, turn_index)`.
#[derive(Debug, Clone, Default)]
pub struct OfflinePredictions(pub HashMap<(String, usize), String>);

impl OfflinePredictions {
    pub fn new(records: Vec<PredictionRecord>) -> Self {
        OfflinePredictions(index_predictions(records))
    }
}

impl PredictionSource for OfflinePredictions {
    fn predict(&self, query: &TurnQuery<'_>) -> Result<Option<String>, PredictionError> {
        Ok(self
            .0
            .get(&(query.dialogue_id.to_string(), query.turn.turn_index))
            .cloned())
    }
}

/// The bundled pattern-grammar parser.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubParser;

impl PredictionSource for StubParser {
    fn predict(&self, query: &TurnQuery<'_>) -> Result<Option<String>, PredictionError> {
        Ok(stub_parse(
            &query.turn.user_utterance,
            query.turn.prev_agent_utterance.as_deref(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    TurnIndex { expected: usize, got: usize },
    Chaining,
    GoldParse(String),
    BadSnapshot(String),
    ResponseMismatch { expected: String, got: String },
    DbMismatch(Vec<DiffEntry>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub dialogue_id: String,
    pub turn_index: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dialogue {} turn {}: ", self.dialogue_id, self.turn_index)?;
        match &self.kind {
            ViolationKind::TurnIndex { expected, got } => {
                write!(f, "turn_index {got} out of sequence (expected {expected})")
            }
            ViolationKind::Chaining => write!(f, "db_before does not match the previous turn's db_after"),
            ViolationKind::GoldParse(e) => write!(f, "gold program does not parse: {e}"),
            ViolationKind::BadSnapshot(e) => write!(f, "db_before is unusable: {e}"),
            ViolationKind::ResponseMismatch { expected, got } => {
                write!(f, "gold response {got:?} differs from oracle {expected:?}")
            }
            ViolationKind::DbMismatch(entries) => {
                write!(f, "gold execution leaves a database differing from db_after by {} edit(s)", entries.len())
            }
        }
    }
}

/// Executes every gold program in order, returning the gold graphs (history
/// for later turns) and any self-consistency violations.
fn replay_gold(dialogue: &DialogueRecord) -> (Vec<DataFlowGraph>, Vec<Violation>) {
    let mut graphs = Vec::with_capacity(dialogue.turns.len());
    let mut violations = Vec::new();
    let violation = |turn: &BenchmarkTurn, kind| Violation {
        dialogue_id: dialogue.dialogue_id.clone(),
        turn_index: turn.turn_index,
        kind,
    };

    for (i, turn) in dialogue.turns.iter().enumerate() {
        if turn.turn_index != i {
            violations.push(violation(
                turn,
                ViolationKind::TurnIndex {
                    expected: i,
                    got: turn.turn_index,
                },
            ));
        }
        if i > 0 && !db_equals(&dialogue.turns[i - 1].db_after, &turn.db_before) {
            violations.push(violation(turn, ViolationKind::Chaining));
        }
        let (run, after) = match execute_on_turn(turn, &turn.gold_program, &graphs) {
            Ok(pair) => pair,
            Err(e) => {
                violations.push(violation(turn, ViolationKind::BadSnapshot(e.to_string())));
                graphs.push(DataFlowGraph::empty(i));
                continue;
            }
        };
        if let Some(err) = &run.parse_error {
            violations.push(violation(turn, ViolationKind::GoldParse(err.to_string())));
        } else if normalize_response(&run.outcome.response) != normalize_response(&turn.oracle_response) {
            violations.push(violation(
                turn,
                ViolationKind::ResponseMismatch {
                    expected: turn.oracle_response.clone(),
                    got: run.outcome.response.clone(),
                },
            ));
        }
        if run.parse_error.is_none() && !db_equals(&after, &turn.db_after) {
            violations.push(violation(turn, ViolationKind::DbMismatch(diff(&turn.db_after, &after))));
        }
        graphs.push(run.outcome.graph);
    }
    (graphs, violations)
}

/// Re-executes every gold program; empty iff the dataset is self-consistent.
pub fn validate_dataset(dataset: &[DialogueRecord]) -> Vec<Violation> {
    dataset.iter().flat_map(|d| replay_gold(d).1).collect()
}

fn history_texts(turns: &[BenchmarkTurn]) -> Vec<String> {
    turns
        .iter()
        .flat_map(|t| [t.user_utterance.clone(), t.oracle_response.clone()])
        .collect()
}

fn score_dialogue(
    dialogue: &DialogueRecord,
    source: &dyn PredictionSource,
) -> Result<Vec<TurnDetail>, DatasetError> {
    let (gold_graphs, violations) = replay_gold(dialogue);
    if let Some(v) = violations.first() {
        return Err(DatasetError::Inconsistent {
            dialogue_id: v.dialogue_id.clone(),
            turn_index: v.turn_index,
            message: v.to_string(),
        });
    }

    let mut details = Vec::with_capacity(dialogue.turns.len());
    for (i, turn) in dialogue.turns.iter().enumerate() {
        let query = TurnQuery {
            dialogue_id: &dialogue.dialogue_id,
            turn,
            dialogue_history: history_texts(&dialogue.turns[..i]),
        };
        // A failing source scores the turn like a missing prediction.
        let predicted = source.predict(&query).ok().flatten();
        let em = match &predicted {
            Some(p) => em_score(p, &turn.gold_program),
            None => Verdict {
                correct: false,
                failure_reason: Some(FailureReason::ParseError),
            },
        };
        let ea = ea_score(turn, predicted.as_deref(), &gold_graphs[..i]);
        details.push(TurnDetail {
            dialogue_id: dialogue.dialogue_id.clone(),
            turn_index: turn.turn_index,
            operation: turn.operation,
            temporal: turn.temporal,
            em: em.correct,
            ea: ea.correct,
            failure_reason: ea.failure_reason,
        });
    }
    Ok(details)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Scoring threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

/// Scores every turn of `dataset` and aggregates the report. Dialogues are
/// scored in parallel; the result does not depend on the worker count.
pub fn run_benchmark(
    dataset: &[DialogueRecord],
    source: &dyn PredictionSource,
    options: RunOptions,
) -> Result<EvalReport, DatasetError> {
    let work = || -> Result<Vec<Vec<TurnDetail>>, DatasetError> {
        dataset.par_iter().map(|d| score_dialogue(d, source)).collect()
    };
    let per_dialogue = match options.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool builds")
            .install(work)?,
        None => work()?,
    };
    Ok(EvalReport::from_turns(per_dialogue.into_iter().flatten().collect()))
}
