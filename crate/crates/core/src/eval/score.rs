use serde::{Deserialize, Serialize};

use super::BenchmarkTurn;
use crate::db::{db_equals, DbError, Snapshot};
use crate::expr::{exact_equal, parse_program};
use crate::graph::{run_turn, DataFlowGraph, EvaluationContext, TurnOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    ParseError,
    ExecutionError,
    ResponseMismatch,
    DbMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub correct: bool,
    pub failure_reason: Option<FailureReason>,
}

impl Verdict {
    const PASS: Verdict = Verdict {
        correct: true,
        failure_reason: None,
    };

    fn fail(reason: FailureReason) -> Verdict {
        Verdict {
            correct: false,
            failure_reason: Some(reason),
        }
    }
}

/// Trims and collapses internal whitespace; case is kept.
pub fn normalize_response(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Exact Match of canonical forms. An unparsable prediction is a miss with
/// reason `parse_error`.
pub fn em_score(predicted: &str, gold: &str) -> Verdict {
    let (Ok(p), Ok(g)) = (parse_program(predicted), parse_program(gold)) else {
        return Verdict::fail(FailureReason::ParseError);
    };
    if exact_equal(&p, &g) {
        Verdict::PASS
    } else {
        Verdict {
            correct: false,
            failure_reason: None,
        }
    }
}

/// Runs `program` for `turn` on a fresh copy of its pre-state, with `history`
/// as the prior graphs. Returns the outcome and the resulting snapshot.
pub fn execute_on_turn(
    turn: &BenchmarkTurn,
    program: &str,
    history: &[DataFlowGraph],
) -> Result<(TurnOutcome, Snapshot), DbError> {
    let db = turn.db_before.to_database()?;
    let mut ctx = EvaluationContext::resume(turn.clock_now, db, history.to_vec());
    let outcome = run_turn(program, &mut ctx);
    Ok((outcome, ctx.database.snapshot()))
}

/// Execution Accuracy for one turn: the prediction must reproduce the oracle
/// response and leave the database equal to the oracle post-state.
///
/// `history` holds the gold graphs of earlier turns in the dialogue.
pub fn ea_score(turn: &BenchmarkTurn, predicted: Option<&str>, history: &[DataFlowGraph]) -> Verdict {
    let Some(program) = predicted else {
        return Verdict::fail(FailureReason::ParseError);
    };
    let Ok((run, after)) = execute_on_turn(turn, program, history) else {
        return Verdict::fail(FailureReason::ExecutionError);
    };
    if run.parse_error.is_some() {
        return Verdict::fail(FailureReason::ParseError);
    }
    let response_ok =
        normalize_response(&run.outcome.response) == normalize_response(&turn.oracle_response);
    if !response_ok {
        return Verdict::fail(if run.outcome.failed() {
            FailureReason::ExecutionError
        } else {
            FailureReason::ResponseMismatch
        });
    }
    if !db_equals(&after, &turn.db_after) {
        return Verdict::fail(FailureReason::DbMismatch);
    }
    Verdict::PASS
}
