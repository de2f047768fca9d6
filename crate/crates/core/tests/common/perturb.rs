//! Targeted program mutations and a diff-based classifier for their effect.

use dataflow_kit::eval::{BenchmarkTurn, FailureReason};
use dataflow_kit::expr::{canonicalize, parse_program, ExprKind, ExprNode, Program};
use dataflow_kit::{diff, run_turn, DataFlowGraph, EvaluationContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    WrongHour,
    WrongSubject,
    DroppedArgument,
}

pub const ALL: [Perturbation; 3] = [
    Perturbation::WrongHour,
    Perturbation::WrongSubject,
    Perturbation::DroppedArgument,
];

const TIME_CONSTRUCTORS: &[&str] = &["NumberPM", "NumberAM", "HourMilitary", "HourMinutePm", "HourMinuteAm"];

fn shift_hour(function: &str, hour: i64) -> i64 {
    if function == "HourMilitary" {
        (hour + 1) % 24
    } else {
        hour % 12 + 1
    }
}

/// Pre-order search for the first time constructor; bumps its hour.
fn bump_first_hour(node: &mut ExprNode) -> bool {
    let ExprKind::Call { function, positional, named } = &mut node.kind else {
        return false;
    };
    if TIME_CONSTRUCTORS.contains(&function.as_str()) {
        let slot = match positional.first_mut() {
            Some(p) => Some(p),
            None => named.iter_mut().find(|a| a.name == "hour").map(|a| &mut a.value),
        };
        if let Some(ExprNode { kind: ExprKind::Int(h), .. }) = slot {
            *h = shift_hour(function, *h);
            return true;
        }
        return false;
    }
    positional.iter_mut().any(bump_first_hour) || named.iter_mut().any(|a| bump_first_hour(&mut a.value))
}

fn replace_first_subject(node: &mut ExprNode) -> bool {
    let ExprKind::Call { positional, named, .. } = &mut node.kind else {
        return false;
    };
    for arg in named.iter_mut() {
        if arg.name == "subject" || arg.name == "subject_contains" {
            if let ExprKind::Str(s) = &mut arg.value.kind {
                *s = "zzqx".to_string();
                return true;
            }
        }
        if replace_first_subject(&mut arg.value) {
            return true;
        }
    }
    positional.iter_mut().any(replace_first_subject)
}

fn drop_optional(node: &mut ExprNode) -> bool {
    let ExprKind::Call { named, .. } = &mut node.kind else {
        return false;
    };
    let before = named.len();
    named.retain(|a| a.name != "location" && a.name != "attendees");
    named.len() != before
}

/// Applies `kind` to a single-root gold program when the mutation is certain
/// to change the outcome of a turn whose gold execution succeeded.
pub fn perturb(gold: &str, kind: Perturbation) -> Option<String> {
    let mut program: Program = parse_program(gold).ok()?;
    if program.expressions.len() != 1 {
        return None;
    }
    let root = &mut program.expressions[0];
    let root_fn = root.function_name()?.to_string();
    let changed = match kind {
        Perturbation::WrongHour => {
            let has_start = matches!(&root.kind, ExprKind::Call { named, .. } if named.iter().any(|a| a.name == "start"));
            let eligible = TIME_CONSTRUCTORS.contains(&root_fn.as_str())
                || (matches!(root_fn.as_str(), "CreateEvent" | "UpdateEvent") && has_start);
            eligible && bump_first_hour(root)
        }
        Perturbation::WrongSubject => {
            matches!(root_fn.as_str(), "CreateEvent" | "UpdateEvent" | "DeleteEvent" | "FindEvents")
                && replace_first_subject(root)
        }
        Perturbation::DroppedArgument => {
            matches!(root_fn.as_str(), "CreateEvent" | "UpdateEvent") && drop_optional(root)
        }
    };
    changed.then(|| canonicalize(&program))
}

fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Expected failure reason for `program` on `turn`, found by executing it
/// and comparing the resulting calendar with a diff rather than an equality
/// check. `None` means the turn would count as correct.
pub fn classify(turn: &BenchmarkTurn, program: &str, gold_history: &[DataFlowGraph]) -> Option<FailureReason> {
    let db = turn.db_before.to_database().expect("valid snapshot");
    let mut ctx = EvaluationContext::resume(turn.clock_now, db, gold_history.to_vec());
    let run = run_turn(program, &mut ctx);
    if run.parse_error.is_some() {
        return Some(FailureReason::ParseError);
    }
    if squash(&run.outcome.response) != squash(&turn.oracle_response) {
        let any_failed = run.outcome.graph.nodes.iter().any(|n| n.failure().is_some());
        return Some(if any_failed {
            FailureReason::ExecutionError
        } else {
            FailureReason::ResponseMismatch
        });
    }
    if !diff(&turn.db_after, &ctx.database.snapshot()).is_empty() {
        return Some(FailureReason::DbMismatch);
    }
    None
}

/// Gold graphs of each turn, from a sequential replay of the dialogue.
pub fn gold_histories(turns: &[BenchmarkTurn]) -> Vec<Vec<DataFlowGraph>> {
    let mut histories = Vec::with_capacity(turns.len());
    let mut graphs: Vec<DataFlowGraph> = Vec::new();
    for turn in turns {
        histories.push(graphs.clone());
        let db = turn.db_before.to_database().expect("valid snapshot");
        let mut ctx = EvaluationContext::resume(turn.clock_now, db, graphs.clone());
        graphs.push(run_turn(&turn.gold_program, &mut ctx).outcome.graph);
    }
    histories
}
