use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{FailureReason, Operation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnDetail {
    pub dialogue_id: String,
    pub turn_index: usize,
    pub operation: Operation,
    pub temporal: bool,
    pub em: bool,
    pub ea: bool,
    pub failure_reason: Option<FailureReason>,
}

/// Counts for one (category, split) cell. Percentages are `None` when `n == 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub n: usize,
    pub em_correct: usize,
    pub ea_correct: usize,
    pub em_pct: Option<f64>,
    pub ea_pct: Option<f64>,
}

impl Cell {
    fn add(&mut self, detail: &TurnDetail) {
        self.n += 1;
        self.em_correct += detail.em as usize;
        self.ea_correct += detail.ea as usize;
    }

    fn finish(&mut self) {
        if self.n > 0 {
            self.em_pct = Some(100.0 * self.em_correct as f64 / self.n as f64);
            self.ea_pct = Some(100.0 * self.ea_correct as f64 / self.n as f64);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// `all` or an operation name.
    pub category: String,
    pub overall: Cell,
    pub temporal: Cell,
    pub non_temporal: Cell,
}

/// EM/EA by operation category and temporal split, plus per-turn rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
    pub turns: Vec<TurnDetail>,
}

pub const CATEGORIES: [&str; 6] = ["all", "Create", "Query", "Update", "Delete", "Others"];

impl EvalReport {
    pub fn from_turns(turns: Vec<TurnDetail>) -> Self {
        let mut rows: Vec<ReportRow> = CATEGORIES
            .iter()
            .map(|c| ReportRow {
                category: c.to_string(),
                overall: Cell::default(),
                temporal: Cell::default(),
                non_temporal: Cell::default(),
            })
            .collect();
        for t in &turns {
            let op_row = 1 + Operation::ALL.iter().position(|o| *o == t.operation).expect("known op");
            for idx in [0, op_row] {
                let row = &mut rows[idx];
                row.overall.add(t);
                if t.temporal {
                    row.temporal.add(t);
                } else {
                    row.non_temporal.add(t);
                }
            }
        }
        for row in &mut rows {
            row.overall.finish();
            row.temporal.finish();
            row.non_temporal.finish();
        }
        EvalReport { rows, turns }
    }

    pub fn row(&self, category: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.category == category)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-width table: one row per category, EM/EA pairs per split.
    pub fn to_table(&self) -> String {
        fn pct(v: Option<f64>) -> String {
            v.map(|p| format!("{p:.1}")).unwrap_or_else(|| "N/A".to_string())
        }
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:^15} {:^15} {:^15}",
            "", "Non-Tmp", "Tmp", "Overall"
        );
        let _ = writeln!(
            out,
            "{:<10} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>6}",
            "Operation", "EM", "EA", "EM", "EA", "EM", "EA", "n"
        );
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:<10} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>6}",
                row.category,
                pct(row.non_temporal.em_pct),
                pct(row.non_temporal.ea_pct),
                pct(row.temporal.em_pct),
                pct(row.temporal.ea_pct),
                pct(row.overall.em_pct),
                pct(row.overall.ea_pct),
                row.overall.n
            );
        }
        out
    }
}
