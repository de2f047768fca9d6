use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::db::Snapshot;
use crate::value::DateTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Operation {
    Create,
    Query,
    Update,
    Delete,
    Others,
}

impl Operation {
    pub const ALL: [Operation; 5] = [
        Operation::Create,
        Operation::Query,
        Operation::Update,
        Operation::Delete,
        Operation::Others,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operation::Create => "Create",
            Operation::Query => "Query",
            Operation::Update => "Update",
            Operation::Delete => "Delete",
            Operation::Others => "Others",
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One annotated turn: what the user said, the gold program, and the oracle
/// response plus database before and after.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkTurn {
    pub turn_index: usize,
    pub user_utterance: String,
    pub prev_agent_utterance: Option<String>,
    pub gold_program: String,
    pub oracle_response: String,
    pub db_before: Snapshot,
    pub db_after: Snapshot,
    pub operation: Operation,
    pub temporal: bool,
    pub clock_now: DateTime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueRecord {
    pub dialogue_id: String,
    pub turns: Vec<BenchmarkTurn>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub dialogue_id: String,
    pub turn_index: usize,
    pub program: String,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
    #[error("dialogue {dialogue_id} turn {turn_index}: {message}")]
    Inconsistent {
        dialogue_id: String,
        turn_index: usize,
        message: String,
    },
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let display = path.display().to_string();
    let file = fs::File::open(path).map_err(|source| DatasetError::Io {
        path: display.clone(),
        source,
    })?;
    parse_jsonl(BufReader::new(file), &display)
}

/// Parses JSON Lines, skipping blank lines. `origin` labels errors.
pub fn parse_jsonl<T: for<'de> Deserialize<'de>>(
    reader: impl BufRead,
    origin: &str,
) -> Result<Vec<T>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| DatasetError::Io {
            path: origin.to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| DatasetError::Format {
            path: origin.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<DialogueRecord>, DatasetError> {
    read_jsonl(path.as_ref())
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>, DatasetError> {
    read_jsonl(path.as_ref())
}

pub fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> std::io::Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(to_jsonl(records).as_bytes())?;
    file.flush()
}

/// The gold programs of a dataset as a predictions file.
pub fn gold_predictions(dataset: &[DialogueRecord]) -> Vec<PredictionRecord> {
    dataset
        .iter()
        .flat_map(|d| {
            d.turns.iter().map(|t| PredictionRecord {
                dialogue_id: d.dialogue_id.clone(),
                turn_index: t.turn_index,
                program: t.gold_program.clone(),
            })
        })
        .collect()
}

pub fn index_predictions(records: Vec<PredictionRecord>) -> HashMap<(String, usize), String> {
    records
        .into_iter()
        .map(|r| ((r.dialogue_id, r.turn_index), r.program))
        .collect()
}
