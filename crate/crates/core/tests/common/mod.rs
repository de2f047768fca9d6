#![allow(dead_code)]

pub mod criteria;
pub mod model;
pub mod perturb;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::post;
use axum::{Json, Router};
use chrono::Datelike;
use dataflow_kit::eval::DialogueRecord;
use dataflow_kit::service::{ParseRequest, ParseResponse, ServiceHandle};
use dataflow_kit::DateTime;

pub fn clock_days(clock: DateTime) -> i64 {
    oracle::days_from_civil(
        i64::from(clock.date.year()),
        i64::from(clock.date.month()),
        i64::from(clock.date.day()),
    )
}

/// Key the mock parser answers on: what a remote parser actually sees.
pub type MockKey = (String, Vec<String>);

struct MockState {
    table: HashMap<MockKey, String>,
    fail_first: usize,
    calls: AtomicUsize,
}

async fn mock_parse(State(state): State<Arc<MockState>>, Json(req): Json<ParseRequest>) -> Result<Json<ParseResponse>, StatusCode> {
    let call = state.calls.fetch_add(1, Ordering::SeqCst);
    if call < state.fail_first {
        return Err(StatusCode::SERVICE_UNAVAILABLE);
    }
    let program = state
        .table
        .get(&(req.utterance, req.dialogue_history))
        .cloned()
        .unwrap_or_default();
    Ok(Json(ParseResponse { program }))
}

/// A remote parser that answers from a fixed table, after failing the first
/// `fail_first` calls with 503.
pub fn mock_parser(table: HashMap<MockKey, String>, fail_first: usize) -> ServiceHandle {
    let state = Arc::new(MockState {
        table,
        fail_first,
        calls: AtomicUsize::new(0),
    });
    let app = Router::new().route("/parse", post(mock_parse)).with_state(state);
    ServiceHandle::spawn_router(app, ([127, 0, 0, 1], 0).into()).expect("mock parser binds")
}

/// Table mapping each turn's parser inputs to `program_for(dialogue, turn)`.
pub fn mock_table(
    dataset: &[DialogueRecord],
    mut program_for: impl FnMut(&DialogueRecord, usize) -> Option<String>,
) -> HashMap<MockKey, String> {
    let mut table = HashMap::new();
    for d in dataset {
        let mut history = Vec::new();
        for (i, t) in d.turns.iter().enumerate() {
            if let Some(p) = program_for(d, i) {
                let previous = table.insert((t.user_utterance.clone(), history.clone()), p.clone());
                assert!(previous.is_none_or(|q| q == p), "mock key collision with different programs");
            }
            history.push(t.user_utterance.clone());
            history.push(t.oracle_response.clone());
        }
    }
    table
}

pub fn http() -> reqwest::blocking::Client {
    reqwest::blocking::Client::new()
}

pub fn post_json(client: &reqwest::blocking::Client, url: &str, body: &serde_json::Value) -> (u16, serde_json::Value) {
    let reply = client.post(url).json(body).send().expect("request sent");
    let status = reply.status().as_u16();
    (status, reply.json().expect("json reply"))
}

pub fn get_json(client: &reqwest::blocking::Client, url: &str) -> (u16, serde_json::Value) {
    let reply = client.get(url).send().expect("request sent");
    let status = reply.status().as_u16();
    (status, reply.json().expect("json reply"))
}
