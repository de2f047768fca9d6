//! Parser bindings: the bundled stub grammar, or any HTTP endpoint speaking
//! the `/parse` contract.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{PredictionError, PredictionSource, TurnQuery};
use crate::stub::stub_parse;

/// Body of `POST /parse`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseRequest {
    pub utterance: String,
    #[serde(default)]
    pub prev_agent_utterance: Option<String>,
    #[serde(default)]
    pub dialogue_history: Vec<String>,
}

/// Reply of `POST /parse`. An empty `program` means no parse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseResponse {
    pub program: String,
}

#[derive(Debug, Clone, Error)]
pub enum RemoteParserError {
    #[error("parser at {url} unreachable after {attempts} attempt(s): {message}")]
    Unavailable {
        url: String,
        attempts: u32,
        message: String,
    },
    #[error("parser at {url} rejected the request with status {status}")]
    Rejected { url: String, status: u16 },
    #[error("parser at {url} sent an invalid reply: {message}")]
    BadReply { url: String, message: String },
}

/// Blocking client for a remote parser. Transport failures, timeouts, and 5xx
/// replies are retried up to `max_retries` times; other failures are final.
#[derive(Debug, Clone)]
pub struct RemoteParser {
    url: String,
    max_retries: u32,
    client: reqwest::blocking::Client,
}

impl RemoteParser {
    pub fn new(url: impl Into<String>, timeout: Duration, max_retries: u32) -> Self {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .expect("http client builds");
        RemoteParser {
            url: url.into(),
            max_retries,
            client,
        }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    /// `Ok(None)` when the parser answers with an empty program.
    pub fn parse(&self, request: &ParseRequest) -> Result<Option<String>, RemoteParserError> {
        let mut last_failure = String::new();
        let attempts = self.max_retries + 1;
        for attempt in 0..attempts {
            if attempt > 0 {
                thread::sleep(Duration::from_millis(25 * u64::from(attempt)));
            }
            let reply = match self.client.post(&self.url).json(request).send() {
                Ok(reply) => reply,
                Err(e) => {
                    last_failure = e.to_string();
                    continue;
                }
            };
            let status = reply.status();
            if status.is_server_error() {
                last_failure = format!("status {}", status.as_u16());
                continue;
            }
            if !status.is_success() {
                return Err(RemoteParserError::Rejected {
                    url: self.url.clone(),
                    status: status.as_u16(),
                });
            }
            let body: ParseResponse = reply.json().map_err(|e| RemoteParserError::BadReply {
                url: self.url.clone(),
                message: e.to_string(),
            })?;
            return Ok(Some(body.program).filter(|p| !p.trim().is_empty()));
        }
        Err(RemoteParserError::Unavailable {
            url: self.url.clone(),
            attempts,
            message: last_failure,
        })
    }
}

impl PredictionSource for RemoteParser {
    fn predict(&self, query: &TurnQuery<'_>) -> Result<Option<String>, PredictionError> {
        let request = ParseRequest {
            utterance: query.turn.user_utterance.clone(),
            prev_agent_utterance: query.turn.prev_agent_utterance.clone(),
            dialogue_history: query.dialogue_history.clone(),
        };
        self.parse(&request).map_err(|e| PredictionError(e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub enum ParserBinding {
    Stub,
    Remote(RemoteParser),
}

impl ParserBinding {
    /// Blocks on network I/O for remote bindings.
    pub fn parse(&self, request: &ParseRequest) -> Result<Option<String>, RemoteParserError> {
        match self {
            ParserBinding::Stub => Ok(stub_parse(
                &request.utterance,
                request.prev_agent_utterance.as_deref(),
            )),
            ParserBinding::Remote(remote) => remote.parse(request),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ParserBinding::Stub => "stub".to_string(),
            ParserBinding::Remote(remote) => remote.url().to_string(),
        }
    }
}
