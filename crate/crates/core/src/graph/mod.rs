//! Computational graphs built from programs, and their evaluation against a
//! session context.

mod build;
mod document;
mod evaluate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::{CalendarEvent, DomainError};
use crate::db::Database;
use crate::value::{DateTime, Value, ValueKind};

pub use self::build::build_graph;
pub use self::document::{EdgeEntry, GraphDocument, NodeEntry};
pub use self::evaluate::{evaluate, execute_program, run_turn, TurnOutcome, NO_PARSE_RESPONSE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("{function} expects {expected} argument(s), got {got}")]
    ArityMismatch {
        function: String,
        expected: String,
        got: usize,
    },
    #[error("{function} argument {slot} expects {expected}, got {got}")]
    TypeMismatch {
        function: String,
        slot: String,
        expected: String,
        got: String,
    },
    #[error("{function} has no parameter named {name}")]
    UnknownArgument { function: String, name: String },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

impl ExecError {
    pub fn sentence(&self) -> String {
        match self {
            ExecError::Domain(e) => e.sentence(),
            other => format!("{other}."),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Literal {
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Literal {
    pub fn value(&self) -> Value {
        match self {
            Literal::Int(n) => Value::Int(*n),
            Literal::Text(s) => Value::Text(s.clone()),
            Literal::Bool(b) => Value::Bool(*b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeStatus {
    Pending,
    Evaluated,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeState {
    Pending,
    Evaluated(Value),
    Failed(ExecError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphNode {
    pub id: NodeId,
    /// Callee name, or the literal's kind name for literal nodes.
    pub function: String,
    /// `(slot, argument node)`; positional slots are `"0"`, `"1"`, ...
    pub arg_edges: Vec<(String, NodeId)>,
    pub literal: Option<Literal>,
    pub state: NodeState,
}

impl GraphNode {
    pub fn status(&self) -> NodeStatus {
        match self.state {
            NodeState::Pending => NodeStatus::Pending,
            NodeState::Evaluated(_) => NodeStatus::Evaluated,
            NodeState::Failed(_) => NodeStatus::Failed,
        }
    }

    pub fn result(&self) -> Option<&Value> {
        match &self.state {
            NodeState::Evaluated(v) => Some(v),
            _ => None,
        }
    }

    pub fn failure(&self) -> Option<&ExecError> {
        match &self.state {
            NodeState::Failed(e) => Some(e),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match &self.literal {
            Some(Literal::Int(n)) => n.to_string(),
            Some(Literal::Bool(b)) => b.to_string(),
            Some(Literal::Text(s)) => {
                let mut out = String::new();
                crate::expr::write_string_literal(s, &mut out);
                out
            }
            None => self.function.clone(),
        }
    }
}

/// One turn's graph. Nodes are listed in evaluation (topological) order and
/// each root's subtree occupies a contiguous run ending at the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataFlowGraph {
    pub turn_index: usize,
    pub nodes: Vec<GraphNode>,
    pub roots: Vec<NodeId>,
}

impl DataFlowGraph {
    pub fn empty(turn_index: usize) -> Self {
        DataFlowGraph {
            turn_index,
            nodes: Vec::new(),
            roots: Vec::new(),
        }
    }

    pub fn node(&self, id: NodeId) -> Option<&GraphNode> {
        let first = self.nodes.first()?.id.0;
        let idx = id.0.checked_sub(first)? as usize;
        self.nodes.get(idx).filter(|n| n.id == id)
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.arg_edges.len()).sum()
    }

    pub fn failed_nodes(&self) -> impl Iterator<Item = &GraphNode> {
        self.nodes.iter().filter(|n| n.status() == NodeStatus::Failed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DbMutation {
    Created { event: CalendarEvent },
    Updated { before: CalendarEvent, after: CalendarEvent },
    Deleted { event: CalendarEvent },
}

/// Everything a turn's evaluation may read or change. Confined to one session.
#[derive(Debug, Clone)]
pub struct EvaluationContext {
    pub now: DateTime,
    pub history: Vec<DataFlowGraph>,
    pub database: Database,
    next_node_id: u64,
}

impl EvaluationContext {
    pub fn new(now: DateTime, database: Database) -> Self {
        EvaluationContext {
            now,
            history: Vec::new(),
            database,
            next_node_id: 0,
        }
    }

    /// Context continuing after `history`; new node ids start past every id
    /// already used there.
    pub fn resume(now: DateTime, database: Database, history: Vec<DataFlowGraph>) -> Self {
        let next_node_id = history
            .iter()
            .flat_map(|g| g.nodes.iter())
            .map(|n| n.id.0 + 1)
            .max()
            .unwrap_or(0);
        EvaluationContext {
            now,
            history,
            database,
            next_node_id,
        }
    }

    pub fn next_turn_index(&self) -> usize {
        self.history.len()
    }

    pub fn next_node_id(&self) -> u64 {
        self.next_node_id
    }

    pub(crate) fn allocate_node_id(&mut self) -> NodeId {
        let id = NodeId(self.next_node_id);
        self.next_node_id += 1;
        id
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionOutcome {
    pub graph: DataFlowGraph,
    pub response: String,
    pub db_mutations: Vec<DbMutation>,
}

impl ExecutionOutcome {
    pub fn failed(&self) -> bool {
        self.graph.failed_nodes().next().is_some()
    }

    pub fn first_failure(&self) -> Option<&ExecError> {
        self.graph.nodes.iter().find_map(GraphNode::failure)
    }

    pub fn root_values(&self) -> Vec<Option<&Value>> {
        self.graph
            .roots
            .iter()
            .map(|id| self.graph.node(*id).and_then(GraphNode::result))
            .collect()
    }
}

/// Most recent evaluated result of `kind` in prior turns, newest turn first
/// and last node first within a turn.
pub fn refer(kind: ValueKind, history: &[DataFlowGraph]) -> Result<Value, DomainError> {
    history
        .iter()
        .rev()
        .flat_map(|g| g.nodes.iter().rev())
        .filter_map(GraphNode::result)
        .find(|v| v.kind() == kind)
        .cloned()
        .ok_or(DomainError::ReferenceNotFound(kind))
}
