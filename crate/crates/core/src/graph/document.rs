use serde::{Deserialize, Serialize};

use super::{DataFlowGraph, NodeStatus};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub id: u64,
    pub label: String,
    pub status: NodeStatus,
    pub result: Option<String>,
    pub error: Option<String>,
}

/// Data flows `from` the argument node `to` the call consuming it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub from: u64,
    pub to: u64,
    pub slot: String,
}

/// JSON shape handed to visualizers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub turn: usize,
    pub nodes: Vec<NodeEntry>,
    pub edges: Vec<EdgeEntry>,
}

impl GraphDocument {
    pub fn from_graph(graph: &DataFlowGraph) -> Self {
        let nodes = graph
            .nodes
            .iter()
            .map(|n| NodeEntry {
                id: n.id.0,
                label: n.label(),
                status: n.status(),
                result: n.result().map(|v| v.render()),
                error: n.failure().map(|e| e.to_string()),
            })
            .collect();
        let edges = graph
            .nodes
            .iter()
            .flat_map(|n| {
                n.arg_edges.iter().map(move |(slot, dep)| EdgeEntry {
                    from: dep.0,
                    to: n.id.0,
                    slot: slot.clone(),
                })
            })
            .collect();
        GraphDocument {
            turn: graph.turn_index,
            nodes,
            edges,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph document serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph document serializes")
    }
}

impl DataFlowGraph {
    pub fn to_document(&self) -> GraphDocument {
        GraphDocument::from_graph(self)
    }
}
