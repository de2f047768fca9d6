use super::{DataFlowGraph, EvaluationContext, GraphNode, Literal, NodeId, NodeState};
use crate::expr::{ExprKind, ExprNode, Program};

/// One node per call and per literal, children before parents.
pub fn build_graph(program: &Program, context: &mut EvaluationContext) -> DataFlowGraph {
    let mut nodes = Vec::with_capacity(program.expressions.iter().map(ExprNode::node_count).sum());
    let roots = program
        .expressions
        .iter()
        .map(|expr| push_node(expr, context, &mut nodes))
        .collect();
    DataFlowGraph {
        turn_index: context.next_turn_index(),
        nodes,
        roots,
    }
}

fn push_node(expr: &ExprNode, context: &mut EvaluationContext, nodes: &mut Vec<GraphNode>) -> NodeId {
    let (function, literal, arg_edges) = match &expr.kind {
        ExprKind::Int(n) => ("Int".to_string(), Some(Literal::Int(*n)), Vec::new()),
        ExprKind::Str(s) => ("Text".to_string(), Some(Literal::Text(s.clone())), Vec::new()),
        ExprKind::Bool(b) => ("Bool".to_string(), Some(Literal::Bool(*b)), Vec::new()),
        ExprKind::Call {
            function,
            positional,
            named,
        } => {
            let mut edges = Vec::with_capacity(positional.len() + named.len());
            for (i, arg) in positional.iter().enumerate() {
                edges.push((i.to_string(), push_node(arg, context, nodes)));
            }
            for arg in named {
                edges.push((arg.name.clone(), push_node(&arg.value, context, nodes)));
            }
            (function.clone(), None, edges)
        }
    };
    let id = context.allocate_node_id();
    nodes.push(GraphNode {
        id,
        function,
        arg_edges,
        literal,
        state: NodeState::Pending,
    });
    id
}
