use super::{
    build_graph, DataFlowGraph, DbMutation, EvaluationContext, ExecError, ExecutionOutcome, GraphNode,
    NodeState,
};
use crate::calendar::{lookup, CalendarEvent, CallContext};
use crate::db::Database;
use crate::expr::{parse_program, ParseError, Program};
use crate::value::{render_date, Value};

/// Response for turns whose program is missing or does not parse.
pub const NO_PARSE_RESPONSE: &str = "Sorry — I could not understand that.";

/// Evaluates every node in listed order and appends the graph to history.
///
/// Each root runs against a copy of the database taken just before it; if any
/// node under that root fails, the copy is restored and the root's mutations
/// are dropped.
pub fn evaluate(mut graph: DataFlowGraph, context: &mut EvaluationContext) -> ExecutionOutcome {
    let mut responses = Vec::with_capacity(graph.roots.len());
    let mut mutations = Vec::new();
    let mut start = 0;

    for root in graph.roots.clone() {
        let end = start
            + graph.nodes[start..]
                .iter()
                .position(|n| n.id == root)
                .expect("root present in node list")
            + 1;
        let saved = context.database.clone();
        let mut root_mutations = Vec::new();

        for i in start..end {
            let state = evaluate_node(&graph, &graph.nodes[i], context, &mut root_mutations);
            graph.nodes[i].state = state;
        }

        let failure = graph.nodes[start..end].iter().find_map(GraphNode::failure);
        match failure {
            Some(err) => {
                context.database = saved;
                responses.push(format!("Sorry — {}", err.sentence()));
            }
            None => {
                let root_node = &graph.nodes[end - 1];
                responses.push(respond(root_node, &root_mutations, &context.database));
                mutations.extend(root_mutations);
            }
        }
        start = end;
    }

    context.history.push(graph.clone());
    ExecutionOutcome {
        graph,
        response: responses.join(" "),
        db_mutations: mutations,
    }
}

fn evaluate_node(
    graph: &DataFlowGraph,
    node: &GraphNode,
    context: &mut EvaluationContext,
    mutations: &mut Vec<DbMutation>,
) -> NodeState {
    if let Some(lit) = &node.literal {
        return NodeState::Evaluated(lit.value());
    }
    let mut positional = Vec::new();
    let mut named = Vec::new();
    for (slot, dep) in &node.arg_edges {
        // An unevaluated dependency means something below already failed.
        let Some(value) = graph.node(*dep).and_then(GraphNode::result) else {
            return NodeState::Pending;
        };
        if slot.bytes().all(|b| b.is_ascii_digit()) {
            positional.push(value.clone());
        } else {
            named.push((slot.clone(), value.clone()));
        }
    }
    let Some(spec) = lookup(&node.function) else {
        return NodeState::Failed(ExecError::UnknownFunction(node.function.clone()));
    };
    let args = match spec.bind(positional, named) {
        Ok(args) => args,
        Err(e) => return NodeState::Failed(e),
    };
    let mut call = CallContext {
        now: context.now,
        database: &mut context.database,
        history: &context.history,
        mutations,
    };
    match spec.invoke(&mut call, &args) {
        Ok(v) => NodeState::Evaluated(v),
        Err(e) => NodeState::Failed(ExecError::Domain(e)),
    }
}

fn list_response(events: &[CalendarEvent]) -> String {
    if events.is_empty() {
        "I couldn't find any matching events.".to_string()
    } else {
        let list: Vec<String> = events.iter().map(CalendarEvent::describe).collect();
        format!("I found {} event(s): {}.", events.len(), list.join("; "))
    }
}

fn respond(root: &GraphNode, mutations: &[DbMutation], db: &Database) -> String {
    let value = root.result().expect("root evaluated");
    match (root.function.as_str(), value) {
        ("CreateEvent", Value::EventRef(id)) => match db.get(*id) {
            Some(e) => format!(
                "I've put {} on your calendar on {} from {} to {}.",
                e.subject,
                render_date(e.start.date),
                e.start.time.render(),
                e.end.time.render()
            ),
            None => format!("I've put event #{id} on your calendar."),
        },
        ("UpdateEvent", Value::EventRef(id)) => {
            let subject = mutations
                .iter()
                .rev()
                .find_map(|m| match m {
                    DbMutation::Updated { after, .. } if after.id == *id => Some(after.subject.clone()),
                    _ => None,
                })
                .or_else(|| db.get(*id).map(|e| e.subject.clone()))
                .unwrap_or_else(|| format!("event #{id}"));
            format!("I've updated {subject}.")
        }
        ("DeleteEvent", Value::Unit) => {
            let subject = mutations
                .iter()
                .rev()
                .find_map(|m| match m {
                    DbMutation::Deleted { event } => Some(event.subject.clone()),
                    _ => None,
                })
                .unwrap_or_else(|| "the event".to_string());
            format!("I've removed {subject} from your calendar.")
        }
        (_, Value::EventList(events)) => list_response(events),
        (_, Value::EventRef(id)) => match db.get(*id) {
            Some(e) => format!("That's {}.", e.describe()),
            None => format!("That's event #{id}, which is no longer on your calendar."),
        },
        (_, Value::Time(t)) => t.render(),
        (_, Value::Date(d)) => render_date(*d),
        (_, Value::DateTime(dt)) => dt.render(),
        (_, Value::Int(n)) => n.to_string(),
        (_, Value::Text(s)) => s.clone(),
        (_, Value::Bool(true)) => "Yes.".to_string(),
        (_, Value::Bool(false)) => "No.".to_string(),
        (_, Value::Constraint(c)) => c.to_string(),
        (_, Value::Unit) => "Done.".to_string(),
    }
}

/// Builds and evaluates a parsed program.
pub fn execute_program(program: &Program, context: &mut EvaluationContext) -> ExecutionOutcome {
    let graph = build_graph(program, context);
    evaluate(graph, context)
}

#[derive(Debug, Clone)]
pub struct TurnOutcome {
    pub program: Option<Program>,
    pub parse_error: Option<ParseError>,
    pub outcome: ExecutionOutcome,
}

/// Parses and executes one turn's program text. A parse failure still
/// records an empty graph in history so turn numbering stays aligned.
pub fn run_turn(source: &str, context: &mut EvaluationContext) -> TurnOutcome {
    match parse_program(source) {
        Ok(program) => {
            let outcome = execute_program(&program, context);
            TurnOutcome {
                program: Some(program),
                parse_error: None,
                outcome,
            }
        }
        Err(err) => {
            let graph = DataFlowGraph::empty(context.next_turn_index());
            context.history.push(graph.clone());
            TurnOutcome {
                program: None,
                parse_error: Some(err),
                outcome: ExecutionOutcome {
                    graph,
                    response: NO_PARSE_RESPONSE.to_string(),
                    db_mutations: Vec::new(),
                },
            }
        }
    }
}
