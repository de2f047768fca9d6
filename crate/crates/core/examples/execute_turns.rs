// Run a short dialogue of programs against one calendar, including a
// reference back to an earlier turn and a failing node.
//
// cargo run --example execute_turns

use dataflow_kit::{run_turn, Database, DateTime, EvaluationContext};

fn main() {
    let now = DateTime::ymd_hm(2023, 1, 2, 9, 0).unwrap();
    let mut ctx = EvaluationContext::new(now, Database::new());
    let turns = [
        r#"CreateEvent(subject="standup", start=DateTimeOf(Tomorrow(), NumberPM(10)))"#,
        r#"UpdateEvent(target=Refer("EventRef"), location="Room 4")"#,
        r#"FindEvents(EventConstraint(location="room 4"))"#,
        r#"CreateEvent(subject="late", start=DateTimeOf(Today(), NumberPM(13)))"#,
        r#"DeleteEvent(EventConstraint(subject_contains="stand"))"#,
    ];
    for program in turns {
        let turn = run_turn(program, &mut ctx);
        println!("> {program}");
        println!("  {}", turn.outcome.response);
        let doc = turn.outcome.graph.to_document();
        let statuses: Vec<String> = doc.nodes.iter().map(|n| format!("{}:{:?}", n.label, n.status)).collect();
        println!("  nodes {}", statuses.join(" "));
    }
    println!("{} event(s) left", ctx.database.len());
}
