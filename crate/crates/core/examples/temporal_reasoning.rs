// Resolve relative dates and times against a fixed clock.
//
// cargo run --example temporal_reasoning

use dataflow_kit::{run_turn, Database, DateTime, EvaluationContext};

fn main() {
    let now = DateTime::ymd_hm(2024, 2, 28, 16, 45).unwrap();
    let mut ctx = EvaluationContext::new(now, Database::new());
    println!("clock: {now}");
    for program in [
        "Today()",
        "Tomorrow()",
        r#"NextDOW("Wednesday")"#,
        "MD(month=2, day=29)",
        "MD(month=1, day=15)",
        "NumberPM(10)",
        "HourMilitary(22)",
        "HourMinutePm(hour=10, minute=0)",
        "DateTimeOf(NextDOW(\"monday\"), NumberAM(7))",
        "MD(month=2, day=30)",
    ] {
        println!("{program:<45} => {}", run_turn(program, &mut ctx).outcome.response);
    }
}
