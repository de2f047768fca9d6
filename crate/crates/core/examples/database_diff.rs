// Compare calendars modulo ids and ordering, diff them, and round-trip to disk.
//
// cargo run --example database_diff

use dataflow_kit::db::apply_diff;
use dataflow_kit::{db_equals, diff, run_turn, Database, DateTime, EvaluationContext};

fn main() {
    let now = DateTime::ymd_hm(2023, 1, 2, 9, 0).unwrap();
    let mut ctx = EvaluationContext::new(now, Database::new());
    run_turn(r#"CreateEvent(subject="retro", start=DateTimeOf(Today(), NumberPM(2)))"#, &mut ctx);
    run_turn(r#"CreateEvent(subject="lunch", start=DateTimeOf(Today(), NumberPM(12)), attendees="ana, bo")"#, &mut ctx);
    let before = ctx.database.snapshot();

    run_turn(r#"UpdateEvent(target=EventConstraint(subject_contains="retro"), subject="planning")"#, &mut ctx);
    run_turn(r#"DeleteEvent(EventConstraint(attendee="ANA"))"#, &mut ctx);
    let after = ctx.database.snapshot();

    let entries = diff(&before, &after);
    println!("{}", serde_json::to_string_pretty(&entries).unwrap());
    println!("apply_diff reaches target: {}", db_equals(&apply_diff(&before, &entries), &after));

    let path = std::env::temp_dir().join(format!("dfkit-example-{}.json", std::process::id()));
    ctx.database.save(&path).unwrap();
    let loaded = Database::load(&path).unwrap();
    println!("reloaded equal: {}", db_equals(&loaded.snapshot(), &after));
    let _ = std::fs::remove_file(path);
}
