// Three spellings of 10 PM: none match exactly, all execute identically.
//
// cargo run --example equivalence_triple

use dataflow_kit::eval::{gold_predictions, run_benchmark, validate_dataset, OfflinePredictions, RunOptions};
use dataflow_kit::fixtures::generate_dataset;
use dataflow_kit::{exact_equal, parse_program, run_turn, Database, DateTime, EvaluationContext};

fn main() {
    let forms = ["NumberPM(10)", "HourMilitary(22)", "HourMinutePm(hour=10, minute=0)"];
    let now = DateTime::ymd_hm(2023, 1, 2, 9, 0).unwrap();
    for a in forms {
        for b in forms {
            let em = exact_equal(&parse_program(a).unwrap(), &parse_program(b).unwrap());
            let run = |p: &str| run_turn(p, &mut EvaluationContext::new(now, Database::new())).outcome.response;
            println!("{a:<32} vs {b:<32} EM={em:<5} same result={}", run(a) == run(b));
        }
    }

    // Gold predictions score 100% on both metrics.
    let dataset = generate_dataset(1, 5);
    assert!(validate_dataset(&dataset).is_empty());
    let report = run_benchmark(&dataset, &OfflinePredictions::new(gold_predictions(&dataset)), RunOptions::default())
        .unwrap();
    let all = report.row("all").unwrap().overall;
    println!("gold: EM {:?}% EA {:?}%", all.em_pct, all.ea_pct);
}
