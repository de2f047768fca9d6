// Generate a dataset, validate it, and score the stub parser and a partially
// wrong predictions set.
//
// cargo run --example benchmark_offline

use dataflow_kit::eval::{
    gold_predictions, run_benchmark, validate_dataset, OfflinePredictions, RunOptions, StubParser,
};
use dataflow_kit::fixtures::generate_dataset;

fn main() {
    let dataset = generate_dataset(42, 25);
    let violations = validate_dataset(&dataset);
    println!("{} dialogues, {} violations", dataset.len(), violations.len());

    let stub = run_benchmark(&dataset, &StubParser, RunOptions::default()).unwrap();
    println!("stub parser:\n{}", stub.to_table());

    // Drop every third prediction.
    let partial = gold_predictions(&dataset).into_iter().enumerate().filter(|(i, _)| i % 3 != 0).map(|(_, p)| p).collect();
    let report = run_benchmark(&dataset, &OfflinePredictions::new(partial), RunOptions { workers: Some(2) }).unwrap();
    println!("two thirds of gold:\n{}", report.to_table());
}
