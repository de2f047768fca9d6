// Chat through the bundled pattern parser in-process.
//
// cargo run --example stub_chat

use dataflow_kit::graph::NO_PARSE_RESPONSE;
use dataflow_kit::stub::stub_parse;
use dataflow_kit::{run_turn, Database, DateTime, EvaluationContext};

fn main() {
    let now = DateTime::ymd_hm(2023, 1, 2, 9, 0).unwrap();
    let mut ctx = EvaluationContext::new(now, Database::new());
    let mut prev: Option<String> = None;
    for utterance in [
        "create an event called standup at 10 pm tomorrow",
        "what time is 7 am",
        "find the standup",
        "move the standup to tomorrow at 9 pm until 11 pm",
        "cancel it",
        "order a pizza",
    ] {
        println!("user:  {utterance}");
        let reply = match stub_parse(utterance, prev.as_deref()) {
            Some(program) => {
                println!("       {program}");
                run_turn(&program, &mut ctx).outcome.response
            }
            None => NO_PARSE_RESPONSE.to_string(),
        };
        println!("agent: {reply}");
        prev = Some(reply);
    }
}
