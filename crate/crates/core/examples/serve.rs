// Start the HTTP service on a free port, drive one session over HTTP, and
// stop. Pass `--wait` to keep serving until Ctrl-C.
//
// cargo run --example serve

use dataflow_kit::service::{ServiceConfig, ServiceHandle};
use serde_json::{json, Value};

fn main() {
    let service = ServiceHandle::spawn(ServiceConfig::default()).expect("service binds");
    let base = service.url();
    println!("serving on {base}");
    let client = reqwest::blocking::Client::new();

    let session: Value = client.post(format!("{base}/session")).json(&json!({})).send().unwrap().json().unwrap();
    let id = session["session_id"].as_str().unwrap();
    for utterance in ["create an event called retro at 3 pm next friday", "find the retro"] {
        let reply: Value = client
            .post(format!("{base}/session/{id}/chat"))
            .json(&json!({ "utterance": utterance }))
            .send()
            .unwrap()
            .json()
            .unwrap();
        println!("{utterance} -> {} ({} change(s))", reply["response"], reply["db_diff"].as_array().unwrap().len());
    }
    let calendar: Value = client.get(format!("{base}/session/{id}/calendar")).send().unwrap().json().unwrap();
    println!("calendar: {calendar}");

    if std::env::args().any(|a| a == "--wait") {
        println!("press Ctrl-C to stop");
        loop {
            std::thread::park();
        }
    }
    service.shutdown().unwrap();
}
