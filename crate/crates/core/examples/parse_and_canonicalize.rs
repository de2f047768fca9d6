// Parse program text, print its canonical form, and show a located syntax error.
//
// cargo run --example parse_and_canonicalize

use dataflow_kit::{canonicalize, parse_program};

fn main() {
    let noisy = r#"UpdateEvent( start = DateTimeOf(NextDOW("friday"),NumberPM(3)),
                     target=EventConstraint(subject_contains = "retro") )"#;
    let program = parse_program(noisy).expect("valid program");
    println!("canonical: {}", canonicalize(&program));

    let root = &program.expressions[0];
    println!("root spans bytes {}..{}", root.span.start, root.span.end);

    let broken = "CreateEvent(subject=\"x\", start=";
    match parse_program(broken) {
        Ok(_) => unreachable!(),
        Err(e) => println!("error: {e}"),
    }
}
