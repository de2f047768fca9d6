//! Seeded generator of self-consistent benchmark dialogues.
//!
//! Utterances are sampled from the stub grammar's templates against the
//! dialogue's evolving calendar, parsed with [`stub_parse`], and executed to
//! record the oracle response and database snapshots. Because the oracle is
//! produced by the engine itself, every generated dataset validates.

use chrono::{Datelike, Duration};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calendar::{CalendarEvent, DayOfWeek};
use crate::db::Database;
use crate::eval::{BenchmarkTurn, DialogueRecord, Operation};
use crate::graph::{run_turn, EvaluationContext};
use crate::stub::stub_parse;
use crate::value::{Date, DateTime, TimeOfDay};

const SUBJECTS: &[&str] = &[
    "standup",
    "team sync",
    "dentist",
    "project review",
    "yoga class",
    "budget meeting",
    "coffee chat",
    "design review",
    "piano lesson",
    "gym",
    "retro",
    "interview",
    "haircut",
    "book club",
];
const RENAMES: &[&str] = &["planning", "demo", "offsite prep", "sync up", "brainstorm"];
const PEOPLE: &[&str] = &["ana", "bo", "chen", "dara", "eli"];
const PLACES: &[&str] = &["room 4", "the cafe", "the lobby", "building b"];
const MONTHS: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

/// Generates `count` dialogues; identical `(seed, count)` give identical output.
pub fn generate_dataset(seed: u64, count: usize) -> Vec<DialogueRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| generate_dialogue(&mut rng, format!("s{seed}-d{i:04}")))
        .collect()
}

struct Draft {
    utterance: String,
    operation: Operation,
    temporal: bool,
    /// Reject the draft if executing it fails.
    must_succeed: bool,
}

fn generate_dialogue(rng: &mut ChaCha8Rng, dialogue_id: String) -> DialogueRecord {
    let start = Date::from_ymd_opt(2023, 1, 1).expect("valid") + Duration::days(rng.random_range(0..730));
    let clock = DateTime::new(
        start,
        TimeOfDay::from_hm(rng.random_range(7..=11), 0).expect("valid"),
    );
    let mut ctx = EvaluationContext::new(clock, seed_database(rng, clock));
    let turn_count = rng.random_range(3..=6);
    let mut turns: Vec<BenchmarkTurn> = Vec::with_capacity(turn_count);

    for turn_index in 0..turn_count {
        let (draft, program) = (0..50)
            .find_map(|_| {
                let draft = draft_turn(rng, &ctx);
                let program = stub_parse(&draft.utterance, None)
                    .unwrap_or_else(|| panic!("stub grammar rejects generated {:?}", draft.utterance));
                if draft.must_succeed {
                    let mut trial = ctx.clone();
                    if run_turn(&program, &mut trial).outcome.failed() {
                        return None;
                    }
                }
                Some((draft, program))
            })
            .unwrap_or_else(|| {
                let draft = Draft {
                    utterance: "what was that".to_string(),
                    operation: Operation::Others,
                    temporal: false,
                    must_succeed: false,
                };
                let program = stub_parse(&draft.utterance, None).expect("in grammar");
                (draft, program)
            });

        let db_before = ctx.database.snapshot();
        let outcome = run_turn(&program, &mut ctx).outcome;
        turns.push(BenchmarkTurn {
            turn_index,
            user_utterance: draft.utterance,
            prev_agent_utterance: turns.last().map(|t| t.oracle_response.clone()),
            gold_program: program,
            oracle_response: outcome.response,
            db_before,
            db_after: ctx.database.snapshot(),
            operation: draft.operation,
            temporal: draft.temporal,
            clock_now: clock,
        });
    }
    DialogueRecord { dialogue_id, turns }
}

fn seed_database(rng: &mut ChaCha8Rng, clock: DateTime) -> Database {
    let mut db = Database::new();
    for _ in 0..rng.random_range(0..=3) {
        let start = random_slot(rng, clock);
        let end = start.add_minutes(*[30, 60, 90].choose(rng).expect("non-empty"));
        if db.events().any(|e| e.overlaps(start, end)) {
            continue;
        }
        let attendees = if rng.random_bool(0.3) {
            vec![PEOPLE.choose(rng).expect("non-empty").to_string()]
        } else {
            Vec::new()
        };
        db.insert(CalendarEvent {
            id: 0,
            subject: SUBJECTS.choose(rng).expect("non-empty").to_string(),
            start,
            end,
            attendees,
            location: rng
                .random_bool(0.3)
                .then(|| PLACES.choose(rng).expect("non-empty").to_string()),
        });
    }
    db
}

/// A start time later today or within the next ten days, on whole or half
/// hours mostly, never so late that an hour-long event crosses midnight.
fn random_slot(rng: &mut ChaCha8Rng, clock: DateTime) -> DateTime {
    let date = clock.date + Duration::days(rng.random_range(0..=10));
    let first_hour = if date == clock.date { clock.time.hour() + 1 } else { 7 };
    let hour = rng.random_range(first_hour..=21);
    let minute = *[0, 0, 0, 30, 30, 15, 45].choose(rng).expect("non-empty");
    DateTime::new(date, TimeOfDay::from_hm(hour, minute).expect("valid"))
}

fn time_phrase(rng: &mut ChaCha8Rng, t: TimeOfDay) -> String {
    let (h24, m) = (t.hour(), t.minute());
    let h12 = match h24 % 12 {
        0 => 12,
        h => h,
    };
    let suffix = if h24 < 12 { "am" } else { "pm" };
    let mut options = Vec::new();
    if m == 0 {
        options.push(format!("{h12} {suffix}"));
        options.push(format!("{h12}{suffix}"));
        options.push(format!("{h24}:00"));
        if (18..=23).contains(&h24) {
            options.push(format!("{h12} at night"));
        }
        if (5..=11).contains(&h24) {
            options.push(format!("{h12} in the morning"));
        }
        if h24 == 12 {
            options.push("noon".to_string());
        }
    } else {
        options.push(format!("{h12}:{m:02} {suffix}"));
        options.push(format!("{h24}:{m:02}"));
    }
    options.choose(rng).expect("non-empty").clone()
}

/// A phrase the stub grammar resolves to exactly `date`, given `today`.
fn date_phrase(rng: &mut ChaCha8Rng, today: Date, date: Date) -> String {
    let ahead = (date - today).num_days();
    let mut options = Vec::new();
    match ahead {
        0 => options.push("today".to_string()),
        1 => options.push("tomorrow".to_string()),
        _ => {}
    }
    if (1..=7).contains(&ahead) {
        let day = DayOfWeek::ALL[date.weekday().num_days_from_monday() as usize]
            .name()
            .to_lowercase();
        options.push(format!("next {day}"));
        options.push(format!("on {day}"));
    }
    if (0..300).contains(&ahead) {
        options.push(format!("on {} {}", MONTHS[date.month0() as usize], date.day()));
    }
    options.choose(rng).expect("some phrase applies").clone()
}

fn people_phrase(people: &[&str]) -> String {
    match people {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn draft_turn(rng: &mut ChaCha8Rng, ctx: &EvaluationContext) -> Draft {
    let events: Vec<&CalendarEvent> = ctx.database.events().collect();
    let roll: f64 = rng.random();
    let op = match roll {
        r if r < 0.30 || events.is_empty() && r < 0.7 => Operation::Create,
        r if r < 0.55 => Operation::Query,
        r if r < 0.70 => Operation::Update,
        r if r < 0.85 => Operation::Delete,
        _ => Operation::Others,
    };
    match (op, events.as_slice()) {
        (Operation::Create, _) | (_, []) if op != Operation::Others => draft_create(rng, ctx),
        (Operation::Query, evs) => draft_query(rng, ctx, evs),
        (Operation::Update, evs) => draft_update(rng, ctx, evs),
        (Operation::Delete, evs) => draft_delete(rng, ctx, evs),
        _ => draft_other(rng, ctx),
    }
}

fn draft_create(rng: &mut ChaCha8Rng, ctx: &EvaluationContext) -> Draft {
    let subject = SUBJECTS.choose(rng).expect("non-empty");
    let start = random_slot(rng, ctx.now);
    let when_time = time_phrase(rng, start.time);
    let when_date = date_phrase(rng, ctx.now.date, start.date);
    let verb = *["create an event called", "schedule", "add"]
        .choose(rng)
        .expect("non-empty");
    let mut text = if rng.random_bool(0.5) {
        format!("{verb} {subject} at {when_time} {when_date}")
    } else {
        format!("{verb} {subject} {when_date} at {when_time}")
    };
    if rng.random_bool(0.3) {
        let end = start.time.minutes() + *[30, 90, 120].choose(rng).expect("non-empty");
        if let Some(end) = TimeOfDay::from_minutes(end) {
            text.push_str(&format!(" until {}", time_phrase(rng, end)));
        }
    }
    if rng.random_bool(0.3) {
        let n = rng.random_range(1..=3);
        let people: Vec<&str> = PEOPLE.choose_multiple(rng, n).copied().collect();
        text.push_str(&format!(" with {}", people_phrase(&people)));
    }
    if rng.random_bool(0.3) {
        text.push_str(&format!(" in {}", PLACES.choose(rng).expect("non-empty")));
    }
    Draft {
        utterance: text,
        operation: Operation::Create,
        temporal: true,
        must_succeed: true,
    }
}

fn draft_query(rng: &mut ChaCha8Rng, ctx: &EvaluationContext, events: &[&CalendarEvent]) -> Draft {
    let event = events.choose(rng).expect("non-empty");
    let with_attendee = events.iter().find(|e| !e.attendees.is_empty());
    match rng.random_range(0..4) {
        0 | 1 => {
            let date = date_phrase(rng, ctx.now.date, event.start.date);
            let lead = *["what do i have", "what's on my calendar", "show my events"]
                .choose(rng)
                .expect("non-empty");
            let mut text = format!("{lead} {date}");
            if rng.random_bool(0.3) && event.start.time.hour() > 0 {
                let before = TimeOfDay::from_hm(event.start.time.hour() - 1, 0).expect("valid");
                text.push_str(&format!(" after {}", time_phrase(rng, before)));
            }
            Draft {
                utterance: text,
                operation: Operation::Query,
                temporal: true,
                must_succeed: false,
            }
        }
        2 if with_attendee.is_some() => {
            let who = &with_attendee.expect("checked").attendees[0];
            Draft {
                utterance: format!("what do i have with {who}"),
                operation: Operation::Query,
                temporal: false,
                must_succeed: false,
            }
        }
        _ => {
            let lead = *["find the", "when is the", "look up my"].choose(rng).expect("non-empty");
            Draft {
                utterance: format!("{lead} {}", event.subject),
                operation: Operation::Query,
                temporal: false,
                must_succeed: false,
            }
        }
    }
}

fn draft_update(rng: &mut ChaCha8Rng, ctx: &EvaluationContext, events: &[&CalendarEvent]) -> Draft {
    let event = events.choose(rng).expect("non-empty");
    match rng.random_range(0..4) {
        0 | 1 => {
            let start = random_slot(rng, ctx.now);
            let target = if rng.random_bool(0.2) {
                "it".to_string()
            } else {
                format!("the {}", event.subject)
            };
            let mut text = format!(
                "move {target} to {} at {}",
                date_phrase(rng, ctx.now.date, start.date).trim_start_matches("on "),
                time_phrase(rng, start.time)
            );
            if rng.random_bool(0.8) {
                let end = start.add_minutes(60);
                text.push_str(&format!(" until {}", time_phrase(rng, end.time)));
            }
            Draft {
                utterance: text,
                operation: Operation::Update,
                temporal: true,
                must_succeed: false,
            }
        }
        2 => Draft {
            utterance: format!(
                "rename the {} to {}",
                event.subject,
                RENAMES.choose(rng).expect("non-empty")
            ),
            operation: Operation::Update,
            temporal: false,
            must_succeed: false,
        },
        _ => Draft {
            utterance: format!(
                "change the location of the {} to {}",
                event.subject,
                PLACES.choose(rng).expect("non-empty")
            ),
            operation: Operation::Update,
            temporal: false,
            must_succeed: false,
        },
    }
}

fn draft_delete(rng: &mut ChaCha8Rng, ctx: &EvaluationContext, events: &[&CalendarEvent]) -> Draft {
    let event = events.choose(rng).expect("non-empty");
    match rng.random_range(0..5) {
        0 => Draft {
            utterance: format!(
                "cancel the event {} at {}",
                date_phrase(rng, ctx.now.date, event.start.date),
                time_phrase(rng, event.start.time)
            ),
            operation: Operation::Delete,
            temporal: true,
            must_succeed: false,
        },
        1 => Draft {
            utterance: "cancel it".to_string(),
            operation: Operation::Delete,
            temporal: false,
            must_succeed: false,
        },
        _ => {
            let verb = *["cancel the", "delete the", "remove my"].choose(rng).expect("non-empty");
            Draft {
                utterance: format!("{verb} {}", event.subject),
                operation: Operation::Delete,
                temporal: false,
                must_succeed: false,
            }
        }
    }
}

fn draft_other(rng: &mut ChaCha8Rng, ctx: &EvaluationContext) -> Draft {
    match rng.random_range(0..5) {
        0 | 1 => {
            let t = TimeOfDay::from_hm(rng.random_range(0..24), *[0, 0, 30, 45].choose(rng).expect("non-empty"))
                .expect("valid");
            Draft {
                utterance: format!("what time is {}", time_phrase(rng, t)),
                operation: Operation::Others,
                temporal: true,
                must_succeed: false,
            }
        }
        2 | 3 => {
            let date = ctx.now.date + Duration::days(rng.random_range(0..=20));
            Draft {
                utterance: format!("what is the date {}", date_phrase(rng, ctx.now.date, date)),
                operation: Operation::Others,
                temporal: true,
                must_succeed: false,
            }
        }
        _ => Draft {
            utterance: "what was that".to_string(),
            operation: Operation::Others,
            temporal: false,
            must_succeed: false,
        },
    }
}
