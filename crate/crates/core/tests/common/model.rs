//! List-based reference calendar for CRUD sequences. Times are minute
//! offsets from the clock's midnight; programs are generated as text and run
//! through the engine, while the model applies the same request directly.

use dataflow_kit::calendar::CalendarEvent;
use dataflow_kit::{db_equals, run_turn, Database, DateTime, EvaluationContext, Snapshot};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::oracle::civil_from_days;

pub const SUBJECTS: &[&str] = &["Alpha sync", "beta review", "Gamma", "delta 1:1", "Epsilon lunch", "zeta demo"];
const PEOPLE: &[&str] = &["Ana", "bo", "Chen"];
const PLACES: &[&str] = &["Room 1", "cafe", "Lab"];

#[derive(Debug, Clone, PartialEq)]
pub struct ModelEvent {
    pub subject: String,
    pub start: i64,
    pub end: i64,
    pub attendees: Vec<String>,
    pub location: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Model {
    pub events: Vec<ModelEvent>,
}

/// One generated step: the program text and the model's expected effect.
#[derive(Debug, Clone)]
pub enum Op {
    Create(ModelEvent, bool),
    Update { needle: String, subject: Option<String>, start: Option<i64>, end: Option<i64>, location: Option<String> },
    Delete { needle: String },
    Find { needle: String },
    /// Creates an event then fails in the same root, so nothing may persist.
    CreateThenFail(ModelEvent),
    /// Two roots: a create that succeeds and a delete that cannot resolve.
    CreateAndMissingDelete(ModelEvent),
}

impl Model {
    fn matching(&self, needle: &str) -> Vec<usize> {
        let needle = needle.to_lowercase();
        (0..self.events.len())
            .filter(|i| self.events[*i].subject.to_lowercase().contains(&needle))
            .collect()
    }

    fn create(&mut self, e: &ModelEvent) -> bool {
        let subject = e.subject.trim().to_string();
        if subject.is_empty() || e.end <= e.start {
            return false;
        }
        if self.events.iter().any(|x| x.start < e.end && e.start < x.end) {
            return false;
        }
        self.events.push(ModelEvent { subject, ..e.clone() });
        true
    }

    pub fn apply(&mut self, op: &Op) {
        match op {
            Op::Create(e, _) | Op::CreateAndMissingDelete(e) => {
                self.create(e);
            }
            Op::Update { needle, subject, start, end, location } => {
                let hits = self.matching(needle);
                if hits.len() != 1 {
                    return;
                }
                let mut after = self.events[hits[0]].clone();
                if let Some(s) = subject {
                    after.subject = s.trim().to_string();
                }
                if let Some(s) = start {
                    after.start = *s;
                }
                if let Some(e) = end {
                    after.end = *e;
                }
                if let Some(l) = location {
                    after.location = Some(l.clone());
                }
                if after.subject.is_empty() || after.end <= after.start {
                    return;
                }
                self.events[hits[0]] = after;
            }
            Op::Delete { needle } => {
                let hits = self.matching(needle);
                if hits.len() == 1 {
                    self.events.remove(hits[0]);
                }
            }
            Op::Find { .. } | Op::CreateThenFail(_) => {}
        }
    }

    pub fn snapshot(&self, clock: DateTime) -> Snapshot {
        let midnight = DateTime::new(clock.date, dataflow_kit::TimeOfDay::from_minutes(0).unwrap());
        Snapshot::from_events(
            self.events
                .iter()
                .enumerate()
                .map(|(i, e)| CalendarEvent {
                    id: i as u64 + 1,
                    subject: e.subject.clone(),
                    start: midnight.add_minutes(e.start),
                    end: midnight.add_minutes(e.end),
                    attendees: e.attendees.clone(),
                    location: e.location.clone(),
                })
                .collect(),
        )
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Program text for a minute offset from the clock day's midnight. Dates go
/// through MD, times through a constructor chosen by the offset.
pub fn datetime_expr(clock_days: i64, offset: i64) -> String {
    let (_, m, d) = civil_from_days(clock_days + offset.div_euclid(1440));
    let t = offset.rem_euclid(1440);
    let (h, mm) = (t / 60, t % 60);
    let time = match (h, mm) {
        (h, 0) if h % 3 == 0 => format!("HourMilitary({h})"),
        (h, 0) if h >= 12 => format!("NumberPM({})", if h == 12 { 12 } else { h - 12 }),
        (h, 0) => format!("NumberAM({})", if h == 0 { 12 } else { h }),
        (h, mm) if h >= 12 => format!("HourMinutePm(hour={}, minute={mm})", if h == 12 { 12 } else { h - 12 }),
        (h, mm) => format!("HourMinuteAm(minute={mm}, hour={})", if h == 0 { 12 } else { h }),
    };
    format!("DateTimeOf(MD(month={m}, day={d}), {time})")
}

fn create_text(clock_days: i64, e: &ModelEvent, with_end: bool) -> String {
    let mut args = vec![
        format!("subject={}", quote(&e.subject)),
        format!("start={}", datetime_expr(clock_days, e.start)),
    ];
    if with_end {
        args.push(format!("end={}", datetime_expr(clock_days, e.end)));
    }
    if !e.attendees.is_empty() {
        args.push(format!("attendees={}", quote(&e.attendees.join(", "))));
    }
    if let Some(l) = &e.location {
        args.push(format!("location={}", quote(l)));
    }
    format!("CreateEvent({})", args.join(", "))
}

pub fn program_text(clock_days: i64, op: &Op) -> String {
    let target = |needle: &str| format!("EventConstraint(subject_contains={})", quote(needle));
    match op {
        Op::Create(e, with_end) => create_text(clock_days, e, *with_end),
        Op::Update { needle, subject, start, end, location } => {
            let mut args = vec![format!("target={}", target(needle))];
            if let Some(s) = subject {
                args.push(format!("subject={}", quote(s)));
            }
            if let Some(s) = start {
                args.push(format!("start={}", datetime_expr(clock_days, *s)));
            }
            if let Some(e) = end {
                args.push(format!("end={}", datetime_expr(clock_days, *e)));
            }
            if let Some(l) = location {
                args.push(format!("location={}", quote(l)));
            }
            format!("UpdateEvent({})", args.join(", "))
        }
        Op::Delete { needle } => format!("DeleteEvent({})", target(needle)),
        Op::Find { needle } => format!("FindEvents({})", target(needle)),
        Op::CreateThenFail(e) => format!(
            "UpdateEvent(target={}, end={})",
            create_text(clock_days, e, true),
            datetime_expr(clock_days, e.start - 30)
        ),
        Op::CreateAndMissingDelete(e) => format!(
            "{}; DeleteEvent({})",
            create_text(clock_days, e, true),
            target("no such subject zzz")
        ),
    }
}

fn random_event(rng: &mut ChaCha8Rng) -> ModelEvent {
    // Days 1..=60 after the clock, 07:00 to 21:45 on quarter hours.
    let day = rng.random_range(1..=60i64);
    let start = day * 1440 + rng.random_range(28..=87i64) * 15;
    let duration = *[15i64, 30, 45, 60, 90, 120].choose(rng).unwrap();
    let subject = SUBJECTS.choose(rng).unwrap();
    let subject = if rng.random_bool(0.2) { format!("  {subject} ") } else { subject.to_string() };
    ModelEvent {
        subject,
        start,
        end: start + duration,
        attendees: if rng.random_bool(0.3) {
            let n = rng.random_range(1..=2);
            PEOPLE.choose_multiple(rng, n).map(|s| s.to_string()).collect()
        } else {
            Vec::new()
        },
        location: rng.random_bool(0.3).then(|| PLACES.choose(rng).unwrap().to_string()),
    }
}

fn random_needle(rng: &mut ChaCha8Rng) -> String {
    let subject = SUBJECTS.choose(rng).unwrap();
    match rng.random_range(0..3) {
        0 => subject.to_uppercase(),
        1 => subject[1..subject.len().min(4)].to_string(),
        _ => subject.to_string(),
    }
}

pub fn random_op(rng: &mut ChaCha8Rng) -> Op {
    match rng.random_range(0..100) {
        0..40 => {
            let mut e = random_event(rng);
            let with_end = rng.random_bool(0.6);
            if !with_end {
                e.end = e.start + 60;
            }
            Op::Create(e, with_end)
        }
        40..55 => {
            let start = rng.random_bool(0.5).then(|| random_event(rng).start);
            let end = match start {
                Some(s) if rng.random_bool(0.8) => Some(s + 60),
                _ if rng.random_bool(0.2) => Some(random_event(rng).end),
                _ => None,
            };
            let subject = rng.random_bool(0.3).then(|| SUBJECTS.choose(rng).unwrap().to_string());
            let location = (start.is_none() && end.is_none() && subject.is_none() || rng.random_bool(0.2))
                .then(|| PLACES.choose(rng).unwrap().to_string());
            Op::Update { needle: random_needle(rng), subject, start, end, location }
        }
        55..70 => Op::Delete { needle: random_needle(rng) },
        70..80 => Op::Find { needle: random_needle(rng) },
        80..90 => Op::CreateThenFail(random_event(rng)),
        _ => Op::CreateAndMissingDelete(random_event(rng)),
    }
}

/// Runs one random sequence through engine and model. Returns the number of
/// ops and an error describing the first disagreement.
pub fn run_sequence(rng: &mut ChaCha8Rng, clock: DateTime, max_ops: usize) -> Result<usize, String> {
    let clock_days = super::clock_days(clock);
    let mut ctx = EvaluationContext::new(clock, Database::new());
    let mut model = Model::default();
    let n = rng.random_range(1..=max_ops);
    for step in 0..n {
        let op = random_op(rng);
        let text = program_text(clock_days, &op);
        let before = ctx.database.snapshot();
        let turn = run_turn(&text, &mut ctx);
        if let Some(e) = turn.parse_error {
            return Err(format!("step {step}: {text} does not parse: {e}"));
        }
        model.apply(&op);
        if matches!(op, Op::CreateThenFail(_)) && !db_equals(&before, &ctx.database.snapshot()) {
            return Err(format!("step {step}: failed root left changes behind: {text}"));
        }
        if !db_equals(&ctx.database.snapshot(), &model.snapshot(clock)) {
            return Err(format!(
                "step {step}: engine and model disagree after {text}\nengine: {:?}\nmodel: {:?}",
                ctx.database.snapshot().events(),
                model.events
            ));
        }
    }
    Ok(n)
}
