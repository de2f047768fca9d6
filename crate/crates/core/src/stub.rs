//! Deterministic pattern-grammar parser used for demos, fixture generation,
//! and as the default `/parse` backend.
//!
//! Utterances are lowercased, stripped of trailing punctuation, and matched
//! against a fixed list of templates. Supported phrasings:
//!
//! | operation | examples |
//! |-----------|----------|
//! | create | `create an event called standup at 10 at night tomorrow`, `schedule lunch at noon on friday until 1 pm with ana and bo in cafe` |
//! | query  | `what do i have tomorrow`, `what do i have on july 4 after 3 pm`, `find the standup`, `what do i have with ana` |
//! | update | `move the standup to tomorrow at 3 pm until 4 pm`, `rename the standup to retro`, `change the location of the standup to room 4`, `move it to friday at 9 am` |
//! | delete | `cancel the standup`, `cancel the event tomorrow at 10 pm`, `cancel it` |
//! | other  | `what time is 10 at night`, `what is the date next tuesday`, `what was that` |
//!
//! Time phrases: `N at night`, `N in the morning`, `N pm`, `N am`, `H:MM pm`,
//! `H:MM am`, `HH:MM` (24-hour), `noon`, `midnight`. Date phrases: `today`,
//! `tomorrow`, weekday names (optionally after `next` or `on`), and
//! `<month name> <day>` (optionally after `on`).

use std::sync::LazyLock;

use regex::{Captures, Regex};

use crate::expr::write_string_literal;

const TIME: &str = r"(?:\d{1,2}:\d{2} ?(?:am|pm)|\d{1,2} ?(?:am|pm)|\d{1,2} at night|\d{1,2} in the morning|noon|midnight|\d{1,2}:\d{2})";
const DATE: &str = r"(?:today|tomorrow|(?:next |on )?(?:monday|tuesday|wednesday|thursday|friday|saturday|sunday)|(?:on )?(?:january|february|march|april|may|june|july|august|september|october|november|december) \d{1,2})";

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

fn compile(template: &str) -> Regex {
    let pattern = template.replace("TIME", TIME).replace("DATE", DATE);
    Regex::new(&format!("^{pattern}$")).expect("stub template compiles")
}

#[derive(Clone, Copy)]
enum Rule {
    WhatTime,
    WhatDate,
    ReferLast,
    Create,
    QueryDate,
    QueryAttendee,
    QuerySubject,
    MoveRef,
    Move,
    Rename,
    Relocate,
    DeleteRef,
    DeleteSlot,
    DeleteSubject,
}

static RULES: LazyLock<Vec<(Rule, Regex)>> = LazyLock::new(|| {
    vec![
        (Rule::WhatTime, compile(r"what time is (?P<time>TIME)")),
        (
            Rule::WhatDate,
            compile(r"(?:what is the date|what's the date|what date is) (?P<date>DATE)"),
        ),
        (
            Rule::ReferLast,
            compile(r"(?:what was that|show me that|which event was that)"),
        ),
        (
            Rule::Create,
            compile(
                r"(?:create an event called|create an event|schedule|add) (?P<subject>.+?)(?: (?P<date1>DATE))? at (?P<time>TIME)(?: (?P<date2>DATE))?(?: until (?P<end>TIME))?(?: with (?P<who>.+?))?(?: in (?P<loc>.+?))?",
            ),
        ),
        (
            Rule::QueryDate,
            compile(
                r"(?:what do i have|what's on my calendar|what is on my calendar|show my events) (?P<date>DATE)(?: at (?P<at>TIME)| after (?P<after>TIME)| before (?P<before>TIME))?",
            ),
        ),
        (
            Rule::QueryAttendee,
            compile(r"(?:what do i have|show my events) with (?P<who>.+)"),
        ),
        (
            Rule::QuerySubject,
            compile(r"(?:find|show me|when is|look up) (?:the |my )?(?P<subject>.+?)(?: (?P<date>DATE))?"),
        ),
        (
            Rule::MoveRef,
            compile(r"(?:move|reschedule) (?:it|that) to (?P<date>DATE) at (?P<time>TIME)(?: until (?P<end>TIME))?"),
        ),
        (
            Rule::Move,
            compile(
                r"(?:move|reschedule) (?:the |my )?(?P<subject>.+?) to (?P<date>DATE) at (?P<time>TIME)(?: until (?P<end>TIME))?",
            ),
        ),
        (
            Rule::Rename,
            compile(r"rename (?:the |my )?(?P<subject>.+?) to (?P<new>.+)"),
        ),
        (
            Rule::Relocate,
            compile(r"(?:change|set) the location of (?:the |my )?(?P<subject>.+?) to (?P<loc>.+)"),
        ),
        (Rule::DeleteRef, compile(r"(?:cancel|delete|remove) (?:it|that)")),
        (
            Rule::DeleteSlot,
            compile(r"(?:cancel|delete|remove) (?:the |my )?(?:event|meeting) (?P<date>DATE) at (?P<time>TIME)"),
        ),
        (
            Rule::DeleteSubject,
            compile(r"(?:cancel|delete|remove) (?:the |my )?(?P<subject>.+?)(?: (?P<date>DATE))?"),
        ),
    ]
});

static TIME_PARTS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?P<h>\d{1,2})(?::(?P<m>\d{2}))?(?: ?(?P<ampm>am|pm)| (?P<night>at night)| (?P<morning>in the morning))?$")
        .expect("time regex compiles")
});

fn normalize(utterance: &str) -> String {
    let lowered = utterance.trim().to_lowercase();
    let stripped = lowered.trim_end_matches(['?', '.', '!']);
    stripped.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn quote(text: &str) -> String {
    let mut out = String::new();
    write_string_literal(text, &mut out);
    out
}

/// Program text for a time phrase matched by `TIME`.
pub fn time_expr(phrase: &str) -> Option<String> {
    match phrase {
        "noon" => return Some("NumberPM(12)".to_string()),
        "midnight" => return Some("NumberAM(12)".to_string()),
        _ => {}
    }
    let caps = TIME_PARTS.captures(phrase)?;
    let hour: i64 = caps["h"].parse().ok()?;
    let minute: Option<i64> = caps.name("m").and_then(|m| m.as_str().parse().ok());
    let pm = caps.name("night").is_some() || caps.name("ampm").is_some_and(|m| m.as_str() == "pm");
    let am = caps.name("morning").is_some() || caps.name("ampm").is_some_and(|m| m.as_str() == "am");
    Some(match (minute, pm, am) {
        (None, true, _) => format!("NumberPM({hour})"),
        (None, _, true) => format!("NumberAM({hour})"),
        (Some(m), true, _) => format!("HourMinutePm(hour={hour}, minute={m})"),
        (Some(m), _, true) => format!("HourMinuteAm(hour={hour}, minute={m})"),
        (Some(0), false, false) => format!("HourMilitary({hour})"),
        (Some(m), false, false) => match hour {
            0 => format!("HourMinuteAm(hour=12, minute={m})"),
            1..=11 => format!("HourMinuteAm(hour={hour}, minute={m})"),
            12 => format!("HourMinutePm(hour=12, minute={m})"),
            h => format!("HourMinutePm(hour={}, minute={m})", h - 12),
        },
        (None, false, false) => return None,
    })
}

/// Program text for a date phrase matched by `DATE`.
pub fn date_expr(phrase: &str) -> Option<String> {
    let phrase = phrase
        .strip_prefix("next ")
        .or_else(|| phrase.strip_prefix("on "))
        .unwrap_or(phrase);
    match phrase {
        "today" => return Some("Today()".to_string()),
        "tomorrow" => return Some("Tomorrow()".to_string()),
        _ => {}
    }
    if let Some(day) = crate::calendar::DayOfWeek::parse(phrase) {
        return Some(format!("NextDOW({})", quote(day.name())));
    }
    let (month, day) = phrase.split_once(' ')?;
    let month = MONTHS.iter().position(|m| *m == month)? + 1;
    let day: i64 = day.parse().ok()?;
    Some(format!("MD(month={month}, day={day})"))
}

fn split_people(text: &str) -> String {
    text.replace(" and ", ", ")
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(", ")
}

fn subject_target(caps: &Captures<'_>) -> String {
    format!("EventConstraint(subject_contains={})", quote(&caps["subject"]))
}

fn date_or_today(caps: &Captures<'_>, names: &[&str]) -> Option<String> {
    match names.iter().find_map(|n| caps.name(n)) {
        Some(m) => date_expr(m.as_str()),
        None => Some("Today()".to_string()),
    }
}

fn apply(rule: Rule, caps: &Captures<'_>) -> Option<String> {
    let time = |name: &str| caps.name(name).map(|m| time_expr(m.as_str()));
    match rule {
        Rule::WhatTime => time("time")?,
        Rule::WhatDate => date_expr(&caps["date"]),
        Rule::ReferLast => Some(r#"Refer("EventRef")"#.to_string()),
        Rule::Create => {
            let date = date_or_today(caps, &["date1", "date2"])?;
            let mut args = vec![
                format!("subject={}", quote(&caps["subject"])),
                format!("start=DateTimeOf({date}, {})", time("time")??),
            ];
            if let Some(end) = time("end") {
                args.push(format!("end=DateTimeOf({date}, {})", end?));
            }
            if let Some(who) = caps.name("who") {
                args.push(format!("attendees={}", quote(&split_people(who.as_str()))));
            }
            if let Some(loc) = caps.name("loc") {
                args.push(format!("location={}", quote(loc.as_str())));
            }
            Some(format!("CreateEvent({})", args.join(", ")))
        }
        Rule::QueryDate => {
            let mut preds = vec![format!("on_date={}", date_expr(&caps["date"])?)];
            for (group, name) in [("at", "starts_at"), ("after", "starts_after"), ("before", "starts_before")] {
                if let Some(t) = time(group) {
                    preds.push(format!("{name}={}", t?));
                }
            }
            Some(format!("FindEvents(EventConstraint({}))", preds.join(", ")))
        }
        Rule::QueryAttendee => Some(format!(
            "FindEvents(EventConstraint(attendee={}))",
            quote(&caps["who"])
        )),
        Rule::QuerySubject => {
            let mut preds = vec![format!("subject_contains={}", quote(&caps["subject"]))];
            if let Some(d) = caps.name("date") {
                preds.push(format!("on_date={}", date_expr(d.as_str())?));
            }
            Some(format!("FindEvents(EventConstraint({}))", preds.join(", ")))
        }
        Rule::Move | Rule::MoveRef => {
            let target = match rule {
                Rule::MoveRef => r#"Refer("EventRef")"#.to_string(),
                _ => subject_target(caps),
            };
            let date = date_expr(&caps["date"])?;
            let mut args = vec![
                format!("target={target}"),
                format!("start=DateTimeOf({date}, {})", time("time")??),
            ];
            if let Some(end) = time("end") {
                args.push(format!("end=DateTimeOf({date}, {})", end?));
            }
            Some(format!("UpdateEvent({})", args.join(", ")))
        }
        Rule::Rename => Some(format!(
            "UpdateEvent(target={}, subject={})",
            subject_target(caps),
            quote(&caps["new"])
        )),
        Rule::Relocate => Some(format!(
            "UpdateEvent(target={}, location={})",
            subject_target(caps),
            quote(&caps["loc"])
        )),
        Rule::DeleteRef => Some(r#"DeleteEvent(Refer("EventRef"))"#.to_string()),
        Rule::DeleteSlot => Some(format!(
            "DeleteEvent(EventConstraint(on_date={}, starts_at={}))",
            date_expr(&caps["date"])?,
            time("time")??
        )),
        Rule::DeleteSubject => {
            let mut preds = vec![format!("subject_contains={}", quote(&caps["subject"]))];
            if let Some(d) = caps.name("date") {
                preds.push(format!("on_date={}", date_expr(d.as_str())?));
            }
            Some(format!("DeleteEvent(EventConstraint({}))", preds.join(", ")))
        }
    }
}

/// Maps an utterance to program text, or `None` when no template matches.
///
/// `prev_agent` is accepted for parity with the remote parser contract; the
/// stub grammar is context-free and ignores it.
pub fn stub_parse(utterance: &str, _prev_agent: Option<&str>) -> Option<String> {
    let text = normalize(utterance);
    RULES
        .iter()
        .find_map(|(rule, re)| re.captures(&text).map(|caps| (*rule, caps)))
        .and_then(|(rule, caps)| apply(rule, &caps))
}
