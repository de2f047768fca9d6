//! The fixed table of functions a program may call, with their parameter
//! signatures. Argument binding and type checks happen here so that every
//! function body receives well-typed inputs.

use std::collections::HashMap;
use std::sync::LazyLock;

use super::events::{create_event, delete_event, find_events, update_event};
use super::temporal::*;
use super::{DayOfWeek, DomainError, EventConstraint, EventTarget, EventUpdate, NewEvent};
use crate::db::Database;
use crate::graph::{refer, DataFlowGraph, DbMutation, ExecError};
use crate::value::{DateTime, Value, ValueKind};

/// What a registry function may touch while running.
pub struct CallContext<'a> {
    pub now: DateTime,
    pub database: &'a mut Database,
    pub history: &'a [DataFlowGraph],
    pub mutations: &'a mut Vec<DbMutation>,
}

#[derive(Debug)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kinds: &'static [ValueKind],
    pub required: bool,
}

type Body = fn(&mut CallContext<'_>, &BoundArgs) -> Result<Value, DomainError>;

pub struct FunctionSpec {
    pub name: &'static str,
    pub params: &'static [ParamSpec],
    body: Body,
}

impl std::fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionSpec")
            .field("name", &self.name)
            .field("params", &self.params)
            .finish()
    }
}

/// Arguments matched to parameter positions.
#[derive(Debug)]
pub struct BoundArgs {
    values: Vec<Option<Value>>,
}

impl BoundArgs {
    fn get(&self, i: usize) -> Option<&Value> {
        self.values.get(i).and_then(Option::as_ref)
    }

    fn int(&self, i: usize) -> i64 {
        match self.get(i) {
            Some(Value::Int(n)) => *n,
            other => unreachable!("binder guarantees Int, got {other:?}"),
        }
    }

    fn text(&self, i: usize) -> Option<&str> {
        match self.get(i) {
            Some(Value::Text(s)) => Some(s),
            None => None,
            other => unreachable!("binder guarantees Text, got {other:?}"),
        }
    }

    fn date(&self, i: usize) -> Option<crate::value::Date> {
        match self.get(i) {
            Some(Value::Date(d)) => Some(*d),
            None => None,
            other => unreachable!("binder guarantees Date, got {other:?}"),
        }
    }

    fn time(&self, i: usize) -> Option<crate::value::TimeOfDay> {
        match self.get(i) {
            Some(Value::Time(t)) => Some(*t),
            None => None,
            other => unreachable!("binder guarantees Time, got {other:?}"),
        }
    }

    fn datetime(&self, i: usize) -> Option<DateTime> {
        match self.get(i) {
            Some(Value::DateTime(dt)) => Some(*dt),
            None => None,
            other => unreachable!("binder guarantees DateTime, got {other:?}"),
        }
    }

    fn target(&self, i: usize) -> EventTarget {
        match self.get(i) {
            Some(Value::EventRef(id)) => EventTarget::Id(*id),
            Some(Value::Constraint(c)) => EventTarget::Constraint(c.clone()),
            other => unreachable!("binder guarantees an event target, got {other:?}"),
        }
    }
}

impl FunctionSpec {
    /// Matches positional then named arguments against the signature.
    pub fn bind(
        &self,
        positional: Vec<Value>,
        named: Vec<(String, Value)>,
    ) -> Result<BoundArgs, ExecError> {
        let max = self.params.len();
        let min = self.params.iter().filter(|p| p.required).count();
        let got = positional.len() + named.len();
        let arity = || ExecError::ArityMismatch {
            function: self.name.to_string(),
            expected: if min == max {
                min.to_string()
            } else {
                format!("{min}..{max}")
            },
            got,
        };
        if positional.len() > max {
            return Err(arity());
        }

        let mut values: Vec<Option<Value>> = vec![None; max];
        let mut slots: Vec<String> = (0..max).map(|i| i.to_string()).collect();
        for (i, v) in positional.into_iter().enumerate() {
            values[i] = Some(v);
        }
        for (name, v) in named {
            let idx = self
                .params
                .iter()
                .position(|p| p.name == name)
                .ok_or_else(|| ExecError::UnknownArgument {
                    function: self.name.to_string(),
                    name: name.clone(),
                })?;
            if values[idx].is_some() {
                return Err(ExecError::UnknownArgument {
                    function: self.name.to_string(),
                    name: format!("{name} (already given positionally)"),
                });
            }
            values[idx] = Some(v);
            slots[idx] = name;
        }
        for (i, param) in self.params.iter().enumerate() {
            match &values[i] {
                None if param.required => return Err(arity()),
                None => {}
                Some(v) if !param.kinds.contains(&v.kind()) => {
                    return Err(ExecError::TypeMismatch {
                        function: self.name.to_string(),
                        slot: slots[i].clone(),
                        expected: param
                            .kinds
                            .iter()
                            .map(|k| k.name())
                            .collect::<Vec<_>>()
                            .join("|"),
                        got: v.kind().name().to_string(),
                    })
                }
                Some(_) => {}
            }
        }
        Ok(BoundArgs { values })
    }

    pub fn invoke(&self, ctx: &mut CallContext<'_>, args: &BoundArgs) -> Result<Value, DomainError> {
        (self.body)(ctx, args)
    }
}

const fn req(name: &'static str, kinds: &'static [ValueKind]) -> ParamSpec {
    ParamSpec {
        name,
        kinds,
        required: true,
    }
}

const fn opt(name: &'static str, kinds: &'static [ValueKind]) -> ParamSpec {
    ParamSpec {
        name,
        kinds,
        required: false,
    }
}

use ValueKind as K;

const INT: &[ValueKind] = &[K::Int];
const TEXT: &[ValueKind] = &[K::Text];
const DATE: &[ValueKind] = &[K::Date];
const TIME: &[ValueKind] = &[K::Time];
const DATETIME: &[ValueKind] = &[K::DateTime];
const CONSTRAINT: &[ValueKind] = &[K::Constraint];
const TARGET: &[ValueKind] = &[K::EventRef, K::Constraint];

fn split_attendees(text: &str) -> Vec<String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn non_empty(text: Option<&str>) -> Option<String> {
    text.map(str::trim).filter(|s| !s.is_empty()).map(str::to_string)
}

pub static REGISTRY: &[FunctionSpec] = &[
    FunctionSpec {
        name: "NumberPM",
        params: &[req("hour", INT)],
        body: |_, a| number_pm(a.int(0)).map(Value::Time),
    },
    FunctionSpec {
        name: "NumberAM",
        params: &[req("hour", INT)],
        body: |_, a| number_am(a.int(0)).map(Value::Time),
    },
    FunctionSpec {
        name: "HourMilitary",
        params: &[req("hour", INT)],
        body: |_, a| hour_military(a.int(0)).map(Value::Time),
    },
    FunctionSpec {
        name: "HourMinutePm",
        params: &[req("hour", INT), req("minute", INT)],
        body: |_, a| hour_minute_pm(a.int(0), a.int(1)).map(Value::Time),
    },
    FunctionSpec {
        name: "HourMinuteAm",
        params: &[req("hour", INT), req("minute", INT)],
        body: |_, a| hour_minute_am(a.int(0), a.int(1)).map(Value::Time),
    },
    FunctionSpec {
        name: "Today",
        params: &[],
        body: |ctx, _| Ok(Value::Date(today(ctx.now))),
    },
    FunctionSpec {
        name: "Tomorrow",
        params: &[],
        body: |ctx, _| Ok(Value::Date(tomorrow(ctx.now))),
    },
    FunctionSpec {
        name: "NextDOW",
        params: &[req("day", TEXT)],
        body: |ctx, a| {
            let name = a.text(0).unwrap_or_default();
            let day = DayOfWeek::parse(name).ok_or_else(|| DomainError::UnknownDay(name.to_string()))?;
            Ok(Value::Date(next_dow(ctx.now, day)))
        },
    },
    FunctionSpec {
        name: "MD",
        params: &[req("month", INT), req("day", INT)],
        body: |ctx, a| month_day(ctx.now, a.int(0), a.int(1)).map(Value::Date),
    },
    FunctionSpec {
        name: "DateTimeOf",
        params: &[req("date", DATE), req("time", TIME)],
        body: |_, a| {
            Ok(Value::DateTime(date_time_of(
                a.date(0).expect("required"),
                a.time(1).expect("required"),
            )))
        },
    },
    FunctionSpec {
        name: "CreateEvent",
        params: &[
            req("subject", TEXT),
            req("start", DATETIME),
            opt("end", DATETIME),
            opt("attendees", TEXT),
            opt("location", TEXT),
        ],
        body: |ctx, a| {
            let new = NewEvent {
                subject: a.text(0).unwrap_or_default().to_string(),
                start: a.datetime(1).expect("required"),
                end: a.datetime(2),
                attendees: a.text(3).map(split_attendees).unwrap_or_default(),
                location: non_empty(a.text(4)),
            };
            let id = create_event(ctx.database, new)?;
            let event = ctx.database.get(id).expect("just inserted").clone();
            ctx.mutations.push(DbMutation::Created { event });
            Ok(Value::EventRef(id))
        },
    },
    FunctionSpec {
        name: "EventConstraint",
        params: &[
            opt("subject_contains", TEXT),
            opt("on_date", DATE),
            opt("starts_at", TIME),
            opt("starts_after", TIME),
            opt("starts_before", TIME),
            opt("attendee", TEXT),
            opt("location", TEXT),
        ],
        body: |_, a| {
            let c = EventConstraint {
                subject_contains: non_empty(a.text(0)),
                on_date: a.date(1),
                starts_at: a.time(2),
                starts_after: a.time(3),
                starts_before: a.time(4),
                attendee: non_empty(a.text(5)),
                location: non_empty(a.text(6)),
            };
            if c.is_empty() {
                return Err(DomainError::EmptyConstraint);
            }
            Ok(Value::Constraint(c))
        },
    },
    FunctionSpec {
        name: "FindEvents",
        params: &[req("constraint", CONSTRAINT)],
        body: |ctx, a| match a.get(0) {
            Some(Value::Constraint(c)) => Ok(Value::EventList(find_events(ctx.database, c))),
            other => unreachable!("binder guarantees a constraint, got {other:?}"),
        },
    },
    FunctionSpec {
        name: "UpdateEvent",
        params: &[
            req("target", TARGET),
            opt("subject", TEXT),
            opt("start", DATETIME),
            opt("end", DATETIME),
            opt("attendees", TEXT),
            opt("location", TEXT),
        ],
        body: |ctx, a| {
            let update = EventUpdate {
                subject: a.text(1).map(str::to_string),
                start: a.datetime(2),
                end: a.datetime(3),
                attendees: a.text(4).map(split_attendees),
                location: non_empty(a.text(5)),
            };
            let (before, after) = update_event(ctx.database, &a.target(0), update)?;
            let id = after.id;
            ctx.mutations.push(DbMutation::Updated { before, after });
            Ok(Value::EventRef(id))
        },
    },
    FunctionSpec {
        name: "DeleteEvent",
        params: &[req("target", TARGET)],
        body: |ctx, a| {
            let event = delete_event(ctx.database, &a.target(0))?;
            ctx.mutations.push(DbMutation::Deleted { event });
            Ok(Value::Unit)
        },
    },
    FunctionSpec {
        name: "Refer",
        params: &[req("kind", TEXT)],
        body: |ctx, a| {
            let name = a.text(0).unwrap_or_default();
            let kind = ValueKind::from_name(name)
                .ok_or_else(|| DomainError::UnknownValueKind(name.to_string()))?;
            refer(kind, ctx.history)
        },
    },
];

static INDEX: LazyLock<HashMap<&'static str, &'static FunctionSpec>> =
    LazyLock::new(|| REGISTRY.iter().map(|f| (f.name, f)).collect());

pub fn lookup(name: &str) -> Option<&'static FunctionSpec> {
    INDEX.get(name).copied()
}
