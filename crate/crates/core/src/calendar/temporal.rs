use chrono::{Datelike, Duration, NaiveDate};

use super::{DayOfWeek, DomainError};
use crate::value::{Date, DateTime, TimeOfDay};

fn check_range(field: &'static str, value: i64, min: i64, max: i64) -> Result<u16, DomainError> {
    if (min..=max).contains(&value) {
        Ok(value as u16)
    } else {
        Err(DomainError::OutOfRange {
            field,
            min,
            max,
            got: value,
        })
    }
}

fn hm(hour: u16, minute: u16) -> TimeOfDay {
    TimeOfDay::from_hm(hour, minute).expect("range-checked")
}

/// `hour` o'clock in the afternoon/evening; `NumberPM(12)` is noon.
pub fn number_pm(hour: i64) -> Result<TimeOfDay, DomainError> {
    let h = check_range("hour", hour, 1, 12)?;
    Ok(hm(h % 12 + 12, 0))
}

/// `NumberAM(12)` is midnight.
pub fn number_am(hour: i64) -> Result<TimeOfDay, DomainError> {
    let h = check_range("hour", hour, 1, 12)?;
    Ok(hm(h % 12, 0))
}

pub fn hour_military(hour: i64) -> Result<TimeOfDay, DomainError> {
    let h = check_range("hour", hour, 0, 23)?;
    Ok(hm(h, 0))
}

pub fn hour_minute_pm(hour: i64, minute: i64) -> Result<TimeOfDay, DomainError> {
    let h = check_range("hour", hour, 1, 12)?;
    let m = check_range("minute", minute, 0, 59)?;
    Ok(hm(h % 12 + 12, m))
}

pub fn hour_minute_am(hour: i64, minute: i64) -> Result<TimeOfDay, DomainError> {
    let h = check_range("hour", hour, 1, 12)?;
    let m = check_range("minute", minute, 0, 59)?;
    Ok(hm(h % 12, m))
}

pub fn today(now: DateTime) -> Date {
    now.date
}

pub fn tomorrow(now: DateTime) -> Date {
    now.date + Duration::days(1)
}

/// First date strictly after today falling on `day`.
pub fn next_dow(now: DateTime, day: DayOfWeek) -> Date {
    let today = now.date.weekday().num_days_from_monday() as i64;
    let target = day.weekday().num_days_from_monday() as i64;
    let ahead = match (target - today).rem_euclid(7) {
        0 => 7,
        n => n,
    };
    now.date + Duration::days(ahead)
}

fn max_day(month: u32) -> u32 {
    match month {
        2 => 29,
        4 | 6 | 9 | 11 => 30,
        _ => 31,
    }
}

/// The next occurrence of month/day on or after today.
pub fn month_day(now: DateTime, month: i64, day: i64) -> Result<Date, DomainError> {
    let invalid = DomainError::InvalidDate { month, day };
    if !(1..=12).contains(&month) || day < 1 || day > max_day(month as u32) as i64 {
        return Err(invalid);
    }
    let (m, d) = (month as u32, day as u32);
    // Feb 29 can be up to eight years out (e.g. 2097 -> 2104).
    (now.date.year()..=now.date.year() + 8)
        .filter_map(|y| NaiveDate::from_ymd_opt(y, m, d))
        .find(|date| *date >= now.date)
        .ok_or(invalid)
}

pub fn date_time_of(date: Date, time: TimeOfDay) -> DateTime {
    DateTime::new(date, time)
}
