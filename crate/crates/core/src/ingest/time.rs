use chrono::{DateTime, Datelike, NaiveDateTime, Timelike};

use super::{Resolution, Scenario, ScenarioFamily};

/// City-local civil time for a UTC timestamp under a fixed offset (no DST).
pub fn local_time(timestamp: i64, utc_offset_minutes: i32) -> NaiveDateTime {
    let shifted = timestamp.saturating_add(i64::from(utc_offset_minutes) * 60);
    DateTime::from_timestamp(shifted, 0)
        .unwrap_or(DateTime::UNIX_EPOCH)
        .naive_utc()
}

/// Step index of `timestamp` within `resolution`: Jan = 0, Monday = 0, hour of day.
pub fn bucket(timestamp: i64, resolution: Resolution, utc_offset_minutes: i32) -> usize {
    let t = local_time(timestamp, utc_offset_minutes);
    match resolution {
        Resolution::All => 0,
        Resolution::Month => t.month0() as usize,
        Resolution::Day => t.weekday().num_days_from_monday() as usize,
        Resolution::Hour => t.hour() as usize,
    }
}

/// Scenario part that `timestamp` belongs to within `family`.
///
/// Seasons are meteorological (northern hemisphere); parts of day are the
/// half-open intervals [06,12), [12,18), [18,24), [00,06).
pub fn scenario_member(timestamp: i64, family: ScenarioFamily, utc_offset_minutes: i32) -> Option<Scenario> {
    let t = local_time(timestamp, utc_offset_minutes);
    let part = match family {
        ScenarioFamily::Default => 0,
        ScenarioFamily::PartsOfWeek => {
            if t.weekday().num_days_from_monday() < 5 {
                0
            } else {
                1
            }
        }
        ScenarioFamily::Seasons => match t.month() {
            3..=5 => 0,
            6..=8 => 1,
            9..=11 => 2,
            _ => 3,
        },
        ScenarioFamily::PartsOfDay => match t.hour() {
            6..=11 => 0,
            12..=17 => 1,
            18..=23 => 2,
            _ => 3,
        },
    };
    Some(Scenario { family, part })
}
