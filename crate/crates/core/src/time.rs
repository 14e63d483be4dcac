//! Minutes-of-day arithmetic shared by the planner and the ingestion code.

use crate::error::{Error, Result};

/// Minutes in the planning day.
pub const DAY_MINUTES: u32 = 1440;

/// Number of hourly slots in the day.
pub const SLOTS: usize = 24;

/// Hourly slot containing `minute`. Values at or beyond the end of the day
/// map to the last slot.
pub fn slot_of(minute: f64) -> usize {
    ((minute / 60.0).floor().max(0.0) as usize).min(SLOTS - 1)
}

/// Local hour of day for an epoch timestamp, given a fixed UTC offset in minutes.
pub fn local_hour(timestamp: i64, utc_offset_min: i32) -> usize {
    let local = timestamp + i64::from(utc_offset_min) * 60;
    (local.rem_euclid(86_400) / 3600) as usize
}

/// Local minute of day for an epoch timestamp.
pub fn local_minute(timestamp: i64, utc_offset_min: i32) -> f64 {
    let local = timestamp + i64::from(utc_offset_min) * 60;
    local.rem_euclid(86_400) as f64 / 60.0
}

/// Parses `HH:MM` into minutes of day. `24:00` is accepted as the end of day.
pub fn parse_hhmm(text: &str) -> Result<u32> {
    let bad = || Error::domain(format!("invalid time `{text}`, expected HH:MM"));
    let (h, m) = text.trim().split_once(':').ok_or_else(bad)?;
    let h: u32 = h.parse().map_err(|_| bad())?;
    let m: u32 = m.parse().map_err(|_| bad())?;
    if m >= 60 || h > 24 || (h == 24 && m != 0) {
        return Err(bad());
    }
    Ok(h * 60 + m)
}

/// Formats minutes of day as `HH:MM`, rounding to the nearest minute.
pub fn format_hhmm(minute: f64) -> String {
    let total = minute.round().max(0.0) as u32;
    format!("{:02}:{:02}", total / 60, total % 60)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slots() {
        assert_eq!(slot_of(0.0), 0);
        assert_eq!(slot_of(450.0), 7);
        assert_eq!(slot_of(479.999), 7);
        assert_eq!(slot_of(480.0), 8);
        assert_eq!(slot_of(1440.0), 23);
    }

    #[test]
    fn local_hours_with_offset() {
        // 2011-03-13 00:00:00 UTC
        let midnight = 1_299_974_400;
        assert_eq!(local_hour(midnight, 0), 0);
        assert_eq!(local_hour(midnight + 12 * 3600 + 59, 0), 12);
        assert_eq!(local_hour(midnight, -480), 16);
        assert_eq!(local_hour(midnight, 90), 1);
    }

    #[test]
    fn hhmm_round_trip() {
        assert_eq!(parse_hhmm("07:00").unwrap(), 420);
        assert_eq!(parse_hhmm("15:30").unwrap(), 930);
        assert_eq!(parse_hhmm("24:00").unwrap(), 1440);
        assert!(parse_hhmm("24:01").is_err());
        assert!(parse_hhmm("7").is_err());
        assert!(parse_hhmm("07:60").is_err());
        assert_eq!(format_hhmm(930.0), "15:30");
        assert_eq!(format_hhmm(569.6), "09:30");
    }
}
