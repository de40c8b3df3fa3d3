//! UTC timestamps at second resolution and day-denominated durations.
//!
//! All analysis arithmetic runs on seconds since the Unix epoch; durations are
//! expressed in fractional days of exactly 86 400 seconds. Calendar conversion
//! uses the proleptic Gregorian algorithms from Howard Hinnant's
//! `chrono`-compatible date routines, implemented here directly so the crate
//! stays `no_std` and platform-independent.

use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Seconds in one day.
pub const DAY_SECONDS: i64 = 86_400;

/// A UTC instant with second resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timestamp(i64);

impl Timestamp {
    pub const fn from_unix(seconds: i64) -> Self {
        Timestamp(seconds)
    }

    pub const fn unix(self) -> i64 {
        self.0
    }

    /// Offset by a whole number of seconds.
    pub const fn plus_seconds(self, seconds: i64) -> Self {
        Timestamp(self.0 + seconds)
    }

    /// Offset by fractional days, rounded to the nearest second.
    pub fn plus_days(self, days: f64) -> Self {
        Timestamp(self.0 + seconds_from_days(days))
    }

    /// Signed distance to `earlier` in fractional days.
    pub fn days_since(self, earlier: Timestamp) -> f64 {
        (self.0 - earlier.0) as f64 / DAY_SECONDS as f64
    }

    /// Build from a calendar date and time-of-day (UTC).
    pub fn from_civil(year: i64, month: u32, day: u32, hour: u32, min: u32, sec: u32) -> Self {
        Timestamp(
            days_from_civil(year, month, day) * DAY_SECONDS
                + i64::from(hour) * 3600
                + i64::from(min) * 60
                + i64::from(sec),
        )
    }
}

/// Convert a duration in fractional days to whole seconds (nearest).
pub fn seconds_from_days(days: f64) -> i64 {
    libm::round(days * DAY_SECONDS as f64) as i64
}

// Days-from-civil / civil-from-days per Hinnant's algorithms; valid over the
// full proleptic Gregorian calendar.
fn days_from_civil(y: i64, m: u32, d: u32) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = (y - era * 400) as i64;
    let mp = i64::from(if m > 2 { m - 3 } else { m + 9 });
    let doy = (153 * mp + 2) / 5 + i64::from(d) - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if m <= 2 { y + 1 } else { y }, m, d)
}

fn days_in_month(year: i64, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 => {
            if year % 4 == 0 && (year % 100 != 0 || year % 400 == 0) {
                29
            } else {
                28
            }
        }
        _ => 0,
    }
}

impl fmt::Display for Timestamp {
    /// RFC 3339 in the canonical `YYYY-MM-DDTHH:MM:SSZ` form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let days = self.0.div_euclid(DAY_SECONDS);
        let secs = self.0.rem_euclid(DAY_SECONDS);
        let (y, m, d) = civil_from_days(days);
        write!(
            f,
            "{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z",
            y,
            m,
            d,
            secs / 3600,
            (secs % 3600) / 60,
            secs % 60
        )
    }
}

/// Error parsing a canonical RFC 3339 UTC timestamp.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid RFC 3339 UTC timestamp")]
pub struct ParseTimestampError;

impl FromStr for Timestamp {
    type Err = ParseTimestampError;

    /// Strict parse of `YYYY-MM-DDTHH:MM:SSZ`. Liberal RFC 3339 forms
    /// (offsets, fractional seconds) are normalized by the ingest layer
    /// before reaching this type.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let b = s.as_bytes();
        if b.len() != 20 || b[4] != b'-' || b[7] != b'-' || b[10] != b'T' {
            return Err(ParseTimestampError);
        }
        if b[13] != b':' || b[16] != b':' || b[19] != b'Z' {
            return Err(ParseTimestampError);
        }
        let num = |range: core::ops::Range<usize>| -> Result<i64, ParseTimestampError> {
            s[range]
                .parse::<i64>()
                .map_err(|_| ParseTimestampError)
                .and_then(|v| if v >= 0 { Ok(v) } else { Err(ParseTimestampError) })
        };
        let (y, mo, d) = (num(0..4)?, num(5..7)? as u32, num(8..10)? as u32);
        let (h, mi, sec) = (num(11..13)? as u32, num(14..16)? as u32, num(17..19)? as u32);
        if !(1..=12).contains(&mo) || d < 1 || d > days_in_month(y, mo) {
            return Err(ParseTimestampError);
        }
        if h > 23 || mi > 59 || sec > 59 {
            return Err(ParseTimestampError);
        }
        Ok(Timestamp::from_civil(y, mo, d, h, mi, sec))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <alloc::string::String as Deserialize>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
