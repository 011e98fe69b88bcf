//! Exact time values.
//!
//! Timestamps are fixed-point integers with six decimal digits of sub-unit
//! precision, so precedence comparisons never depend on floating-point
//! rounding. Only probability densities are evaluated in `f64`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Number of sub-units in one time unit.
pub const UNITS_PER_TIME: i64 = 1_000_000;
const FRACTION_DIGITS: usize = 6;

/// A point in time, stored as an integer count of micro-units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Time(i64);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TimeError {
    #[error("not a decimal number: {0:?}")]
    Syntax(String),
    #[error("more than {FRACTION_DIGITS} fractional digits: {0:?}")]
    Precision(String),
    #[error("time value out of range: {0:?}")]
    Overflow(String),
}

impl Time {
    pub const fn from_units(units: i64) -> Self {
        Time(units)
    }

    pub const fn units(self) -> i64 {
        self.0
    }

    /// Whole time units; panics on overflow, which only test helpers hit.
    pub fn from_int(value: i64) -> Self {
        Time(value.checked_mul(UNITS_PER_TIME).expect("time overflow"))
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / UNITS_PER_TIME as f64
    }

    /// Largest representable time not above `value`.
    pub fn floor_f64(value: f64) -> Self {
        Time((value * UNITS_PER_TIME as f64).floor() as i64)
    }

    /// Smallest representable time not below `value`.
    pub fn ceil_f64(value: f64) -> Self {
        Time((value * UNITS_PER_TIME as f64).ceil() as i64)
    }

    pub fn checked_add(self, other: Time) -> Option<Time> {
        self.0.checked_add(other.0).map(Time)
    }

    pub fn checked_sub(self, other: Time) -> Option<Time> {
        self.0.checked_sub(other.0).map(Time)
    }
}

impl FromStr for Time {
    type Err = TimeError;

    /// Parses a JSON-style decimal literal (`-12`, `4.25`, `1e3`, `2.5E-1`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || TimeError::Syntax(s.to_string());
        let (mantissa, exponent) = match s.find(['e', 'E']) {
            Some(pos) => {
                let exp: i32 = s[pos + 1..].parse().map_err(|_| syntax())?;
                (&s[..pos], exp)
            }
            None => (s, 0),
        };
        let (negative, digits) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((i, f)) => (i, f),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(syntax());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(syntax());
        }
        // all digits as one integer, with the decimal point shifted by `scale`
        let mut all: String = format!("{int_part}{frac_part}");
        let mut scale = frac_part.len() as i64 - exponent as i64;
        // strip insignificant trailing zeros so `1.500000000` is accepted
        while scale > 0 && all.ends_with('0') && all.len() > 1 {
            all.pop();
            scale -= 1;
        }
        if scale > FRACTION_DIGITS as i64 {
            return Err(TimeError::Precision(s.to_string()));
        }
        let shift = FRACTION_DIGITS as i64 - scale;
        if shift > 30 {
            return Err(TimeError::Overflow(s.to_string()));
        }
        let base: i128 = all
            .trim_start_matches('0')
            .parse::<i128>()
            .or_else(|e| {
                if all.bytes().all(|b| b == b'0') {
                    Ok(0)
                } else {
                    Err(e)
                }
            })
            .map_err(|_| TimeError::Overflow(s.to_string()))?;
        let units = base
            .checked_mul(10i128.pow(shift as u32))
            .ok_or_else(|| TimeError::Overflow(s.to_string()))?;
        let units = if negative { -units } else { units };
        i64::try_from(units)
            .map(Time)
            .map_err(|_| TimeError::Overflow(s.to_string()))
    }
}

impl fmt::Display for Time {
    /// Shortest exact decimal: `8`, `4.5`, `-0.000001`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let int = abs / UNITS_PER_TIME as u64;
        let frac = abs % UNITS_PER_TIME as u64;
        if frac == 0 {
            write!(f, "{sign}{int}")
        } else {
            let digits = format!("{frac:0width$}", width = FRACTION_DIGITS);
            write!(f, "{sign}{int}.{}", digits.trim_end_matches('0'))
        }
    }
}
