//! Integer-nanosecond simulation time.
//!
//! Every duration and instant in the crate is a [`SimTime`]. Arithmetic is
//! checked: an overflow or a negative result is a bug in the caller, so the
//! plain operators panic instead of wrapping. Use the `checked_*` variants
//! where an underflow is an expected outcome.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};
use std::str::FromStr;

use crate::error::ConfigError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_nanos(ns: u64) -> Self {
        SimTime(ns)
    }

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us * 1_000)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000_000)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * 1_000_000_000)
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_micros_f64(self) -> f64 {
        self.0 as f64 / 1e3
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e9
    }

    pub fn checked_add(self, rhs: SimTime) -> Option<SimTime> {
        self.0.checked_add(rhs.0).map(SimTime)
    }

    pub fn checked_sub(self, rhs: SimTime) -> Option<SimTime> {
        self.0.checked_sub(rhs.0).map(SimTime)
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }

    pub fn checked_mul(self, k: u64) -> Option<SimTime> {
        self.0.checked_mul(k).map(SimTime)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Largest multiple of `unit` not exceeding `self`.
    pub fn floor_to(self, unit: SimTime) -> SimTime {
        assert!(unit.0 > 0, "floor_to with zero unit");
        SimTime(self.0 - self.0 % unit.0)
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        self.checked_add(rhs)
            .unwrap_or_else(|| panic!("SimTime overflow: {self} + {rhs}"))
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        *self = *self + rhs;
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        self.checked_sub(rhs)
            .unwrap_or_else(|| panic!("SimTime underflow: {self} - {rhs}"))
    }
}

impl SubAssign for SimTime {
    fn sub_assign(&mut self, rhs: SimTime) {
        *self = *self - rhs;
    }
}

impl Mul<u64> for SimTime {
    type Output = SimTime;
    fn mul(self, k: u64) -> SimTime {
        self.checked_mul(k)
            .unwrap_or_else(|| panic!("SimTime overflow: {self} * {k}"))
    }
}

impl std::iter::Sum for SimTime {
    fn sum<I: Iterator<Item = SimTime>>(iter: I) -> SimTime {
        iter.fold(SimTime::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ns", self.0)
    }
}

/// Parses `1500`, `1500ns`, `2.12us`, `1.5ms` or `2s` into an exact number of
/// nanoseconds. Decimal fractions are converted without floating point; a
/// value that does not land on a whole nanosecond is rejected.
impl FromStr for SimTime {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || ConfigError::Parse {
            what: "time".into(),
            value: s.to_string(),
        };
        let (num, scale): (&str, u64) = if let Some(n) = t.strip_suffix("ns") {
            (n, 1)
        } else if let Some(n) = t.strip_suffix("us").or_else(|| t.strip_suffix("μs")) {
            (n, 1_000)
        } else if let Some(n) = t.strip_suffix("ms") {
            (n, 1_000_000)
        } else if let Some(n) = t.strip_suffix('s') {
            (n, 1_000_000_000)
        } else {
            (t, 1)
        };
        let num = num.trim();
        let (int_part, frac_part) = match num.split_once('.') {
            Some((i, f)) => (i, f),
            None => (num, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(bad());
        }
        let whole: u64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let mut ns = whole.checked_mul(scale).ok_or_else(bad)?;
        let frac = frac_part.trim_end_matches('0');
        if !frac.is_empty() {
            let digits = frac.len() as u32;
            let denom = 10u64.checked_pow(digits).ok_or_else(bad)?;
            let f: u64 = frac.parse().map_err(|_| bad())?;
            let scaled = f.checked_mul(scale).ok_or_else(bad)?;
            if scaled % denom != 0 {
                return Err(ConfigError::Parse {
                    what: "time (not a whole number of nanoseconds)".into(),
                    value: s.to_string(),
                });
            }
            ns = ns.checked_add(scaled / denom).ok_or_else(bad)?;
        }
        Ok(SimTime(ns))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_units_exactly() {
        assert_eq!("2120".parse::<SimTime>().unwrap(), SimTime(2120));
        assert_eq!("2.12us".parse::<SimTime>().unwrap(), SimTime(2120));
        assert_eq!("1.5ms".parse::<SimTime>().unwrap(), SimTime(1_500_000));
        assert_eq!("2s".parse::<SimTime>().unwrap(), SimTime(2_000_000_000));
        assert_eq!("500us".parse::<SimTime>().unwrap(), SimTime(500_000));
        assert_eq!("16000ns".parse::<SimTime>().unwrap(), SimTime(16_000));
    }

    #[test]
    fn rejects_fractional_nanoseconds() {
        assert!("1.5".parse::<SimTime>().is_err());
        assert!("0.0001us".parse::<SimTime>().is_err());
        assert!("abc".parse::<SimTime>().is_err());
        assert!("-3".parse::<SimTime>().is_err());
    }

    #[test]
    #[should_panic(expected = "underflow")]
    fn subtraction_below_zero_panics() {
        let _ = SimTime(3) - SimTime(4);
    }

    #[test]
    #[should_panic(expected = "overflow")]
    fn addition_overflow_panics() {
        let _ = SimTime::MAX + SimTime(1);
    }

    #[test]
    fn floor_to_packet_multiple() {
        assert_eq!(SimTime(20_000).floor_to(SimTime(8_000)), SimTime(16_000));
    }
}
