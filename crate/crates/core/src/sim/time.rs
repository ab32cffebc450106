use std::fmt;
use std::ops::{Add, AddAssign, Sub};

/// Simulation time in integer nanoseconds since run start.
///
/// All protocol timing constants (13.6 us symbols, 49.6 us preambles, 16 ns
/// clock cycles, ...) are exact in nanoseconds, so comparisons and sums never
/// see rounding error. Frequencies and ppm quantities stay floating-point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_ns(ns: u64) -> Self {
        SimTime(ns)
    }

    pub const fn from_us(us: u64) -> Self {
        SimTime(us * 1_000)
    }

    pub const fn from_ms(ms: u64) -> Self {
        SimTime(ms * 1_000_000)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * 1_000_000_000)
    }

    /// Fractional seconds, rounded to the nearest nanosecond.
    pub fn from_secs_f64(s: f64) -> Self {
        SimTime((s * 1e9).round() as u64)
    }

    /// Fractional microseconds, rounded to the nearest nanosecond.
    pub fn from_us_f64(us: f64) -> Self {
        SimTime((us * 1e3).round() as u64)
    }

    pub const fn as_ns(self) -> u64 {
        self.0
    }

    pub fn as_us_f64(self) -> f64 {
        self.0 as f64 / 1e3
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e9
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        self.0 += rhs.0;
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ns", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn microsecond_constants_are_exact() {
        assert_eq!(SimTime::from_us_f64(13.6).as_ns(), 13_600);
        assert_eq!(SimTime::from_us_f64(49.6).as_ns(), 49_600);
        assert_eq!(SimTime::from_us(532).as_ns(), 532_000);
    }

    #[test]
    fn arithmetic_and_ordering() {
        let a = SimTime::from_us(34);
        let b = SimTime::from_us(2);
        assert_eq!((a + b).as_ns(), 36_000);
        assert_eq!((a - b).as_ns(), 32_000);
        assert!(b < a);
        assert_eq!(SimTime::from_secs(1).as_secs_f64(), 1.0);
    }
}
