//! Fixed-point units for time, power, and energy.
//!
//! Simulated time is integer nanoseconds so that event ordering and
//! tie-breaking are exact; user-facing values are microseconds. Power is
//! integer microwatts and energy integer femtojoules (1 uW x 1 ns = 1 fJ),
//! so energy accounting is exact under addition and reproducible from a
//! trace.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A point in simulated time (or a duration), in nanoseconds.
///
/// Serialized as a microsecond float; all values used by the simulator fit
/// f64 exactly up to ~104 days of simulated time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_ns(ns: u64) -> Self {
        SimTime(ns)
    }

    pub const fn from_us(us: u64) -> Self {
        SimTime(us * 1_000)
    }

    /// Rounds to the nanosecond grid.
    pub fn from_us_f64(us: f64) -> Self {
        assert!(us >= 0.0 && us.is_finite(), "time must be finite and >= 0");
        SimTime((us * 1_000.0).round() as u64)
    }

    pub const fn ns(self) -> u64 {
        self.0
    }

    pub fn us_f64(self) -> f64 {
        self.0 as f64 / 1_000.0
    }

    pub const fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Exact decimal microsecond rendering, e.g. 42 -> "42", 10500ns -> "10.5".
    pub fn format_us(self) -> String {
        let whole = self.0 / 1_000;
        let frac = self.0 % 1_000;
        if frac == 0 {
            format!("{whole}")
        } else {
            let s = format!("{frac:03}");
            format!("{whole}.{}", s.trim_end_matches('0'))
        }
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

impl SubAssign for SimTime {
    fn sub_assign(&mut self, rhs: SimTime) {
        self.0 -= rhs.0;
    }
}

impl Sum for SimTime {
    fn sum<I: Iterator<Item = SimTime>>(iter: I) -> SimTime {
        iter.fold(SimTime::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}us", self.format_us())
    }
}

impl Serialize for SimTime {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.us_f64())
    }
}

impl<'de> Deserialize<'de> for SimTime {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let us = f64::deserialize(deserializer)?;
        if !(us >= 0.0 && us.is_finite()) {
            return Err(serde::de::Error::custom("time must be finite and >= 0"));
        }
        Ok(SimTime::from_us_f64(us))
    }
}

/// Electrical power in integer microwatts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Power(u64);

impl Power {
    pub const ZERO: Power = Power(0);

    pub const fn from_uw(uw: u64) -> Self {
        Power(uw)
    }

    /// Rounds to the microwatt grid.
    pub fn from_mw_f64(mw: f64) -> Self {
        assert!(mw >= 0.0 && mw.is_finite(), "power must be finite and >= 0");
        Power((mw * 1_000.0).round() as u64)
    }

    pub const fn uw(self) -> u64 {
        self.0
    }

    pub fn mw_f64(self) -> f64 {
        self.0 as f64 / 1_000.0
    }

    pub fn watts_f64(self) -> f64 {
        self.0 as f64 * 1e-6
    }
}

impl Add for Power {
    type Output = Power;
    fn add(self, rhs: Power) -> Power {
        Power(self.0 + rhs.0)
    }
}

impl AddAssign for Power {
    fn add_assign(&mut self, rhs: Power) {
        self.0 += rhs.0;
    }
}

impl Sum for Power {
    fn sum<I: Iterator<Item = Power>>(iter: I) -> Power {
        iter.fold(Power::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Power {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}mW", self.mw_f64())
    }
}

/// Accumulated energy in integer femtojoules.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Energy(u128);

impl Energy {
    pub const ZERO: Energy = Energy(0);

    pub const fn from_fj(fj: u128) -> Self {
        Energy(fj)
    }

    /// Exact product of a constant power and an interval length.
    pub const fn from_power_interval(power: Power, dt: SimTime) -> Self {
        Energy(power.uw() as u128 * dt.ns() as u128)
    }

    pub const fn fj(self) -> u128 {
        self.0
    }

    pub fn mj_f64(self) -> f64 {
        self.0 as f64 / 1e12
    }
}

impl Add for Energy {
    type Output = Energy;
    fn add(self, rhs: Energy) -> Energy {
        Energy(self.0 + rhs.0)
    }
}

impl AddAssign for Energy {
    fn add_assign(&mut self, rhs: Energy) {
        self.0 += rhs.0;
    }
}

impl Sum for Energy {
    fn sum<I: Iterator<Item = Energy>>(iter: I) -> Energy {
        iter.fold(Energy::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}mJ", self.mj_f64())
    }
}
