//! Power, energy, DVFS-governor, and lumped thermal models.
//!
//! Power is table-driven: each operating performance point (OPP) carries
//! measured busy and static power rather than an analytic C*V^2*f formula,
//! so any model can be expressed by configuration. The shipped numbers are
//! synthetic defaults and reports label them as such.

use serde::{Deserialize, Serialize};

use crate::units::{Energy, Power, SimTime};

/// One operating performance point of a frequency domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Opp {
    pub freq_mhz: u32,
    pub voltage_v: f64,
    /// Additional power drawn while executing a task, microwatts.
    pub dyn_power_uw: u64,
    /// Power drawn whenever the domain is on, microwatts.
    pub static_power_uw: u64,
}

impl Opp {
    /// Convenience constructor taking milliwatts.
    pub fn from_mw(freq_mhz: u32, voltage_v: f64, dyn_power_mw: f64, static_power_mw: f64) -> Self {
        Opp {
            freq_mhz,
            voltage_v,
            dyn_power_uw: Power::from_mw_f64(dyn_power_mw).uw(),
            static_power_uw: Power::from_mw_f64(static_power_mw).uw(),
        }
    }
}

/// The OPP list of one frequency domain, sorted ascending by frequency.
///
/// `ref_freq_mhz` is the frequency at which task latency profiles were
/// taken; it defaults to the highest OPP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OppTable {
    pub opps: Vec<Opp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_freq_mhz: Option<u32>,
}

impl OppTable {
    pub fn new(opps: Vec<Opp>) -> Self {
        OppTable { opps, ref_freq_mhz: None }
    }

    pub fn ref_freq_mhz(&self) -> u32 {
        self.ref_freq_mhz
            .unwrap_or_else(|| self.opps.last().map(|o| o.freq_mhz).unwrap_or(0))
    }

    pub fn highest_index(&self) -> usize {
        self.opps.len().saturating_sub(1)
    }
}

/// Instantaneous PE power at an OPP: static power always, plus dynamic
/// power while a task is executing.
pub fn pe_power(busy: bool, opp: &Opp) -> Power {
    if busy {
        Power::from_uw(opp.dyn_power_uw + opp.static_power_uw)
    } else {
        Power::from_uw(opp.static_power_uw)
    }
}

/// Adds `power x interval` for each PE into the accumulator, exactly.
///
/// The caller guarantees the interval spans no OPP or busy/idle change; the
/// simulation kernel segments time at events and governor ticks.
pub fn accumulate_energy(energy: &mut [Energy], powers: &[Power], interval: SimTime) {
    debug_assert_eq!(energy.len(), powers.len());
    for (e, p) in energy.iter_mut().zip(powers) {
        *e += Energy::from_power_interval(*p, interval);
    }
}

/// DVFS policy applied per frequency domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GovernorPolicy {
    /// Pin the highest OPP.
    Performance,
    /// Pin the lowest OPP.
    Powersave,
    /// Jump to the highest OPP above `up_threshold` utilization, step down
    /// one OPP below `down_threshold`, hold otherwise.
    Ondemand,
}

impl GovernorPolicy {
    /// OPP index a domain starts at before any utilization is observed.
    pub fn initial_index(self, table: &OppTable) -> usize {
        match self {
            GovernorPolicy::Performance => table.highest_index(),
            GovernorPolicy::Powersave | GovernorPolicy::Ondemand => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GovernorConfig {
    pub policy: GovernorPolicy,
    /// Utilization sampling period.
    pub period: SimTime,
    pub up_threshold: f64,
    pub down_threshold: f64,
}

impl Default for GovernorConfig {
    fn default() -> Self {
        GovernorConfig {
            policy: GovernorPolicy::Performance,
            period: SimTime::from_us(100),
            up_threshold: 0.8,
            down_threshold: 0.3,
        }
    }
}

impl GovernorConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.period.is_zero() {
            return Err("governor period must be > 0".to_string());
        }
        if !(0.0 < self.down_threshold && self.down_threshold < self.up_threshold && self.up_threshold <= 1.0) {
            return Err("governor thresholds must satisfy 0 < down < up <= 1".to_string());
        }
        Ok(())
    }
}

/// One governor decision for a domain, given the busy-time fraction of its
/// PEs over the last period. Returns the new OPP index.
pub fn governor_tick(
    config: &GovernorConfig,
    utilization: f64,
    current: usize,
    table: &OppTable,
) -> usize {
    debug_assert!((0.0..=1.0).contains(&utilization));
    match config.policy {
        GovernorPolicy::Performance => table.highest_index(),
        GovernorPolicy::Powersave => 0,
        GovernorPolicy::Ondemand => {
            if utilization > config.up_threshold {
                table.highest_index()
            } else if utilization < config.down_threshold {
                current.saturating_sub(1)
            } else {
                current.min(table.highest_index())
            }
        }
    }
}

/// First-order RC thermal lump parameters shared by all domains.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    pub r_k_per_w: f64,
    pub c_j_per_k: f64,
    pub t_amb_k: f64,
}

impl Default for ThermalParams {
    /// Synthetic defaults (time constant R*C = 10 ms).
    fn default() -> Self {
        ThermalParams { r_k_per_w: 2.0, c_j_per_k: 0.005, t_amb_k: 298.15 }
    }
}

/// Temperature state of one frequency domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalNode {
    pub params: ThermalParams,
    pub temp_k: f64,
}

impl ThermalNode {
    pub fn new(params: ThermalParams) -> Self {
        ThermalNode { params, temp_k: params.t_amb_k }
    }

    /// Largest single-step interval the explicit update stays well-behaved
    /// at: one tenth of the RC time constant.
    pub fn max_step(&self) -> SimTime {
        let rc_s = self.params.r_k_per_w * self.params.c_j_per_k;
        SimTime::from_ns(((rc_s / 10.0) * 1e9).max(1.0) as u64)
    }

    /// Steps the lump by `dt` under constant `power_w`, subdividing into
    /// stable chunks as needed.
    pub fn advance(&mut self, power_w: f64, dt: SimTime) {
        let max = self.max_step();
        let mut remaining = dt;
        while remaining > SimTime::ZERO {
            let step = remaining.min(max);
            thermal_step(self, power_w, step);
            remaining = remaining.saturating_sub(step);
        }
    }
}

/// One explicit-Euler step of the RC lump:
/// `T += dt/(R*C) * (P*R - (T - T_amb))`.
///
/// Requires `dt <= R*C/10`; callers with longer intervals subdivide (see
/// [`ThermalNode::advance`]).
pub fn thermal_step(node: &mut ThermalNode, power_w: f64, dt: SimTime) {
    let p = &node.params;
    let dt_s = dt.ns() as f64 * 1e-9;
    debug_assert!(dt_s <= p.r_k_per_w * p.c_j_per_k / 10.0 + 1e-12);
    node.temp_k += dt_s / (p.r_k_per_w * p.c_j_per_k)
        * (power_w * p.r_k_per_w - (node.temp_k - p.t_amb_k));
}
