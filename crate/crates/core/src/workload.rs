//! Job generation: built-in benchmark graphs, arrival processes, and
//! runtime job instantiation.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp};
use serde::{Deserialize, Serialize};

use crate::model::{AppGraph, ConfigError, Edge, PeId, TaskDef};
use crate::units::SimTime;

/// Lifecycle of one task instance. Transitions are strictly
/// blocked -> ready -> running -> finished.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskState {
    Blocked,
    Ready,
    Running,
    Finished,
}

/// Runtime copy of one task of an injected job.
#[derive(Clone, Debug)]
pub struct TaskInstance {
    pub state: TaskState,
    pub assigned_pe: Option<PeId>,
    pub t_ready: Option<SimTime>,
    pub t_start: Option<SimTime>,
    pub t_finish: Option<SimTime>,
    /// Frequency the latency was computed at, sampled at dispatch.
    pub freq_mhz: Option<u32>,
}

impl TaskInstance {
    fn blocked() -> Self {
        TaskInstance {
            state: TaskState::Blocked,
            assigned_pe: None,
            t_ready: None,
            t_start: None,
            t_finish: None,
            freq_mhz: None,
        }
    }
}

/// One injected instance of an application.
#[derive(Clone, Debug)]
pub struct JobInstance {
    pub job_id: u64,
    pub t_arrive: SimTime,
    pub t_complete: Option<SimTime>,
    /// Indexed like the application's task list.
    pub tasks: Vec<TaskInstance>,
}

impl JobInstance {
    pub fn finished(&self) -> bool {
        self.tasks.iter().all(|t| t.state == TaskState::Finished)
    }
}

/// How inter-arrival gaps are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalDistribution {
    /// Gaps ~ Exp(rate): an open Poisson workload.
    Exponential,
    /// Gaps of exactly 1/rate, first job at t = 0.
    Deterministic,
}

/// Parameters of a job injection stream.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrivalPlan {
    pub distribution: ArrivalDistribution,
    pub rate_jobs_per_ms: f64,
    /// Injection horizon; arrivals fall in `[0, duration)`.
    pub duration: SimTime,
    pub seed: u64,
}

impl ArrivalPlan {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.rate_jobs_per_ms > 0.0 && self.rate_jobs_per_ms.is_finite()) {
            return Err("arrival rate must be > 0".to_string());
        }
        if self.duration.is_zero() {
            return Err("duration must be > 0".to_string());
        }
        Ok(())
    }
}

/// Draws the arrival times of a plan: sorted, strictly increasing, all in
/// `[0, duration)`. The same plan always produces the same sequence.
pub fn generate_arrivals(plan: &ArrivalPlan) -> Vec<SimTime> {
    plan.validate().expect("invalid arrival plan");
    let mut out = Vec::new();
    match plan.distribution {
        ArrivalDistribution::Deterministic => {
            let gap_ns = (1e6 / plan.rate_jobs_per_ms).round().max(1.0) as u64;
            let mut t = 0u64;
            while t < plan.duration.ns() {
                out.push(SimTime::from_ns(t));
                t += gap_ns;
            }
        }
        ArrivalDistribution::Exponential => {
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            // rate per nanosecond; sampled gaps land on the ns grid with a
            // 1 ns floor to keep arrival times strictly increasing.
            let exp = Exp::new(plan.rate_jobs_per_ms / 1e6).expect("rate checked above");
            let mut t = 0u64;
            loop {
                let gap = exp.sample(&mut rng).round().max(1.0);
                t = t.saturating_add(gap as u64);
                if t >= plan.duration.ns() {
                    break;
                }
                out.push(SimTime::from_ns(t));
            }
        }
    }
    out
}

/// Creates the runtime task set of a job: sources are immediately ready at
/// the arrival time, everything else starts blocked.
pub fn instantiate_job(app: &AppGraph, job_id: u64, t_arrive: SimTime) -> JobInstance {
    let mut tasks = vec![TaskInstance::blocked(); app.tasks.len()];
    for src in app.sources() {
        tasks[src].state = TaskState::Ready;
        tasks[src].t_ready = Some(t_arrive);
    }
    JobInstance { job_id, t_arrive, t_complete: None, tasks }
}

/// Workload description file: which app to inject, how fast, for how long.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorkloadSpec {
    /// Built-in app name or a path to an app file.
    pub app: String,
    pub distribution: ArrivalDistribution,
    pub rate_jobs_per_ms: f64,
    pub duration_us: u64,
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn plan(&self) -> ArrivalPlan {
        ArrivalPlan {
            distribution: self.distribution,
            rate_jobs_per_ms: self.rate_jobs_per_ms,
            duration: SimTime::from_us(self.duration_us),
            seed: self.seed,
        }
    }
}

pub fn load_workload(path: &Path) -> Result<WorkloadSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.display().to_string(),
        source,
    })
}

/// The built-in WiFi transmitter benchmark: a six-stage pipeline
/// (scramble+encode, interleave, QPSK-modulate, insert pilots, inverse FFT,
/// CRC) with measured reference latencies per PE type. Edges carry no data
/// volume by default, making communication cost opt-in.
pub fn builtin_wifi_tx() -> AppGraph {
    builtin_wifi_tx_with_volume(0)
}

/// [`builtin_wifi_tx`] with every pipeline edge carrying `volume_bytes`.
pub fn builtin_wifi_tx_with_volume(volume_bytes: u64) -> AppGraph {
    let us = SimTime::from_us;
    let task = |name: &str, profile: &[(&str, u64)]| TaskDef {
        name: name.to_string(),
        latency_profile: profile
            .iter()
            .map(|&(pe, lat)| (pe.to_string(), us(lat)))
            .collect::<BTreeMap<_, _>>(),
    };
    let tasks = vec![
        task("scrambler_encoder", &[("scrambler_acc", 8), ("A7", 22), ("A15", 10)]),
        task("interleaver", &[("A7", 10), ("A15", 4)]),
        task("qpsk_modulation", &[("A7", 15), ("A15", 8)]),
        task("pilot_insertion", &[("A7", 5), ("A15", 3)]),
        task("inverse_fft", &[("fft_acc", 16), ("A7", 296), ("A15", 118)]),
        task("crc", &[("A7", 5), ("A15", 3)]),
    ];
    let edges = (0..tasks.len() - 1)
        .map(|i| Edge { src: i, dst: i + 1, volume_bytes })
        .collect();
    AppGraph { name: "wifi_tx".to_string(), tasks, edges }
}
