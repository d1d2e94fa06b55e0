//! socsim-core: a deterministic discrete-event simulator for heterogeneous
//! SoCs running DAG-structured applications.
//!
//! The crate simulates task scheduling and dynamic power/thermal management
//! on a configurable chip: a resource database of processing elements
//! ([`model`]), a job generator injecting application instances over time
//! ([`workload`]), an event-driven kernel with an analytical interconnect
//! model ([`kernel`]), pluggable schedulers with MET / ETF / static-table
//! built-ins ([`sched`]), an exhaustive single-job optimizer ([`oracle`]),
//! table-driven power with DVFS governors and an RC thermal lump
//! ([`power`]), and report/sweep generation ([`report`]).
//!
//! Everything is replay-deterministic: the same configuration and seed
//! always produce byte-identical traces.

pub mod kernel;
pub mod model;
pub mod oracle;
pub mod power;
pub mod report;
pub mod sched;
pub mod units;
pub mod workload;

pub use kernel::{run, run_single_job, CommParams, RunOptions, SimError, SimOutcome};
pub use model::{builtin_wifi_soc, validate_app, validate_soc, AppGraph, PeId, ResourceDb};
pub use oracle::{optimal_single_job, verify_table, OracleResult};
pub use power::{GovernorConfig, GovernorPolicy};
pub use report::{summarize, sweep, SchedulerChoice, SimReport, SweepConfig, SweepResult};
pub use sched::{EtfScheduler, MetScheduler, Scheduler, StaticTable, TableScheduler};
pub use units::SimTime;
pub use workload::{builtin_wifi_tx, ArrivalDistribution, ArrivalPlan};
