//! Report generation: run summaries, injection-rate sweeps, and plot-ready
//! CSV outputs.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::kernel::{run_with_arrivals, RunOptions, SimError, SimOutcome};
use crate::model::{AppGraph, ResourceDb};
use crate::power::GovernorConfig;
use crate::sched::{EtfScheduler, MetScheduler, Scheduler, StaticTable, TableError, TableScheduler};
use crate::units::{Energy, SimTime};
use crate::workload::{generate_arrivals, ArrivalDistribution, ArrivalPlan};

/// One task execution, with names resolved for output.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub job_id: u64,
    pub task: String,
    pub pe_type: String,
    pub pe_index: usize,
    pub t_ready: SimTime,
    pub t_start: SimTime,
    pub t_finish: SimTime,
    pub freq_mhz: u32,
}

/// One governor OPP decision (the log opens with each domain's initial OPP
/// at t = 0, so the frequency trajectory is recoverable from it).
#[derive(Clone, Debug, PartialEq)]
pub struct OppRow {
    pub time: SimTime,
    pub domain: String,
    pub freq_mhz: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeReport {
    pub pe: String,
    pub utilization: f64,
    pub busy_us: f64,
    pub energy_mj: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DomainReport {
    pub domain: String,
    pub peak_temp_k: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JobSummary {
    pub job_id: u64,
    pub t_arrive: SimTime,
    pub t_complete: Option<SimTime>,
}

/// Aggregated metrics of one simulation run.
#[derive(Clone, Debug, Serialize)]
pub struct SimReport {
    pub scheduler: String,
    pub app: String,
    pub seed: Option<u64>,
    pub jobs_injected: u64,
    pub jobs_completed: u64,
    pub jobs_in_flight: u64,
    /// Total simulated time, microseconds.
    pub elapsed_us: f64,
    /// Mean completion latency over completed jobs arriving after warm-up;
    /// absent when no job qualifies.
    pub avg_job_exec_time_us: Option<f64>,
    pub throughput_jobs_per_ms: f64,
    pub energy_total_mj: f64,
    pub per_pe: Vec<PeReport>,
    pub domains: Vec<DomainReport>,
    pub warmup_us: f64,
    /// Provenance of the power/thermal numbers.
    pub power_model_note: String,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
    #[serde(skip)]
    pub opp_log: Vec<OppRow>,
    #[serde(skip)]
    pub jobs: Vec<JobSummary>,
    /// Exact per-PE energy in femtojoules, parallel to `per_pe`.
    #[serde(skip)]
    pub energy_fj: Vec<u128>,
}

/// Computes every report field from a finished run.
pub fn summarize(out: &SimOutcome) -> SimReport {
    let warmup =
        SimTime::from_ns((out.duration.ns() as f64 * out.warmup_frac).round() as u64);
    let injected = out.jobs.len() as u64;
    let completed = out.jobs_completed();
    let measured: Vec<u64> = out
        .jobs
        .iter()
        .filter(|j| j.t_arrive >= warmup)
        .filter_map(|j| j.t_complete.map(|c| (c - j.t_arrive).ns()))
        .collect();
    let avg_job_exec_time_us = if measured.is_empty() {
        None
    } else {
        Some(measured.iter().sum::<u64>() as f64 / measured.len() as f64 / 1_000.0)
    };
    let elapsed_ms = out.horizon.ns() as f64 / 1e6;
    let throughput = if elapsed_ms > 0.0 { completed as f64 / elapsed_ms } else { 0.0 };
    let per_pe: Vec<PeReport> = out
        .pe_names
        .iter()
        .enumerate()
        .map(|(i, name)| PeReport {
            pe: name.clone(),
            utilization: if out.horizon.is_zero() {
                0.0
            } else {
                out.busy[i].ns() as f64 / out.horizon.ns() as f64
            },
            busy_us: out.busy[i].us_f64(),
            energy_mj: out.energy[i].mj_f64(),
        })
        .collect();
    let energy_total_mj = out.energy.iter().copied().sum::<Energy>().mj_f64();
    SimReport {
        scheduler: out.scheduler_name.clone(),
        app: out.app_name.clone(),
        seed: out.seed,
        jobs_injected: injected,
        jobs_completed: completed,
        jobs_in_flight: injected - completed,
        elapsed_us: out.horizon.us_f64(),
        avg_job_exec_time_us,
        throughput_jobs_per_ms: throughput,
        energy_total_mj,
        per_pe,
        domains: out
            .domains
            .iter()
            .zip(&out.peak_temp_k)
            .map(|(domain, &peak_temp_k)| DomainReport { domain: domain.clone(), peak_temp_k })
            .collect(),
        warmup_us: warmup.us_f64(),
        power_model_note:
            "per-OPP power values and the RC thermal lump come from the SoC configuration; \
             the built-in tables are synthetic defaults, not measured silicon"
                .to_string(),
        trace: out
            .trace
            .iter()
            .map(|r| TraceRow {
                job_id: r.job_id,
                task: out.task_names[r.task_idx].clone(),
                pe_type: out.pe_type_names[r.pe.pe_type].clone(),
                pe_index: r.pe.instance,
                t_ready: r.t_ready,
                t_start: r.t_start,
                t_finish: r.t_finish,
                freq_mhz: r.freq_mhz,
            })
            .collect(),
        opp_log: out
            .opp_log
            .iter()
            .map(|c| OppRow {
                time: c.time,
                domain: out.domains[c.domain_idx].clone(),
                freq_mhz: c.freq_mhz,
            })
            .collect(),
        jobs: out
            .jobs
            .iter()
            .map(|j| JobSummary {
                job_id: j.job_id,
                t_arrive: j.t_arrive,
                t_complete: j.t_complete,
            })
            .collect(),
        energy_fj: out.energy.iter().map(|e| e.fj()).collect(),
    }
}

/// Scheduler selection for runs and sweeps.
#[derive(Clone, Debug)]
pub enum SchedulerChoice {
    Met,
    Etf,
    Table(StaticTable),
}

impl SchedulerChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SchedulerChoice::Met => "met",
            SchedulerChoice::Etf => "etf",
            SchedulerChoice::Table(_) => "table",
        }
    }

    pub fn build(
        &self,
        app: &AppGraph,
        db: &ResourceDb,
    ) -> Result<Box<dyn Scheduler>, TableError> {
        Ok(match self {
            SchedulerChoice::Met => Box::new(MetScheduler),
            SchedulerChoice::Etf => Box::new(EtfScheduler),
            SchedulerChoice::Table(t) => Box::new(TableScheduler::new(t, app, db)?),
        })
    }
}

/// Grid parameters of an injection-rate sweep.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub rates_jobs_per_ms: Vec<f64>,
    pub seeds: Vec<u64>,
    pub duration: SimTime,
    pub distribution: ArrivalDistribution,
    pub governor: GovernorConfig,
    pub options: RunOptions,
    /// Worker threads for independent cells; 1 = sequential. Results are
    /// assembled in grid order, so parallelism never changes the output.
    pub threads: usize,
}

/// One (scheduler, rate) cell of a sweep, averaged over seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub rate_jobs_per_ms: f64,
    pub scheduler: String,
    pub avg_exec_time_us: Option<f64>,
    pub throughput_jobs_per_ms: f64,
    pub energy_mj: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep needs at least one rate and one seed")]
    EmptyGrid,
    #[error("table scheduler: {0}")]
    Table(#[from] TableError),
    #[error("cell (scheduler {scheduler}, rate {rate}/ms, seed {seed}): {source}")]
    Cell {
        scheduler: String,
        rate: f64,
        seed: u64,
        #[source]
        source: SimError,
    },
}

/// Runs every (scheduler, rate, seed) combination. Arrival sequences are
/// generated once per (rate, seed), so every scheduler sees an identical
/// workload; per-seed metrics are averaged into one row per cell. Rows come
/// back sorted by (scheduler, rate).
pub fn sweep(
    db: &ResourceDb,
    app: &AppGraph,
    schedulers: &[SchedulerChoice],
    cfg: &SweepConfig,
) -> Result<SweepResult, SweepError> {
    if cfg.rates_jobs_per_ms.is_empty() || cfg.seeds.is_empty() || schedulers.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    // fail fast on a bad table before burning sweep time
    for s in schedulers {
        s.build(app, db)?;
    }
    let arrivals: Vec<Vec<Vec<SimTime>>> = cfg
        .rates_jobs_per_ms
        .iter()
        .map(|&rate| {
            cfg.seeds
                .iter()
                .map(|&seed| {
                    generate_arrivals(&ArrivalPlan {
                        distribution: cfg.distribution,
                        rate_jobs_per_ms: rate,
                        duration: cfg.duration,
                        seed,
                    })
                })
                .collect()
        })
        .collect();

    let cells: Vec<(usize, usize)> = (0..schedulers.len())
        .flat_map(|s| (0..cfg.rates_jobs_per_ms.len()).map(move |r| (s, r)))
        .collect();

    let run_cell = |&(si, ri): &(usize, usize)| -> Result<SweepRow, SweepError> {
        let choice = &schedulers[si];
        let rate = cfg.rates_jobs_per_ms[ri];
        let mut avgs: Vec<f64> = Vec::new();
        let mut throughputs = Vec::new();
        let mut energies = Vec::new();
        for (sdi, &seed) in cfg.seeds.iter().enumerate() {
            let mut scheduler = choice.build(app, db).expect("validated above");
            let out = run_with_arrivals(
                db,
                app,
                &arrivals[ri][sdi],
                cfg.duration,
                scheduler.as_mut(),
                &cfg.governor,
                &cfg.options,
            )
            .map_err(|source| SweepError::Cell {
                scheduler: choice.name().to_string(),
                rate,
                seed,
                source,
            })?;
            let report = summarize(&out);
            if let Some(avg) = report.avg_job_exec_time_us {
                avgs.push(avg);
            }
            throughputs.push(report.throughput_jobs_per_ms);
            energies.push(report.energy_total_mj);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        Ok(SweepRow {
            rate_jobs_per_ms: rate,
            scheduler: choice.name().to_string(),
            avg_exec_time_us: (!avgs.is_empty()).then(|| mean(&avgs)),
            throughput_jobs_per_ms: mean(&throughputs),
            energy_mj: mean(&energies),
        })
    };

    let mut rows: Vec<SweepRow> = if cfg.threads > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .expect("thread pool");
        pool.install(|| cells.par_iter().map(run_cell).collect::<Result<Vec<_>, _>>())?
    } else {
        cells.iter().map(run_cell).collect::<Result<Vec<_>, _>>()?
    };
    rows.sort_by(|a, b| {
        a.scheduler
            .cmp(&b.scheduler)
            .then(a.rate_jobs_per_ms.total_cmp(&b.rate_jobs_per_ms))
    });
    Ok(SweepResult { rows })
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
}

fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    fs::write(path, contents)
        .map_err(|source| ReportError::Io { path: path.display().to_string(), source })
}

/// Files produced by [`write_outputs`].
#[derive(Clone, Debug)]
pub struct OutputPaths {
    pub trace_csv: PathBuf,
    pub summary_json: PathBuf,
    pub gantt_csv: PathBuf,
    pub opp_log_csv: PathBuf,
}

pub const TRACE_HEADER: &str =
    "job_id,task,pe_type,pe_index,t_ready_us,t_start_us,t_finish_us,freq_mhz";

pub fn trace_csv_string(report: &SimReport) -> String {
    let mut s = String::with_capacity(64 * (report.trace.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in &report.trace {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.job_id,
            r.task,
            r.pe_type,
            r.pe_index,
            r.t_ready.format_us(),
            r.t_start.format_us(),
            r.t_finish.format_us(),
            r.freq_mhz
        );
    }
    s
}

pub fn gantt_csv_string(report: &SimReport) -> String {
    let mut s = String::from("pe,job_id,task,t_start_us,t_finish_us\n");
    for r in &report.trace {
        let _ = writeln!(
            s,
            "{}#{},{},{},{},{}",
            r.pe_type,
            r.pe_index,
            r.job_id,
            r.task,
            r.t_start.format_us(),
            r.t_finish.format_us()
        );
    }
    s
}

pub fn opp_log_csv_string(report: &SimReport) -> String {
    let mut s = String::from("t_us,freq_domain,freq_mhz\n");
    for r in &report.opp_log {
        let _ = writeln!(s, "{},{},{}", r.time.format_us(), r.domain, r.freq_mhz);
    }
    s
}

/// Writes the full report file set into `dir`.
pub fn write_outputs(report: &SimReport, dir: &Path) -> Result<OutputPaths, ReportError> {
    fs::create_dir_all(dir)
        .map_err(|source| ReportError::Io { path: dir.display().to_string(), source })?;
    let paths = OutputPaths {
        trace_csv: dir.join("trace.csv"),
        summary_json: dir.join("summary.json"),
        gantt_csv: dir.join("gantt.csv"),
        opp_log_csv: dir.join("opp_log.csv"),
    };
    write_file(&paths.trace_csv, &trace_csv_string(report))?;
    let mut summary = serde_json::to_string_pretty(report).expect("report serializes");
    summary.push('\n');
    write_file(&paths.summary_json, &summary)?;
    write_file(&paths.gantt_csv, &gantt_csv_string(report))?;
    write_file(&paths.opp_log_csv, &opp_log_csv_string(report))?;
    Ok(paths)
}

pub const SWEEP_HEADER: &str = "rate,scheduler,avg_exec_time_us,throughput,energy_mj";

pub fn sweep_csv_string(result: &SweepResult) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in &result.rows {
        let avg = r.avg_exec_time_us.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.rate_jobs_per_ms, r.scheduler, avg, r.throughput_jobs_per_ms, r.energy_mj
        );
    }
    s
}

pub fn write_sweep_csv(result: &SweepResult, path: &Path) -> Result<(), ReportError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)
            .map_err(|source| ReportError::Io { path: dir.display().to_string(), source })?;
    }
    write_file(path, &sweep_csv_string(result))
}

/// Reads a sweep CSV back; inverse of [`write_sweep_csv`].
pub fn read_sweep_csv(path: &Path) -> Result<SweepResult, ReportError> {
    let text = fs::read_to_string(path)
        .map_err(|source| ReportError::Io { path: path.display().to_string(), source })?;
    parse_sweep_csv(&text, &path.display().to_string())
}

pub fn parse_sweep_csv(text: &str, origin: &str) -> Result<SweepResult, ReportError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != SWEEP_HEADER {
                return Err(ReportError::Parse {
                    path: origin.to_string(),
                    line: 1,
                    message: format!("unexpected header {line:?}"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(ReportError::Parse {
                path: origin.to_string(),
                line: i + 1,
                message: format!("expected 5 fields, got {}", parts.len()),
            });
        }
        let parse_f64 = |s: &str, what: &str| -> Result<f64, ReportError> {
            s.parse().map_err(|_| ReportError::Parse {
                path: origin.to_string(),
                line: i + 1,
                message: format!("bad {what} {s:?}"),
            })
        };
        rows.push(SweepRow {
            rate_jobs_per_ms: parse_f64(parts[0], "rate")?,
            scheduler: parts[1].to_string(),
            avg_exec_time_us: if parts[2].is_empty() {
                None
            } else {
                Some(parse_f64(parts[2], "avg")?)
            },
            throughput_jobs_per_ms: parse_f64(parts[3], "throughput")?,
            energy_mj: parse_f64(parts[4], "energy")?,
        });
    }
    Ok(SweepResult { rows })
}
