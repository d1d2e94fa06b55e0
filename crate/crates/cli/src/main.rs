//! socsim: simulate task scheduling and power management on heterogeneous
//! SoCs.
//!
//! Exit codes: 0 success, 2 validation/configuration problem, 3 simulation
//! deadlock, 1 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use socsim_core::kernel::{run, RunOptions, SimError};
use socsim_core::model::{
    app_to_json, builtin_wifi_soc, load_app, load_soc, soc_to_json, validate_app, validate_soc,
    AppGraph, ConfigError, ResourceDb,
};
use socsim_core::oracle::{optimal_single_job, OracleError};
use socsim_core::power::{GovernorConfig, GovernorPolicy};
use socsim_core::report::{
    summarize, sweep, write_outputs, write_sweep_csv, SchedulerChoice, SimReport, SweepConfig,
    SweepError,
};
use socsim_core::sched::{load_table, table_to_json, StaticTable, TableScheduler};
use socsim_core::units::SimTime;
use socsim_core::workload::{
    builtin_wifi_tx_with_volume, load_workload, ArrivalDistribution, ArrivalPlan,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_DEADLOCK: u8 = 3;
const EXIT_INTERNAL: u8 = 1;

#[derive(Parser)]
#[command(
    name = "socsim",
    version,
    about = "Discrete-event simulator for task scheduling and DVFS on heterogeneous SoCs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one simulation and write trace/summary/gantt/opp-log files.
    Simulate(SimulateArgs),
    /// Run a (scheduler x injection-rate x seed) grid and write a sweep CSV.
    Sweep(SweepArgs),
    /// Exhaustively search the optimal single-job schedule and write it as
    /// a static table file.
    Oracle(OracleArgs),
    /// Validate SoC/app/table files (or dump the built-in assets).
    Validate(ValidateArgs),
}

#[derive(Args, Clone)]
struct InputArgs {
    /// SoC description file, or the built-in name "wifi_soc".
    #[arg(long, default_value = "wifi_soc")]
    soc: String,
    /// Application file, or the built-in name "wifi_tx".
    #[arg(long, default_value = "wifi_tx")]
    app: String,
    /// Data volume (bytes) on every edge of the built-in app; file-defined
    /// apps carry their own volumes.
    #[arg(long, default_value_t = 0)]
    edge_volume: u64,
}

#[derive(Args, Clone)]
struct GovernorArgs {
    /// DVFS policy applied per frequency domain.
    #[arg(long, value_enum, default_value_t = PolicyArg::Performance)]
    governor: PolicyArg,
    /// Governor sampling period, microseconds.
    #[arg(long, default_value_t = 100)]
    period: u64,
    /// Ondemand up-threshold (busy fraction).
    #[arg(long, default_value_t = 0.8)]
    up: f64,
    /// Ondemand down-threshold (busy fraction).
    #[arg(long, default_value_t = 0.3)]
    down: f64,
}

impl GovernorArgs {
    fn config(&self) -> GovernorConfig {
        GovernorConfig {
            policy: self.governor.into(),
            period: SimTime::from_us(self.period),
            up_threshold: self.up,
            down_threshold: self.down,
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum PolicyArg {
    Performance,
    Powersave,
    Ondemand,
}

impl From<PolicyArg> for GovernorPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Performance => GovernorPolicy::Performance,
            PolicyArg::Powersave => GovernorPolicy::Powersave,
            PolicyArg::Ondemand => GovernorPolicy::Ondemand,
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum DistArg {
    Exponential,
    Deterministic,
}

impl From<DistArg> for ArrivalDistribution {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::Exponential => ArrivalDistribution::Exponential,
            DistArg::Deterministic => ArrivalDistribution::Deterministic,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    inputs: InputArgs,
    /// Scheduler: met, etf, or table.
    #[arg(long, default_value = "etf")]
    sched: String,
    /// Static table file (required with --sched table).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Job injection rate, jobs per millisecond.
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    /// Injection horizon, microseconds.
    #[arg(long, default_value_t = 100_000)]
    duration: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = DistArg::Exponential)]
    dist: DistArg,
    /// Workload file overriding app/dist/rate/duration/seed.
    #[arg(long)]
    workload: Option<PathBuf>,
    #[command(flatten)]
    governor: GovernorArgs,
    /// Warm-up fraction of the horizon excluded from latency averages.
    #[arg(long, default_value_t = 0.1)]
    warmup: f64,
    /// Hard stop, microseconds of simulated time.
    #[arg(long)]
    max_time: Option<u64>,
    /// Output directory (or set SOCSIM_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    inputs: InputArgs,
    /// Comma list of schedulers, e.g. "met,etf,table".
    #[arg(long, default_value = "met,etf")]
    sched: String,
    /// Static table file (required when the list contains "table").
    #[arg(long)]
    table: Option<PathBuf>,
    /// Rates as a comma list ("1,2,5") or inclusive range "start:stop:step".
    #[arg(long)]
    rates: String,
    /// Injection horizon per cell, microseconds.
    #[arg(long, default_value_t = 20_000)]
    duration: u64,
    /// Comma list of seeds; every cell is averaged over them.
    #[arg(long, default_value = "1,2,3,4,5")]
    seeds: String,
    #[arg(long, value_enum, default_value_t = DistArg::Exponential)]
    dist: DistArg,
    #[command(flatten)]
    governor: GovernorArgs,
    #[arg(long, default_value_t = 0.1)]
    warmup: f64,
    /// Parallel worker threads for sweep cells (output is identical for
    /// any value).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    inputs: InputArgs,
    /// Where to write the static table file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// SoC description file or "wifi_soc".
    #[arg(long)]
    soc: Option<String>,
    /// Application file or "wifi_tx" (validated against --soc).
    #[arg(long)]
    app: Option<String>,
    /// Static table file (validated against --app and --soc).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Write the built-in SoC and app files into this directory for editing.
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    edge_volume: u64,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError { code: EXIT_CONFIG, message: message.into() }
    }
    fn internal(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INTERNAL, message: message.into() }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::config(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        let code = match e {
            SimError::Deadlock { .. } => EXIT_DEADLOCK,
            SimError::Invalid { .. } | SimError::Config(_) => EXIT_CONFIG,
            _ => EXIT_INTERNAL,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        let code = match &e {
            SweepError::Cell { source: SimError::Deadlock { .. }, .. } => EXIT_DEADLOCK,
            SweepError::Cell { source: SimError::Invalid { .. } | SimError::Config(_), .. }
            | SweepError::Table(_)
            | SweepError::EmptyGrid => EXIT_CONFIG,
            SweepError::Cell { .. } => EXIT_INTERNAL,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Sim(inner) => inner.into(),
            other => CliError::config(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Oracle(args) => cmd_oracle(args),
        Cmd::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("socsim: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn load_soc_arg(name: &str) -> Result<ResourceDb, CliError> {
    if name == "wifi_soc" {
        Ok(builtin_wifi_soc())
    } else {
        Ok(load_soc(Path::new(name))?)
    }
}

fn load_app_arg(name: &str, edge_volume: u64) -> Result<AppGraph, CliError> {
    if name == "wifi_tx" {
        Ok(builtin_wifi_tx_with_volume(edge_volume))
    } else {
        Ok(load_app(Path::new(name))?)
    }
}

fn load_inputs(inputs: &InputArgs) -> Result<(ResourceDb, AppGraph), CliError> {
    let db = load_soc_arg(&inputs.soc)?;
    let app = load_app_arg(&inputs.app, inputs.edge_volume)?;
    let mut violations = validate_soc(&db);
    violations.extend(validate_app(&app, &db));
    if violations.is_empty() {
        Ok((db, app))
    } else {
        let lines: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
        Err(CliError::config(format!("validation failed:\n{}", lines.join("\n"))))
    }
}

fn out_dir(flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
    flag.or_else(|| std::env::var_os("SOCSIM_OUT").map(PathBuf::from)).ok_or_else(|| {
        CliError::config("no output directory: pass --out or set SOCSIM_OUT")
    })
}

fn scheduler_choice(
    name: &str,
    table: Option<&PathBuf>,
    app: &AppGraph,
    db: &ResourceDb,
) -> Result<SchedulerChoice, CliError> {
    let choice = match name {
        "met" => SchedulerChoice::Met,
        "etf" => SchedulerChoice::Etf,
        "table" => {
            let path = table.ok_or_else(|| {
                CliError::config("--sched table requires --table <FILE>")
            })?;
            SchedulerChoice::Table(load_table(path)?)
        }
        other => {
            return Err(CliError::config(format!(
                "unknown scheduler \"{other}\" (expected met, etf, or table)"
            )))
        }
    };
    if let SchedulerChoice::Table(t) = &choice {
        TableScheduler::new(t, app, db).map_err(|e| CliError::config(e.to_string()))?;
    }
    Ok(choice)
}

fn parse_rates(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: &str| CliError::config(format!("bad --rates \"{spec}\": {msg}"));
    let parse = |s: &str| -> Result<f64, CliError> {
        s.trim().parse::<f64>().map_err(|_| bad(&format!("not a number: {s:?}")))
    };
    let rates: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("range form is start:stop:step"));
        }
        let (start, stop, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if step <= 0.0 || stop < start {
            return Err(bad("need step > 0 and stop >= start"));
        }
        let mut out = Vec::new();
        let mut k = 0u32;
        loop {
            let r = start + step * k as f64;
            if r > stop + 1e-9 {
                break;
            }
            out.push(r);
            k += 1;
        }
        out
    } else {
        spec.split(',').map(parse).collect::<Result<_, _>>()?
    };
    if rates.is_empty() || rates.iter().any(|&r| r <= 0.0) {
        return Err(bad("rates must be positive"));
    }
    Ok(rates)
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, CliError> {
    let seeds: Result<Vec<u64>, _> = spec.split(',').map(|s| s.trim().parse::<u64>()).collect();
    match seeds {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::config(format!("bad --seeds \"{spec}\": expected a comma list"))),
    }
}

fn print_summary(report: &SimReport) {
    println!("scheduler: {}", report.scheduler);
    println!(
        "jobs: injected {}, completed {}, in flight {}",
        report.jobs_injected, report.jobs_completed, report.jobs_in_flight
    );
    match report.avg_job_exec_time_us {
        Some(avg) => println!("avg job exec time: {avg:.3} us"),
        None => println!("avg job exec time: n/a (no jobs completed after warm-up)"),
    }
    println!("throughput: {:.4} jobs/ms", report.throughput_jobs_per_ms);
    println!("energy: {:.6} mJ", report.energy_total_mj);
    for d in &report.domains {
        println!("peak temp [{}]: {:.2} K", d.domain, d.peak_temp_k);
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let mut inputs = args.inputs.clone();
    let mut dist: ArrivalDistribution = args.dist.into();
    let mut rate = args.rate;
    let mut duration = args.duration;
    let mut seed = args.seed;
    if let Some(path) = &args.workload {
        let w = load_workload(path)?;
        inputs.app = w.app.clone();
        dist = w.distribution;
        rate = w.rate_jobs_per_ms;
        duration = w.duration_us;
        seed = w.seed;
    }
    let (db, app) = load_inputs(&inputs)?;
    let choice = scheduler_choice(&args.sched, args.table.as_ref(), &app, &db)?;
    let dir = out_dir(args.out)?;
    let plan = ArrivalPlan {
        distribution: dist,
        rate_jobs_per_ms: rate,
        duration: SimTime::from_us(duration),
        seed,
    };
    let options = RunOptions {
        max_time: args.max_time.map(SimTime::from_us),
        warmup_frac: args.warmup,
    };
    let mut scheduler =
        choice.build(&app, &db).map_err(|e| CliError::config(e.to_string()))?;
    let outcome = run(&db, &app, &plan, scheduler.as_mut(), &args.governor.config(), &options)?;
    let report = summarize(&outcome);
    let paths = write_outputs(&report, &dir).map_err(|e| CliError::internal(e.to_string()))?;
    print_summary(&report);
    println!(
        "wrote {} {} {} {}",
        paths.trace_csv.display(),
        paths.summary_json.display(),
        paths.gantt_csv.display(),
        paths.opp_log_csv.display()
    );
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let (db, app) = load_inputs(&args.inputs)?;
    let mut choices = Vec::new();
    for name in args.sched.split(',') {
        choices.push(scheduler_choice(name.trim(), args.table.as_ref(), &app, &db)?);
    }
    let dir = out_dir(args.out)?;
    let cfg = SweepConfig {
        rates_jobs_per_ms: parse_rates(&args.rates)?,
        seeds: parse_seeds(&args.seeds)?,
        duration: SimTime::from_us(args.duration),
        distribution: args.dist.into(),
        governor: args.governor.config(),
        options: RunOptions { max_time: None, warmup_frac: args.warmup },
        threads: args.jobs.max(1),
    };
    let result = sweep(&db, &app, &choices, &cfg)?;
    let path = dir.join("sweep.csv");
    write_sweep_csv(&result, &path).map_err(|e| CliError::internal(e.to_string()))?;
    println!("wrote {} ({} rows)", path.display(), result.rows.len());
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<(), CliError> {
    let (db, app) = load_inputs(&args.inputs)?;
    let result = optimal_single_job(&app, &db, db.comm)?;
    if let Some(dir) = args.out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::internal(format!("{}: {e}", dir.display())))?;
        }
    }
    let mut text = table_to_json(&result.table);
    text.push('\n');
    std::fs::write(&args.out, text)
        .map_err(|e| CliError::internal(format!("{}: {e}", args.out.display())))?;
    println!(
        "makespan: {} us ({} assignments explored)",
        result.makespan.format_us(),
        result.explored
    );
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    if let Some(dir) = &args.dump {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::internal(format!("{}: {e}", dir.display())))?;
        let soc_path = dir.join("wifi_soc.soc.json");
        let app_path = dir.join("wifi_tx.app.json");
        std::fs::write(&soc_path, soc_to_json(&builtin_wifi_soc()) + "\n")
            .map_err(|e| CliError::internal(format!("{}: {e}", soc_path.display())))?;
        std::fs::write(&app_path, app_to_json(&builtin_wifi_tx_with_volume(args.edge_volume)) + "\n")
            .map_err(|e| CliError::internal(format!("{}: {e}", app_path.display())))?;
        println!("wrote {} and {}", soc_path.display(), app_path.display());
    }
    let mut violations = Vec::new();
    let db = match &args.soc {
        Some(name) => {
            let db = load_soc_arg(name)?;
            violations.extend(validate_soc(&db));
            Some(db)
        }
        None => None,
    };
    let app = match &args.app {
        Some(name) => {
            let app = load_app_arg(name, args.edge_volume)?;
            match &db {
                Some(db) => violations.extend(validate_app(&app, db)),
                None => {
                    return Err(CliError::config("--app requires --soc to validate against"))
                }
            }
            Some(app)
        }
        None => None,
    };
    if let Some(path) = &args.table {
        let table: StaticTable = load_table(path)?;
        match (&app, &db) {
            (Some(app), Some(db)) => {
                if let Err(e) = TableScheduler::new(&table, app, db) {
                    violations.push(socsim_core::model::Violation {
                        subject: path.display().to_string(),
                        message: e.to_string(),
                    });
                }
            }
            _ => return Err(CliError::config("--table requires --soc and --app")),
        }
    }
    if violations.is_empty() {
        if args.soc.is_some() || args.app.is_some() || args.table.is_some() {
            println!("ok");
        }
        Ok(())
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
        Err(CliError::config(format!("{} violation(s)", violations.len())))
    }
}
