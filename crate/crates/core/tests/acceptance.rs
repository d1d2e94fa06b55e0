//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured numbers (run with `--nocapture` to see
//! them). Every tolerance is pinned in code.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use socsim_core::kernel::{run, run_single_job, run_with_arrivals, RunOptions};
use socsim_core::model::{builtin_wifi_soc, AppGraph, PeKind, PeType, ResourceDb, TaskDef};
use socsim_core::oracle::{optimal_single_job, single_job_makespan, verify_table};
use socsim_core::power::{GovernorConfig, GovernorPolicy, Opp, OppTable};
use socsim_core::report::{
    summarize, sweep, sweep_csv_string, trace_csv_string, SchedulerChoice, SweepConfig,
    SweepResult,
};
use socsim_core::sched::{EtfScheduler, MetScheduler, TableScheduler};
use socsim_core::units::SimTime;
use socsim_core::workload::{
    builtin_wifi_tx, generate_arrivals, ArrivalDistribution, ArrivalPlan,
};

fn perf() -> GovernorConfig {
    GovernorConfig::default()
}

/// Criterion 1: on the reference SoC with the built-in six-stage pipeline,
/// zero communication cost, and reference frequency, the oracle, its table
/// replayed through the kernel, and ETF all achieve exactly the makespan an
/// independent exhaustive enumeration predicts (42 us).
#[test]
fn c1_single_job_optimal_makespan() {
    // independent oracle: chain + zero comm + at least one instance per
    // type means any type assignment serializes, so its makespan is the
    // plain sum of chosen latencies; enumerate all combinations
    let profiles: [&[u64]; 6] = [
        &[8, 22, 10],  // scramble+encode: accel / A7 / A15
        &[10, 4],      // interleave: A7 / A15
        &[15, 8],      // qpsk: A7 / A15
        &[5, 3],       // pilots: A7 / A15
        &[16, 296, 118], // inverse fft: accel / A7 / A15
        &[5, 3],       // crc: A7 / A15
    ];
    let mut best = u64::MAX;
    let mut combos = 0u64;
    let mut idx = [0usize; 6];
    'outer: loop {
        let total: u64 = (0..6).map(|t| profiles[t][idx[t]]).sum();
        best = best.min(total);
        combos += 1;
        let mut pos = 6;
        while pos > 0 {
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < profiles[pos].len() {
                continue 'outer;
            }
            idx[pos] = 0;
        }
        break;
    }
    assert_eq!(combos, 144);
    assert_eq!(best, 42);
    let expect = SimTime::from_us(best);

    let db = builtin_wifi_soc();
    let app = builtin_wifi_tx();
    assert_eq!(db.comm.latency, SimTime::ZERO, "built-in SoC is zero-comm");

    let oracle = optimal_single_job(&app, &db, db.comm).unwrap();
    assert_eq!(oracle.makespan, expect, "oracle");
    assert!(verify_table(&oracle, &app, &db), "table replay");
    let mut table = TableScheduler::new(&oracle.table, &app, &db).unwrap();
    assert_eq!(single_job_makespan(&app, &db, &mut table).unwrap(), expect, "table");
    assert_eq!(single_job_makespan(&app, &db, &mut EtfScheduler).unwrap(), expect, "etf");
    println!("ACCEPTANCE c1 single-job optimal makespan: PASS (42 us, 144 assignments)");
}

/// Criterion 2: sweeping injection rates reproduces the qualitative
/// scheduler ordering: all three within 5% at a near-zero-utilization
/// rate, and ETF at least as good as MET and the oracle table at every
/// rate where MET has saturated past twice the single-job makespan.
///
/// Rate grid derivation: under MET the four A15-bound stages cost
/// 4+8+3+3 = 18 us per job over 4 instances, so the MET bottleneck
/// saturates near 4/18 us ~ 222 jobs/ms; 240 jobs/ms is past saturation
/// while 1 job/ms keeps every resource below 2% utilization.
#[test]
fn c2_figure3_qualitative_ordering() {
    let db = builtin_wifi_soc();
    let app = builtin_wifi_tx();
    let oracle = optimal_single_job(&app, &db, db.comm).unwrap();
    let choices = [
        SchedulerChoice::Met,
        SchedulerChoice::Etf,
        SchedulerChoice::Table(oracle.table.clone()),
    ];
    let cfg = SweepConfig {
        rates_jobs_per_ms: vec![1.0, 4.0, 30.0, 120.0, 240.0],
        seeds: vec![1, 2, 3, 4, 5],
        duration: SimTime::from_us(8_000),
        distribution: ArrivalDistribution::Exponential,
        governor: perf(),
        options: RunOptions { max_time: None, warmup_frac: 0.1 },
        threads: 2,
    };
    let result = sweep(&db, &app, &choices, &cfg).unwrap();
    let avg = |sched: &str, rate: f64| -> f64 {
        result
            .rows
            .iter()
            .find(|r| r.scheduler == sched && r.rate_jobs_per_ms == rate)
            .and_then(|r| r.avg_exec_time_us)
            .unwrap_or_else(|| panic!("no avg for {sched}@{rate}"))
    };

    // (a) low-rate cell: pairwise within 5%
    let low = [avg("met", 1.0), avg("etf", 1.0), avg("table", 1.0)];
    let (lo, hi) = (low.iter().cloned().fold(f64::MAX, f64::min), low.iter().cloned().fold(0.0, f64::max));
    assert!(hi <= 1.05 * lo, "low-rate cells diverge: {low:?}");

    // (b) saturating cells: MET past 2x the single-job makespan
    let saturating: Vec<f64> = cfg
        .rates_jobs_per_ms
        .iter()
        .copied()
        .filter(|&r| avg("met", r) > 2.0 * 42.0)
        .collect();
    assert!(!saturating.is_empty(), "sweep never saturated MET");
    for &rate in &saturating {
        let (etf, met, table) = (avg("etf", rate), avg("met", rate), avg("table", rate));
        assert!(etf <= met, "rate {rate}: etf {etf} > met {met}");
        assert!(etf <= table, "rate {rate}: etf {etf} > table {table}");
    }
    println!(
        "ACCEPTANCE c2 qualitative ordering: PASS (low-rate spread {:.2}%, saturating rates {:?}, met@240 = {:.1} us)",
        (hi / lo - 1.0) * 100.0,
        saturating,
        avg("met", 240.0),
    );
}

/// Criterion 3: over 200 random small DAGs and SoCs, the oracle makespan
/// never exceeds ETF's, ETF's never exceeds MET's, and every oracle table
/// replays to its recorded makespan exactly.
///
/// KNOWN RED (etf <= met leg). EST-primary ETF commits the pair with the
/// minimum earliest start even when that placement executes far slower:
/// with more ready tasks than fast instances it spills onto a slow idle PE
/// in the same call, and with nonzero transfer costs it co-locates a task
/// with its predecessor to shave microseconds of communication at the
/// price of a much slower core. MET's no-fallback rule waits for the fast
/// type instead and wins those cases. Measured over 18000 random scenarios
/// across five latency/communication families, ETF loses to MET in
/// 6.7%-33.7% of single-job cases (worst ratio x14.7), so this inequality
/// cannot hold exactly over any non-degenerate random family; it is
/// asserted regardless. The two legs that do hold are guarded separately
/// by `c3_supplement_oracle_dominance_robust_legs`, so this expected
/// failure cannot mask a regression in them.
#[test]
fn c3_oracle_dominance_random_dags() {
    let (violations, explored_total) = dominance_census();
    if violations.is_empty() {
        println!(
            "ACCEPTANCE c3 oracle dominance: PASS (200 DAGs, {explored_total} assignments searched)"
        );
    }
    assert!(
        violations.is_empty(),
        "ACCEPTANCE c3 oracle dominance: FAIL — etf <= met violated in {}/200 cases \
         (oracle <= etf, oracle <= met, and exact table replay held in all 200); \
         EST-primary ETF spills onto slow idle PEs and co-locates past small transfer \
         costs where MET waits for the fast type. First violations: {}",
        violations.len(),
        violations[..violations.len().min(3)].join("; ")
    );
}

/// The robust legs of the dominance suite, kept green independently of the
/// known ETF-vs-MET anomaly: the oracle never loses to either built-in
/// scheduler, and its table always replays to the recorded makespan.
#[test]
fn c3_supplement_oracle_dominance_robust_legs() {
    let (violations, explored_total) = dominance_census();
    println!(
        "ACCEPTANCE c3-supplement oracle dominance robust legs: PASS \
         (200 DAGs, {explored_total} assignments searched, {} known etf>met anomalies)",
        violations.len()
    );
}

/// Shared 200-case census: asserts oracle <= etf, oracle <= met, and exact
/// table replay on every case; returns the etf>met violations and the
/// total number of assignments the oracle explored.
fn dominance_census() -> (Vec<String>, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut violations = Vec::new();
    let mut explored_total = 0u64;
    for case in 0..200 {
        let (db, app) = common::random_case(&mut rng, 6);
        let oracle = optimal_single_job(&app, &db, db.comm)
            .unwrap_or_else(|e| panic!("case {case}: oracle failed: {e}"));
        let etf = single_job_makespan(&app, &db, &mut EtfScheduler).unwrap();
        let met = single_job_makespan(&app, &db, &mut MetScheduler).unwrap();
        assert!(
            oracle.makespan <= etf,
            "case {case}: oracle {} > etf {etf}",
            oracle.makespan
        );
        assert!(
            oracle.makespan <= met,
            "case {case}: oracle {} > met {met}",
            oracle.makespan
        );
        assert!(verify_table(&oracle, &app, &db), "case {case}: table replay diverged");
        if etf > met {
            violations.push(format!("case {case}: etf {etf} > met {met}"));
        }
        explored_total += oracle.explored;
    }
    (violations, explored_total)
}

/// Criterion 4: identical configuration and seed replays to a byte-identical
/// trace CSV, and sweep CSVs do not depend on worker-thread count.
#[test]
fn c4_determinism() {
    let db = builtin_wifi_soc();
    let app = builtin_wifi_tx();
    let plan = ArrivalPlan {
        distribution: ArrivalDistribution::Exponential,
        rate_jobs_per_ms: 80.0,
        duration: SimTime::from_us(20_000),
        seed: 99,
    };
    let gov = GovernorConfig { policy: GovernorPolicy::Ondemand, ..Default::default() };
    let csv = |_| {
        let out =
            run(&db, &app, &plan, &mut EtfScheduler, &gov, &RunOptions::default()).unwrap();
        trace_csv_string(&summarize(&out))
    };
    let (a, b) = (csv(()), csv(()));
    assert!(!a.is_empty() && a == b, "trace CSVs differ between identical runs");

    let cfg = SweepConfig {
        rates_jobs_per_ms: vec![2.0, 60.0],
        seeds: vec![1, 2, 3],
        duration: SimTime::from_us(5_000),
        distribution: ArrivalDistribution::Exponential,
        governor: perf(),
        options: RunOptions::default(),
        threads: 1,
    };
    let choices = [SchedulerChoice::Met, SchedulerChoice::Etf];
    let serial: SweepResult = sweep(&db, &app, &choices, &cfg).unwrap();
    let parallel = sweep(&db, &app, &choices, &SweepConfig { threads: 8, ..cfg }).unwrap();
    assert_eq!(sweep_csv_string(&serial), sweep_csv_string(&parallel));
    println!("ACCEPTANCE c4 determinism: PASS ({} trace bytes, sweep serial == 8 threads)", a.len());
}

/// Criterion 5: at a rate keeping the bottleneck below 50% utilization
/// (50 jobs/ms: MET-style placement loads the A15 cluster at
/// 50 x 18us / 4 / 1000us = 22.5%), long-run throughput matches the
/// injection rate within 2%, and per-PE trace intervals are disjoint.
#[test]
fn c5_queueing_sanity() {
    let db = builtin_wifi_soc();
    let app = builtin_wifi_tx();
    let rate = 50.0;
    let plan = ArrivalPlan {
        distribution: ArrivalDistribution::Exponential,
        rate_jobs_per_ms: rate,
        duration: SimTime::from_us(400_000),
        seed: 7,
    };
    let out = run(&db, &app, &plan, &mut EtfScheduler, &perf(), &RunOptions::default()).unwrap();
    let report = summarize(&out);
    assert_eq!(report.jobs_completed, report.jobs_injected, "low load drains fully");
    let rel = (report.throughput_jobs_per_ms - rate).abs() / rate;
    assert!(rel <= 0.02, "throughput {} vs rate {rate} ({:.3}%)", report.throughput_jobs_per_ms, rel * 100.0);
    common::check_trace(&report, &db, &app);
    println!(
        "ACCEPTANCE c5 queueing sanity: PASS (throughput {:.3} jobs/ms vs rate {rate}, {:.3}% off, {} trace rows disjoint)",
        report.throughput_jobs_per_ms,
        rel * 100.0,
        report.trace.len()
    );
}

/// Criterion 6: reported per-PE energy is reproduced exactly (to the
/// femtojoule) by independently re-integrating the trace plus the OPP log,
/// and an idle-only run of duration D reports exactly static_power x D.
#[test]
fn c6_energy_accounting() {
    let db = builtin_wifi_soc();
    let app = builtin_wifi_tx();
    // busy run under ondemand so the OPP trajectory is non-trivial
    let plan = ArrivalPlan {
        distribution: ArrivalDistribution::Exponential,
        rate_jobs_per_ms: 40.0,
        duration: SimTime::from_us(30_000),
        seed: 11,
    };
    let gov = GovernorConfig { policy: GovernorPolicy::Ondemand, ..Default::default() };
    let out = run(&db, &app, &plan, &mut EtfScheduler, &gov, &RunOptions::default()).unwrap();
    let report = summarize(&out);
    let independent = common::reintegrate_energy(&report, &db, out.horizon);
    assert_eq!(report.energy_fj, independent, "re-integration mismatch");

    // idle-only run: static power x duration, exactly
    let duration = SimTime::from_us(12_345);
    let idle = run_with_arrivals(
        &db,
        &app,
        &[],
        duration,
        &mut EtfScheduler,
        &perf(),
        &RunOptions::default(),
    )
    .unwrap();
    for (flat, id) in db.pe_ids().into_iter().enumerate() {
        let table = db.opp_table_of_type(id.pe_type);
        let static_uw = table.opps[table.highest_index()].static_power_uw;
        assert_eq!(
            idle.energy[flat].fj(),
            static_uw as u128 * duration.ns() as u128,
            "idle energy of {}",
            idle.pe_names[flat]
        );
    }
    println!(
        "ACCEPTANCE c6 energy accounting: PASS (exact re-integration over {} trace rows + {} OPP changes; idle run exact)",
        report.trace.len(),
        report.opp_log.len()
    );
}

/// Criterion 7: for a single job, makespan(performance) <=
/// makespan(ondemand) <= makespan(powersave); and a busy ondemand domain
/// reaches its top OPP within one governor period.
#[test]
fn c7_governor_monotonicity() {
    let db = builtin_wifi_soc();
    let app = builtin_wifi_tx();
    let ms = |policy| {
        let gov = GovernorConfig { policy, ..Default::default() };
        run_single_job(&db, &app, &mut EtfScheduler, &gov)
            .unwrap()
            .job_makespan(0)
            .unwrap()
    };
    let (p, o, s) = (
        ms(GovernorPolicy::Performance),
        ms(GovernorPolicy::Ondemand),
        ms(GovernorPolicy::Powersave),
    );
    assert_eq!(p, SimTime::from_us(42));
    assert!(p <= o && o <= s, "expected {p} <= {o} <= {s}");

    // saturate the big cluster from t=0; the first tick must jump to 2000 MHz
    let gov = GovernorConfig {
        policy: GovernorPolicy::Ondemand,
        period: SimTime::from_us(100),
        up_threshold: 0.5,
        down_threshold: 0.1,
    };
    let plan = ArrivalPlan {
        distribution: ArrivalDistribution::Deterministic,
        rate_jobs_per_ms: 100.0,
        duration: SimTime::from_us(2_000),
        seed: 0,
    };
    let out = run(&db, &app, &plan, &mut EtfScheduler, &gov, &RunOptions::default()).unwrap();
    let report = summarize(&out);
    let hit = report
        .opp_log
        .iter()
        .find(|c| c.domain == "big" && c.freq_mhz == 2000)
        .expect("big domain never reached 2000 MHz");
    assert!(hit.time <= gov.period, "top OPP reached at {} > one period", hit.time);
    println!(
        "ACCEPTANCE c7 governor monotonicity: PASS ({} <= {} <= {}; top OPP at {})",
        p, o, s, hit.time
    );
}

/// Criterion 8: a constant-power run of length 5 R C lands within 1% of the
/// analytic fixed point T_amb + P R.
#[test]
fn c8_thermal_fixed_point() {
    // one-core SoC, one task spanning exactly 5 RC (RC = 10 ms default)
    let db = ResourceDb {
        pe_types: vec![PeType {
            name: "core".to_string(),
            kind: PeKind::GeneralPurpose,
            count: 1,
            freq_domain: "d".to_string(),
        }],
        comm: socsim_core::kernel::CommParams {
            latency: SimTime::ZERO,
            bandwidth_bytes_per_us: 1000.0,
        },
        opp_tables: [("d".to_string(), OppTable::new(vec![Opp::from_mw(1000, 1.0, 1800.0, 140.0)]))]
            .into(),
        thermal: Default::default(),
    };
    let rc_us = (db.thermal.r_k_per_w * db.thermal.c_j_per_k * 1e6) as u64;
    let app = AppGraph {
        name: "hot".to_string(),
        tasks: vec![TaskDef {
            name: "burn".to_string(),
            latency_profile: [("core".to_string(), SimTime::from_us(5 * rc_us))].into(),
        }],
        edges: vec![],
    };
    let out = run_single_job(&db, &app, &mut EtfScheduler, &perf()).unwrap();
    let power_w = (1800.0 + 140.0) * 1e-3;
    let target = db.thermal.t_amb_k + power_w * db.thermal.r_k_per_w;
    let peak = out.peak_temp_k[0];
    assert!(
        (peak - target).abs() <= 0.01 * target,
        "peak {peak} K vs fixed point {target} K"
    );
    println!("ACCEPTANCE c8 thermal fixed point: PASS (peak {peak:.3} K vs {target:.3} K)");
}

/// Criterion 9: the exponential generator at 5 jobs/ms over 1e6 us has a
/// sample-mean inter-arrival gap within 3 standard errors of 200 us.
#[test]
fn c9_statistical_arrivals() {
    let plan = ArrivalPlan {
        distribution: ArrivalDistribution::Exponential,
        rate_jobs_per_ms: 5.0,
        duration: SimTime::from_us(1_000_000),
        seed: 12345,
    };
    let times = generate_arrivals(&plan);
    let mut prev = SimTime::ZERO;
    let gaps: Vec<f64> = times
        .iter()
        .map(|&t| {
            let g = (t - prev).us_f64();
            prev = t;
            g
        })
        .collect();
    let n = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    let se = 200.0 / n.sqrt();
    assert!(
        (mean - 200.0).abs() <= 3.0 * se,
        "mean gap {mean} us, allowed 200 +/- {:.3}",
        3.0 * se
    );
    println!(
        "ACCEPTANCE c9 statistical arrivals: PASS (mean gap {mean:.3} us over {} jobs, 3se = {:.3})",
        times.len(),
        3.0 * se
    );
}
