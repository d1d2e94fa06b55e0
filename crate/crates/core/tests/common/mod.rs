//! Shared helpers for integration tests: a random scenario generator, an
//! independent trace-based energy integrator, and trace sanity checks.
//!
//! Each test binary compiles this module separately and uses a subset.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use socsim_core::kernel::CommParams;
use socsim_core::model::{AppGraph, Edge, PeKind, PeType, ResourceDb, TaskDef};
use socsim_core::power::{Opp, OppTable};
use socsim_core::report::{SimReport, TraceRow};
use socsim_core::units::SimTime;

/// A random small SoC (1-3 PE types, 1-3 instances each, possibly one
/// accelerator) and a random DAG (<= `max_tasks` tasks, edges only forward,
/// every task supported somewhere). Always passes validation.
pub fn random_case(rng: &mut ChaCha8Rng, max_tasks: usize) -> (ResourceDb, AppGraph) {
    let n_types = rng.random_range(1..=3usize);
    let mut pe_types = Vec::new();
    let mut opp_tables = BTreeMap::new();
    for t in 0..n_types {
        // at most one accelerator, never the only type
        let accel = t == n_types - 1 && n_types > 1 && rng.random_bool(0.4);
        let domain = format!("d{t}");
        let top = [600u32, 1000, 1400, 2000][rng.random_range(0..4)];
        let opps = if accel {
            vec![Opp::from_mw(top, 1.0, 150.0, 20.0)]
        } else {
            vec![
                Opp::from_mw(top / 2, 0.9, 200.0, 40.0),
                Opp::from_mw(top, 1.1, 500.0, 60.0),
            ]
        };
        opp_tables.insert(domain.clone(), OppTable::new(opps));
        pe_types.push(PeType {
            name: format!("pe{t}"),
            kind: if accel { PeKind::Accelerator } else { PeKind::GeneralPurpose },
            count: rng.random_range(1..=3usize),
            freq_domain: domain,
        });
    }
    let comm = CommParams {
        latency: SimTime::from_us(rng.random_range(0..=3u64)),
        bandwidth_bytes_per_us: rng.random_range(100..=2000) as f64,
    };
    let db = ResourceDb { pe_types, comm, opp_tables, thermal: Default::default() };

    let n_tasks = rng.random_range(1..=max_tasks);
    let tasks: Vec<TaskDef> = (0..n_tasks)
        .map(|i| {
            let mut profile = BTreeMap::new();
            loop {
                for t in 0..n_types {
                    if rng.random_bool(0.7) {
                        profile.insert(
                            format!("pe{t}"),
                            SimTime::from_us(rng.random_range(1..=300u64)),
                        );
                    }
                }
                if !profile.is_empty() {
                    break;
                }
            }
            TaskDef { name: format!("t{i}"), latency_profile: profile }
        })
        .collect();
    let mut edges = Vec::new();
    for dst in 1..n_tasks {
        for src in 0..dst {
            if rng.random_bool(0.4) {
                edges.push(Edge { src, dst, volume_bytes: rng.random_range(0..=4000u64) });
            }
        }
    }
    let app = AppGraph { name: "random".to_string(), tasks, edges };
    debug_assert!(socsim_core::model::validate_app(&app, &db).is_empty());
    (db, app)
}

fn pe_lane(row: &TraceRow) -> String {
    format!("{}#{}", row.pe_type, row.pe_index)
}

/// Per-PE execution intervals must be pairwise disjoint, ready times must
/// not exceed start times, and each row's length must equal the latency at
/// the frequency it recorded.
pub fn check_trace(report: &SimReport, db: &ResourceDb, app: &AppGraph) {
    let mut by_pe: BTreeMap<String, Vec<(SimTime, SimTime)>> = BTreeMap::new();
    for r in &report.trace {
        assert!(r.t_ready <= r.t_start, "ready after start: {r:?}");
        let task = &app.tasks[app.task_index(&r.task).unwrap()];
        let ti = db.type_index(&r.pe_type).unwrap();
        let expect = socsim_core::model::execution_time(
            task,
            &db.pe_types[ti],
            r.freq_mhz,
            db.opp_table_of_type(ti).ref_freq_mhz(),
        )
        .unwrap();
        assert_eq!(r.t_finish - r.t_start, expect, "latency mismatch: {r:?}");
        by_pe.entry(pe_lane(r)).or_default().push((r.t_start, r.t_finish));
    }
    for (pe, mut iv) in by_pe {
        iv.sort();
        for w in iv.windows(2) {
            assert!(w[0].1 <= w[1].0, "overlapping intervals on {pe}: {w:?}");
        }
    }
}

/// Independent energy integration from the trace and the OPP log alone:
/// busy rows at the power of the OPP they recorded, idle time at the static
/// power of whatever OPP the domain had in force. Returns femtojoules per
/// PE in canonical order.
pub fn reintegrate_energy(report: &SimReport, db: &ResourceDb, horizon: SimTime) -> Vec<u128> {
    let opp_by_freq = |domain: &str, freq: u32| -> &Opp {
        db.opp_tables[domain]
            .opps
            .iter()
            .find(|o| o.freq_mhz == freq)
            .expect("trace frequency exists in the OPP table")
    };
    db.pe_ids()
        .iter()
        .map(|&id| {
            let type_name = &db.pe_types[id.pe_type].name;
            let domain = &db.pe_types[id.pe_type].freq_domain;
            let mut busy: Vec<(u64, u64, u32)> = report
                .trace
                .iter()
                .filter(|r| &r.pe_type == type_name && r.pe_index == id.instance)
                .map(|r| (r.t_start.ns(), r.t_finish.ns(), r.freq_mhz))
                .collect();
            busy.sort();
            let mut fj: u128 = 0;
            for &(s, f, freq) in &busy {
                let opp = opp_by_freq(domain, freq);
                fj += (f - s) as u128 * (opp.dyn_power_uw + opp.static_power_uw) as u128;
            }
            // domain OPP trajectory: (time, freq) changes, then horizon
            let mut changes: Vec<(u64, u32)> = report
                .opp_log
                .iter()
                .filter(|c| &c.domain == domain)
                .map(|c| (c.time.ns(), c.freq_mhz))
                .collect();
            changes.sort();
            assert!(!changes.is_empty() && changes[0].0 == 0, "log starts at t=0");
            for (i, &(seg_start, freq)) in changes.iter().enumerate() {
                let seg_end =
                    changes.get(i + 1).map(|c| c.0).unwrap_or(horizon.ns()).min(horizon.ns());
                if seg_end <= seg_start {
                    continue;
                }
                let mut idle = seg_end - seg_start;
                for &(s, f, _) in &busy {
                    let o_start = s.max(seg_start);
                    let o_end = f.min(seg_end);
                    idle -= o_end.saturating_sub(o_start);
                }
                fj += idle as u128 * opp_by_freq(domain, freq).static_power_uw as u128;
            }
            fj
        })
        .collect()
}
