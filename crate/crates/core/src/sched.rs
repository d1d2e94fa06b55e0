//! Pluggable task schedulers and the three built-in policies.
//!
//! A scheduler sees only a [`SchedView`]: the current clock, the ordered
//! ready list (with each task's finished predecessors), and per-PE
//! idle/frequency state. It returns assignments of ready tasks onto idle
//! PEs; the kernel validates and dispatches them. Implementations must be
//! deterministic — replay determinism is a kernel contract.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{comm_latency, CommParams, TaskId};
use crate::model::{scale_latency, AppGraph, ConfigError, PeId, PeKind, ResourceDb};
use crate::units::SimTime;

/// A finished predecessor of a ready task: where and when its output
/// became available.
#[derive(Clone, Copy, Debug)]
pub struct PredDone {
    pub finish: SimTime,
    pub pe: PeId,
    pub volume_bytes: u64,
}

/// One entry of the ready list offered to a scheduler.
#[derive(Clone, Debug)]
pub struct ReadyTask {
    pub id: TaskId,
    /// Index into the application's task list.
    pub task_idx: usize,
    /// Position in the ready list (used for deterministic tie-breaking).
    pub pos: usize,
    pub preds: Vec<PredDone>,
}

/// Scheduler-visible state of one PE instance.
#[derive(Clone, Copy, Debug)]
pub struct PeView {
    pub id: PeId,
    /// Canonical flat index (type declaration order, then instance).
    pub flat: usize,
    pub idle: bool,
    pub kind: PeKind,
    /// Operating frequency the domain governor currently has in force.
    pub freq_mhz: u32,
    pub ref_freq_mhz: u32,
}

/// Read-only snapshot handed to a scheduler at a decision epoch.
#[derive(Debug)]
pub struct SchedView<'a> {
    pub clock: SimTime,
    pub comm: CommParams,
    pub pes: Vec<PeView>,
    pub ready: Vec<ReadyTask>,
    /// `profile[task_idx][type_idx]` = reference latency, None if unsupported.
    pub profile: &'a [Vec<Option<SimTime>>],
    pub task_names: &'a [String],
    /// Tasks dispatched so far per PE type (drives round-robin placement).
    pub dispatch_by_type: &'a [u64],
    /// Instance count per PE type.
    pub type_counts: &'a [usize],
}

impl SchedView<'_> {
    pub fn ref_latency(&self, task_idx: usize, type_idx: usize) -> Option<SimTime> {
        self.profile[task_idx][type_idx]
    }

    /// Execution time of a task on a PE at the frequency currently in force.
    pub fn exec_time(&self, task_idx: usize, pe: &PeView) -> Option<SimTime> {
        self.ref_latency(task_idx, pe.id.pe_type)
            .map(|lat| scale_latency(lat, pe.kind, pe.freq_mhz, pe.ref_freq_mhz))
    }

    /// Earliest start time of a ready task on a candidate PE: the clock, or
    /// later if predecessor data is still in flight toward that PE.
    pub fn est(&self, task: &ReadyTask, pe: &PeView) -> SimTime {
        let mut est = self.clock;
        for p in &task.preds {
            let arrive = p.finish + comm_latency(p.volume_bytes, p.pe, pe.id, &self.comm);
            est = est.max(arrive);
        }
        est
    }
}

/// A committed (task, PE) pair returned by a scheduler.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub task: TaskId,
    pub pe: PeId,
}

/// The plug-in scheduling interface.
///
/// Contract: assignments may reference only ready tasks and currently idle
/// PEs, at most one task per PE per call, and each task at most once. Tasks
/// left unassigned are re-offered at the next decision epoch.
pub trait Scheduler {
    fn name(&self) -> &str;
    fn schedule(&mut self, view: &SchedView<'_>) -> Vec<Assignment>;
}

// ---------------------------------------------------------------------------
// Minimum execution time
// ---------------------------------------------------------------------------

/// Minimum-execution-time scheduler: places each ready task only on its
/// fastest PE type (by reference latency), deliberately ignoring system
/// load. If no instance of that type is idle the task waits — MET never
/// falls back to a slower type.
#[derive(Clone, Copy, Debug, Default)]
pub struct MetScheduler;

impl Scheduler for MetScheduler {
    fn name(&self) -> &str {
        "met"
    }

    fn schedule(&mut self, view: &SchedView<'_>) -> Vec<Assignment> {
        let mut taken = vec![false; view.pes.len()];
        let mut out = Vec::new();
        for rt in &view.ready {
            let best_type = (0..view.type_counts.len())
                .filter_map(|ti| view.ref_latency(rt.task_idx, ti).map(|lat| (lat, ti)))
                .min();
            let Some((_, best)) = best_type else { continue };
            let slot = view
                .pes
                .iter()
                .find(|pe| pe.id.pe_type == best && pe.idle && !taken[pe.flat]);
            if let Some(pe) = slot {
                taken[pe.flat] = true;
                out.push(Assignment { task: rt.id, pe: pe.id });
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Earliest task first
// ---------------------------------------------------------------------------

/// Earliest-task-first scheduler: repeatedly commits the (ready task, idle
/// PE) pair with the smallest earliest-start time, accounting for
/// communication delay from predecessors. Ties break by smaller execution
/// time, then lower PE index, then earlier ready-list position.
#[derive(Clone, Copy, Debug, Default)]
pub struct EtfScheduler;

impl Scheduler for EtfScheduler {
    fn name(&self) -> &str {
        "etf"
    }

    fn schedule(&mut self, view: &SchedView<'_>) -> Vec<Assignment> {
        let mut taken = vec![false; view.pes.len()];
        let mut assigned = vec![false; view.ready.len()];
        let mut out = Vec::new();
        loop {
            let mut best: Option<((SimTime, SimTime, usize, usize), Assignment)> = None;
            for rt in view.ready.iter().filter(|rt| !assigned[rt.pos]) {
                for pe in view.pes.iter().filter(|pe| pe.idle && !taken[pe.flat]) {
                    let Some(exec) = view.exec_time(rt.task_idx, pe) else { continue };
                    let key = (view.est(rt, pe), exec, pe.flat, rt.pos);
                    if best.as_ref().is_none_or(|(k, _)| key < *k) {
                        best = Some((key, Assignment { task: rt.id, pe: pe.id }));
                    }
                }
            }
            let Some((key, assignment)) = best else { break };
            taken[key.2] = true;
            assigned[key.3] = true;
            out.push(assignment);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Static table
// ---------------------------------------------------------------------------

/// How table entries bind tasks to hardware.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableMode {
    /// Entries name exact PE instances, e.g. `"A15#2"`.
    Instance,
    /// Entries name PE types; instances are picked round-robin among idle
    /// ones, e.g. `"A15"`.
    TypeRr,
}

/// A stored offline schedule: task name -> PE reference, with an optional
/// priority order deciding which ready task is considered first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticTable {
    pub app: String,
    pub mode: TableMode,
    pub entries: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority: Option<Vec<String>>,
}

pub fn load_table(path: &Path) -> Result<StaticTable, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.display().to_string(),
        source,
    })
}

pub fn table_to_json(table: &StaticTable) -> String {
    serde_json::to_string_pretty(table).expect("table serialization cannot fail")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error("table is for app \"{table_app}\", not \"{app}\"")]
    WrongApp { table_app: String, app: String },
    #[error("no table entry for task \"{task}\"")]
    MissingEntry { task: String },
    #[error("table entry for unknown task \"{task}\"")]
    UnknownTask { task: String },
    #[error("task \"{task}\": invalid PE reference \"{pe_ref}\" ({reason})")]
    BadPeRef { task: String, pe_ref: String, reason: String },
    #[error("task \"{task}\" is not supported on \"{pe_ref}\"")]
    Unsupported { task: String, pe_ref: String },
    #[error("priority list must be a permutation of the app's task names")]
    BadPriority,
}

#[derive(Clone, Copy, Debug)]
enum PeRef {
    Instance(PeId),
    Type(usize),
}

/// Replays a [`StaticTable`]: each ready task goes to its designated PE
/// when that PE is idle and is deferred otherwise — no fallback.
#[derive(Clone, Debug)]
pub struct TableScheduler {
    entries: Vec<PeRef>,
    /// `rank[task_idx]` = consideration order; identity when no priority given.
    rank: Vec<usize>,
}

impl TableScheduler {
    pub fn new(table: &StaticTable, app: &AppGraph, db: &ResourceDb) -> Result<Self, TableError> {
        if table.app != app.name {
            return Err(TableError::WrongApp {
                table_app: table.app.clone(),
                app: app.name.clone(),
            });
        }
        for name in table.entries.keys() {
            if app.task_index(name).is_none() {
                return Err(TableError::UnknownTask { task: name.clone() });
            }
        }
        let mut entries = Vec::with_capacity(app.tasks.len());
        for task in &app.tasks {
            let pe_ref = table
                .entries
                .get(&task.name)
                .ok_or_else(|| TableError::MissingEntry { task: task.name.clone() })?;
            let parsed = parse_pe_ref(pe_ref, table.mode, db).map_err(|reason| {
                TableError::BadPeRef {
                    task: task.name.clone(),
                    pe_ref: pe_ref.clone(),
                    reason,
                }
            })?;
            let type_idx = match parsed {
                PeRef::Instance(id) => id.pe_type,
                PeRef::Type(t) => t,
            };
            if !task.latency_profile.contains_key(&db.pe_types[type_idx].name) {
                return Err(TableError::Unsupported {
                    task: task.name.clone(),
                    pe_ref: pe_ref.clone(),
                });
            }
            entries.push(parsed);
        }
        let rank = match &table.priority {
            None => (0..app.tasks.len()).collect(),
            Some(order) => {
                if order.len() != app.tasks.len() {
                    return Err(TableError::BadPriority);
                }
                let mut rank = vec![usize::MAX; app.tasks.len()];
                for (r, name) in order.iter().enumerate() {
                    let idx = app.task_index(name).ok_or(TableError::BadPriority)?;
                    if rank[idx] != usize::MAX {
                        return Err(TableError::BadPriority);
                    }
                    rank[idx] = r;
                }
                rank
            }
        };
        Ok(TableScheduler { entries, rank })
    }
}

fn parse_pe_ref(pe_ref: &str, mode: TableMode, db: &ResourceDb) -> Result<PeRef, String> {
    match (mode, pe_ref.split_once('#')) {
        (TableMode::Instance, Some((type_name, idx))) => {
            let pe_type = db
                .type_index(type_name)
                .ok_or_else(|| format!("unknown PE type \"{type_name}\""))?;
            let instance: usize =
                idx.parse().map_err(|_| format!("bad instance index \"{idx}\""))?;
            if instance >= db.pe_types[pe_type].count {
                return Err(format!(
                    "instance {instance} out of range (count {})",
                    db.pe_types[pe_type].count
                ));
            }
            Ok(PeRef::Instance(PeId { pe_type, instance }))
        }
        (TableMode::Instance, None) => Err("instance mode requires \"TYPE#index\"".to_string()),
        (TableMode::TypeRr, None) => db
            .type_index(pe_ref)
            .map(PeRef::Type)
            .ok_or_else(|| format!("unknown PE type \"{pe_ref}\"")),
        (TableMode::TypeRr, Some(_)) => {
            Err("type_rr mode takes a bare PE type name".to_string())
        }
    }
}

impl Scheduler for TableScheduler {
    fn name(&self) -> &str {
        "table"
    }

    fn schedule(&mut self, view: &SchedView<'_>) -> Vec<Assignment> {
        let mut order: Vec<&ReadyTask> = view.ready.iter().collect();
        order.sort_by_key(|rt| (self.rank[rt.task_idx], rt.id.job, rt.pos));
        let mut taken = vec![false; view.pes.len()];
        let mut rr_extra = vec![0u64; view.type_counts.len()];
        let mut out = Vec::new();
        for rt in order {
            match self.entries[rt.task_idx] {
                PeRef::Instance(id) => {
                    let pe = &view.pes[view
                        .pes
                        .iter()
                        .position(|p| p.id == id)
                        .expect("validated instance exists")];
                    if pe.idle && !taken[pe.flat] {
                        taken[pe.flat] = true;
                        out.push(Assignment { task: rt.id, pe: id });
                    }
                }
                PeRef::Type(t) => {
                    let count = view.type_counts[t];
                    let start = ((view.dispatch_by_type[t] + rr_extra[t]) % count as u64) as usize;
                    for k in 0..count {
                        let instance = (start + k) % count;
                        let id = PeId { pe_type: t, instance };
                        let pe = view.pes.iter().find(|p| p.id == id).expect("instance exists");
                        if pe.idle && !taken[pe.flat] {
                            taken[pe.flat] = true;
                            rr_extra[t] += 1;
                            out.push(Assignment { task: rt.id, pe: id });
                            break;
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_wifi_soc, ResolvedApp};
    use crate::workload::builtin_wifi_tx;

    fn pe_views(db: &ResourceDb, busy: &[(&str, usize)]) -> Vec<PeView> {
        db.pe_ids()
            .into_iter()
            .enumerate()
            .map(|(flat, id)| {
                let t = &db.pe_types[id.pe_type];
                let table = db.opp_table_of_type(id.pe_type);
                PeView {
                    id,
                    flat,
                    idle: !busy.iter().any(|&(name, i)| name == t.name && i == id.instance),
                    kind: t.kind,
                    freq_mhz: table.ref_freq_mhz(),
                    ref_freq_mhz: table.ref_freq_mhz(),
                }
            })
            .collect()
    }

    struct Fixture {
        db: ResourceDb,
        resolved: ResolvedApp,
        dispatch_by_type: Vec<u64>,
        type_counts: Vec<usize>,
    }

    impl Fixture {
        fn new() -> Self {
            let db = builtin_wifi_soc();
            let resolved = ResolvedApp::new(&builtin_wifi_tx(), &db).unwrap();
            let type_counts: Vec<usize> = db.pe_types.iter().map(|t| t.count).collect();
            let dispatch_by_type = vec![0; type_counts.len()];
            Fixture { db, resolved, dispatch_by_type, type_counts }
        }

        fn view<'a>(
            &'a self,
            clock: SimTime,
            comm: CommParams,
            pes: Vec<PeView>,
            ready: Vec<ReadyTask>,
        ) -> SchedView<'a> {
            SchedView {
                clock,
                comm,
                pes,
                ready,
                profile: &self.resolved.profile,
                task_names: &self.resolved.task_names,
                dispatch_by_type: &self.dispatch_by_type,
                type_counts: &self.type_counts,
            }
        }
    }

    fn ready(task_idx: usize, pos: usize, preds: Vec<PredDone>) -> ReadyTask {
        ReadyTask { id: TaskId { job: 0, task: task_idx }, task_idx, pos, preds }
    }

    fn zero_comm() -> CommParams {
        CommParams { latency: SimTime::ZERO, bandwidth_bytes_per_us: 1000.0 }
    }

    #[test]
    fn met_picks_fastest_type() {
        let f = Fixture::new();
        let ifft = f.resolved.task_names.iter().position(|n| n == "inverse_fft").unwrap();
        let view = f.view(SimTime::ZERO, zero_comm(), pe_views(&f.db, &[]), vec![ready(ifft, 0, vec![])]);
        let got = MetScheduler.schedule(&view);
        let fft_acc = f.db.type_index("fft_acc").unwrap();
        assert_eq!(got, vec![Assignment {
            task: TaskId { job: 0, task: ifft },
            pe: PeId { pe_type: fft_acc, instance: 0 },
        }]);
    }

    #[test]
    fn met_interleaver_goes_to_big_core() {
        let f = Fixture::new();
        let il = f.resolved.task_names.iter().position(|n| n == "interleaver").unwrap();
        let view = f.view(SimTime::ZERO, zero_comm(), pe_views(&f.db, &[]), vec![ready(il, 0, vec![])]);
        let got = MetScheduler.schedule(&view);
        let a15 = f.db.type_index("A15").unwrap();
        assert_eq!(got[0].pe, PeId { pe_type: a15, instance: 0 });
    }

    #[test]
    fn met_never_falls_back() {
        let f = Fixture::new();
        let ifft = f.resolved.task_names.iter().position(|n| n == "inverse_fft").unwrap();
        let ready_list: Vec<ReadyTask> = (0..5).map(|pos| ReadyTask {
            id: TaskId { job: pos, task: ifft },
            task_idx: ifft,
            pos,
            preds: vec![],
        }).collect();
        let view = f.view(SimTime::ZERO, zero_comm(), pe_views(&f.db, &[]), ready_list);
        let got = MetScheduler.schedule(&view);
        // four FFT accelerators, fifth task waits even though A15s are idle
        assert_eq!(got.len(), 4);
        let fft_acc = f.db.type_index("fft_acc").unwrap();
        assert!(got.iter().all(|a| a.pe.pe_type == fft_acc));
    }

    #[test]
    fn met_ignores_load_on_other_types() {
        let f = Fixture::new();
        let il = f.resolved.task_names.iter().position(|n| n == "interleaver").unwrap();
        let idle = f.view(SimTime::ZERO, zero_comm(), pe_views(&f.db, &[]), vec![ready(il, 0, vec![])]);
        let loaded = f.view(
            SimTime::ZERO,
            zero_comm(),
            pe_views(&f.db, &[("A7", 0), ("A7", 1), ("A7", 2), ("A7", 3), ("fft_acc", 0)]),
            vec![ready(il, 0, vec![])],
        );
        assert_eq!(MetScheduler.schedule(&idle), MetScheduler.schedule(&loaded));
    }

    #[test]
    fn etf_breaks_est_tie_by_exec_time() {
        let f = Fixture::new();
        let il = f.resolved.task_names.iter().position(|n| n == "interleaver").unwrap();
        let scr_acc = f.db.type_index("scrambler_acc").unwrap();
        let comm = CommParams { latency: SimTime::from_us(2), bandwidth_bytes_per_us: 1000.0 };
        let preds = vec![PredDone {
            finish: SimTime::from_us(8),
            pe: PeId { pe_type: scr_acc, instance: 0 },
            volume_bytes: 0,
        }];
        let view = f.view(SimTime::from_us(8), comm, pe_views(&f.db, &[]), vec![ready(il, 0, preds)]);
        let got = EtfScheduler.schedule(&view);
        // EST is 10 on every core; A15 wins on execution time (4 < 10)
        let a15 = f.db.type_index("A15").unwrap();
        assert_eq!(got, vec![Assignment {
            task: TaskId { job: 0, task: il },
            pe: PeId { pe_type: a15, instance: 0 },
        }]);
    }

    #[test]
    fn etf_drains_all_feasible_pairs() {
        let f = Fixture::new();
        let ifft = f.resolved.task_names.iter().position(|n| n == "inverse_fft").unwrap();
        let busy: Vec<(&str, usize)> = (1..4).map(|i| ("fft_acc", i)).collect();
        let ready_list: Vec<ReadyTask> = (0..2).map(|pos| ReadyTask {
            id: TaskId { job: pos, task: ifft },
            task_idx: ifft,
            pos,
            preds: vec![],
        }).collect();
        let view = f.view(SimTime::ZERO, zero_comm(), pe_views(&f.db, &busy), ready_list);
        let got = EtfScheduler.schedule(&view);
        assert_eq!(got.len(), 2);
        let fft_acc = f.db.type_index("fft_acc").unwrap();
        let a15 = f.db.type_index("A15").unwrap();
        assert_eq!(got[0].pe, PeId { pe_type: fft_acc, instance: 0 });
        assert_eq!(got[1].pe, PeId { pe_type: a15, instance: 0 });
    }

    #[test]
    fn etf_single_task_matches_met_on_empty_system() {
        let f = Fixture::new();
        for task_idx in 0..f.resolved.task_count() {
            let v1 = f.view(SimTime::ZERO, zero_comm(), pe_views(&f.db, &[]), vec![ready(task_idx, 0, vec![])]);
            let v2 = f.view(SimTime::ZERO, zero_comm(), pe_views(&f.db, &[]), vec![ready(task_idx, 0, vec![])]);
            assert_eq!(EtfScheduler.schedule(&v1), MetScheduler.schedule(&v2), "task {task_idx}");
        }
    }

    fn demo_table(f: &Fixture) -> StaticTable {
        StaticTable {
            app: "wifi_tx".to_string(),
            mode: TableMode::Instance,
            entries: f
                .resolved
                .task_names
                .iter()
                .map(|n| {
                    let pe = if n == "scrambler_encoder" {
                        "scrambler_acc#0"
                    } else if n == "inverse_fft" {
                        "fft_acc#0"
                    } else {
                        "A15#0"
                    };
                    (n.clone(), pe.to_string())
                })
                .collect(),
            priority: None,
        }
    }

    #[test]
    fn table_assigns_designated_idle_pe() {
        let f = Fixture::new();
        let app = builtin_wifi_tx();
        let mut sched = TableScheduler::new(&demo_table(&f), &app, &f.db).unwrap();
        let ifft = f.resolved.task_names.iter().position(|n| n == "inverse_fft").unwrap();
        let view = f.view(SimTime::ZERO, zero_comm(), pe_views(&f.db, &[]), vec![ready(ifft, 0, vec![])]);
        let got = sched.schedule(&view);
        let fft_acc = f.db.type_index("fft_acc").unwrap();
        assert_eq!(got, vec![Assignment {
            task: TaskId { job: 0, task: ifft },
            pe: PeId { pe_type: fft_acc, instance: 0 },
        }]);
    }

    #[test]
    fn table_defers_when_designated_pe_busy() {
        let f = Fixture::new();
        let app = builtin_wifi_tx();
        let mut sched = TableScheduler::new(&demo_table(&f), &app, &f.db).unwrap();
        let ifft = f.resolved.task_names.iter().position(|n| n == "inverse_fft").unwrap();
        let view = f.view(
            SimTime::ZERO,
            zero_comm(),
            pe_views(&f.db, &[("fft_acc", 0)]),
            vec![ready(ifft, 0, vec![])],
        );
        assert_eq!(sched.schedule(&view), vec![]);
    }

    #[test]
    fn table_missing_entry_is_an_error() {
        let f = Fixture::new();
        let app = builtin_wifi_tx();
        let mut table = demo_table(&f);
        table.entries.remove("crc");
        assert_eq!(
            TableScheduler::new(&table, &app, &f.db).unwrap_err(),
            TableError::MissingEntry { task: "crc".to_string() }
        );
    }

    #[test]
    fn table_round_robin_spreads_instances() {
        let f = Fixture::new();
        let app = builtin_wifi_tx();
        let table = StaticTable {
            app: "wifi_tx".to_string(),
            mode: TableMode::TypeRr,
            entries: f
                .resolved
                .task_names
                .iter()
                .map(|n| (n.clone(), "A15".to_string()))
                .collect(),
            priority: None,
        };
        let mut sched = TableScheduler::new(&table, &app, &f.db).unwrap();
        let il = f.resolved.task_names.iter().position(|n| n == "interleaver").unwrap();
        let qpsk = f.resolved.task_names.iter().position(|n| n == "qpsk_modulation").unwrap();
        let view = f.view(
            SimTime::ZERO,
            zero_comm(),
            pe_views(&f.db, &[]),
            vec![ready(il, 0, vec![]), ready(qpsk, 1, vec![])],
        );
        let got = sched.schedule(&view);
        assert_eq!(got.len(), 2);
        assert_ne!(got[0].pe.instance, got[1].pe.instance);
    }

    #[test]
    fn table_json_round_trip() {
        let f = Fixture::new();
        let table = demo_table(&f);
        let text = table_to_json(&table);
        let back: StaticTable = serde_json::from_str(&text).unwrap();
        assert_eq!(table, back);
    }
}
