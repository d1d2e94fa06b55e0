//! SoC resource database and application-graph domain types.
//!
//! A [`ResourceDb`] describes the simulated chip: its PE types, their
//! operating-point tables, the interconnect parameters, and the thermal
//! lump. An [`AppGraph`] is a DAG of tasks with per-PE-type reference
//! latencies. Both are immutable after construction and validated as data
//! (violations are returned, not raised), so a frontend can report every
//! problem at once.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::CommParams;
use crate::power::{Opp, OppTable, ThermalParams};
use crate::units::SimTime;

/// Whether a PE type is a frequency-scalable core or a fixed-clock block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeKind {
    GeneralPurpose,
    Accelerator,
}

/// One class of processing element and how many instances the SoC has.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeType {
    pub name: String,
    pub kind: PeKind,
    pub count: usize,
    /// Key into [`ResourceDb::opp_tables`]; the OPP table governing this type.
    pub freq_domain: String,
}

/// Identity of a single PE instance: (type index, instance index).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PeId {
    pub pe_type: usize,
    pub instance: usize,
}

/// One node of an application DAG.
///
/// `latency_profile` maps a PE type name to the task's reference latency at
/// that type's reference frequency; a missing entry means the task cannot
/// run on that type at all.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskDef {
    pub name: String,
    pub latency_profile: BTreeMap<String, SimTime>,
}

/// Directed dependency edge between two tasks of the same graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub volume_bytes: u64,
}

/// A DAG application: tasks plus dependency edges carrying data volumes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppGraph {
    pub name: String,
    pub tasks: Vec<TaskDef>,
    pub edges: Vec<Edge>,
}

impl AppGraph {
    pub fn task_index(&self, name: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.name == name)
    }

    /// Task indices with no predecessors.
    pub fn sources(&self) -> Vec<usize> {
        let mut has_pred = vec![false; self.tasks.len()];
        for e in &self.edges {
            if e.dst < self.tasks.len() {
                has_pred[e.dst] = true;
            }
        }
        (0..self.tasks.len()).filter(|&i| !has_pred[i]).collect()
    }

    /// Task indices with no successors.
    pub fn sinks(&self) -> Vec<usize> {
        let mut has_succ = vec![false; self.tasks.len()];
        for e in &self.edges {
            if e.src < self.tasks.len() {
                has_succ[e.src] = true;
            }
        }
        (0..self.tasks.len()).filter(|&i| !has_succ[i]).collect()
    }
}

/// The simulated SoC: PE types, per-domain OPP tables, interconnect and
/// thermal parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceDb {
    pub pe_types: Vec<PeType>,
    pub comm: CommParams,
    pub opp_tables: BTreeMap<String, OppTable>,
    #[serde(default)]
    pub thermal: ThermalParams,
}

impl ResourceDb {
    pub fn pe_count(&self) -> usize {
        self.pe_types.iter().map(|t| t.count).sum()
    }

    /// All PE instances in deterministic order (type declaration order,
    /// then instance index). This is the canonical "PE index" order used
    /// by schedulers and reports.
    pub fn pe_ids(&self) -> Vec<PeId> {
        self.pe_types
            .iter()
            .enumerate()
            .flat_map(|(ti, t)| (0..t.count).map(move |i| PeId { pe_type: ti, instance: i }))
            .collect()
    }

    pub fn flat_index(&self, pe: PeId) -> usize {
        self.pe_types[..pe.pe_type]
            .iter()
            .map(|t| t.count)
            .sum::<usize>()
            + pe.instance
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.pe_types.iter().position(|t| t.name == name)
    }

    /// Frequency domains in deterministic (sorted) order.
    pub fn domains(&self) -> Vec<&str> {
        self.opp_tables.keys().map(|s| s.as_str()).collect()
    }

    pub fn domain_index(&self, name: &str) -> Option<usize> {
        self.opp_tables.keys().position(|k| k == name)
    }

    pub fn opp_table(&self, domain: &str) -> Option<&OppTable> {
        self.opp_tables.get(domain)
    }

    pub fn opp_table_of_type(&self, type_idx: usize) -> &OppTable {
        &self.opp_tables[&self.pe_types[type_idx].freq_domain]
    }

    /// Human-readable PE name, e.g. "A15#2".
    pub fn pe_name(&self, pe: PeId) -> String {
        format!("{}#{}", self.pe_types[pe.pe_type].name, pe.instance)
    }
}

/// A single validation finding. Violations are data, not failures: an empty
/// list means the checked object satisfies all structural invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// The offending field or element, e.g. `pe_types[1].count`.
    pub subject: String,
    pub message: String,
}

impl Violation {
    fn new(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Violation { subject: subject.into(), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

fn valid_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

/// Checks every [`ResourceDb`] structural invariant.
pub fn validate_soc(db: &ResourceDb) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, t) in db.pe_types.iter().enumerate() {
        let subj = format!("pe_types[{i}] ({})", t.name);
        if !valid_identifier(&t.name) {
            out.push(Violation::new(&subj, "name must be a non-empty identifier"));
        }
        if !seen.insert(t.name.clone()) {
            out.push(Violation::new(&subj, "name must be unique"));
        }
        if t.count < 1 {
            out.push(Violation::new(format!("{subj}.count"), "count must be >= 1"));
        }
        match db.opp_tables.get(&t.freq_domain) {
            None => out.push(Violation::new(
                format!("{subj}.freq_domain"),
                format!("references missing freq_domain \"{}\"", t.freq_domain),
            )),
            Some(table) => {
                if t.kind == PeKind::Accelerator && table.opps.len() != 1 {
                    out.push(Violation::new(
                        format!("{subj}.freq_domain"),
                        format!(
                            "accelerator type requires a single-entry OPP table, \"{}\" has {}",
                            t.freq_domain,
                            table.opps.len()
                        ),
                    ));
                }
            }
        }
    }
    if db.pe_types.is_empty() {
        out.push(Violation::new("pe_types", "at least one PE type is required"));
    }
    for (domain, table) in &db.opp_tables {
        let subj = format!("opp_tables[{domain}]");
        if table.opps.is_empty() {
            out.push(Violation::new(&subj, "OPP table must not be empty"));
            continue;
        }
        for w in table.opps.windows(2) {
            if w[1].freq_mhz <= w[0].freq_mhz {
                out.push(Violation::new(&subj, "OPP list must be sorted ascending by freq"));
            }
            if w[1].dyn_power_uw < w[0].dyn_power_uw || w[1].static_power_uw < w[0].static_power_uw
            {
                out.push(Violation::new(&subj, "power must be non-decreasing with freq"));
            }
        }
        for (j, opp) in table.opps.iter().enumerate() {
            if opp.freq_mhz == 0 {
                out.push(Violation::new(format!("{subj}[{j}].freq_mhz"), "freq must be > 0"));
            }
        }
        if table.ref_freq_mhz() == 0 {
            out.push(Violation::new(format!("{subj}.ref_freq_mhz"), "ref freq must be > 0"));
        }
    }
    if !(db.comm.bandwidth_bytes_per_us > 0.0 && db.comm.bandwidth_bytes_per_us.is_finite()) {
        out.push(Violation::new("comm.bandwidth_bytes_per_us", "bandwidth must be > 0"));
    }
    if !(db.thermal.r_k_per_w > 0.0) {
        out.push(Violation::new("thermal.r_k_per_w", "R must be > 0"));
    }
    if !(db.thermal.c_j_per_k > 0.0) {
        out.push(Violation::new("thermal.c_j_per_k", "C must be > 0"));
    }
    out
}

/// Checks every [`AppGraph`] invariant against a target SoC: edge endpoints
/// exist, the graph is acyclic, profiles are non-empty and positive, every
/// profiled PE type exists in the SoC, and every task can run somewhere.
pub fn validate_app(app: &AppGraph, db: &ResourceDb) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = app.tasks.len();
    if !valid_identifier(&app.name) {
        out.push(Violation::new("name", "app name must be a non-empty identifier"));
    }
    if n == 0 {
        out.push(Violation::new("tasks", "app must have at least one task"));
        return out;
    }
    let mut seen = BTreeSet::new();
    for (i, t) in app.tasks.iter().enumerate() {
        let subj = format!("tasks[{i}] ({})", t.name);
        if !valid_identifier(&t.name) {
            out.push(Violation::new(&subj, "task name must be a non-empty identifier"));
        }
        if !seen.insert(t.name.clone()) {
            out.push(Violation::new(&subj, "task name must be unique"));
        }
        if t.latency_profile.is_empty() {
            out.push(Violation::new(&subj, "latency_profile must not be empty"));
        }
        let mut supported = false;
        for (pe_type, lat) in &t.latency_profile {
            if lat.is_zero() {
                out.push(Violation::new(
                    format!("{subj}.latency_profile[{pe_type}]"),
                    "latency must be > 0",
                ));
            }
            match db.type_index(pe_type) {
                None => out.push(Violation::new(
                    format!("{subj}.latency_profile[{pe_type}]"),
                    format!("unknown PE type \"{pe_type}\" for this SoC"),
                )),
                Some(ti) => supported |= db.pe_types[ti].count >= 1,
            }
        }
        if !supported && !t.latency_profile.is_empty() {
            out.push(Violation::new(
                subj,
                "unschedulable task: no supporting PE type present in the SoC",
            ));
        }
    }
    for (i, e) in app.edges.iter().enumerate() {
        if e.src >= n || e.dst >= n {
            out.push(Violation::new(
                format!("edges[{i}]"),
                format!("edge endpoint out of range ({} -> {})", e.src, e.dst),
            ));
        }
    }
    if app.edges.iter().all(|e| e.src < n && e.dst < n) {
        if let Err(cycle_members) = topo_order(n, &app.edges) {
            let names: Vec<&str> =
                cycle_members.iter().map(|&i| app.tasks[i].name.as_str()).collect();
            out.push(Violation::new(
                "edges",
                format!("dependency cycle involving: {}", names.join(", ")),
            ));
        }
        // A non-empty acyclic graph always has a source and a sink, so those
        // invariants need no separate check here.
    }
    out
}

/// Kahn topological sort, popping the smallest ready index first so the
/// order is canonical. On failure returns the tasks stuck on a cycle.
pub(crate) fn topo_order(n: usize, edges: &[Edge]) -> Result<Vec<usize>, Vec<usize>> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let mut indeg = vec![0usize; n];
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in edges {
        indeg[e.dst] += 1;
        succs[e.src].push(e.dst);
    }
    let mut heap: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = heap.pop() {
        order.push(u);
        for &v in &succs[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                heap.push(Reverse(v));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        let in_order: BTreeSet<usize> = order.iter().copied().collect();
        Err((0..n).filter(|i| !in_order.contains(i)).collect())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("task \"{task}\" is not supported on PE type \"{pe_type}\"")]
    UnsupportedTask { task: String, pe_type: String },
}

/// Scales a reference latency to an operating frequency.
///
/// General-purpose cores are fully frequency-scalable (latency ~ 1/f,
/// rounded up to the nanosecond grid); accelerators run at a fixed clock and
/// are never scaled.
pub fn scale_latency(ref_latency: SimTime, kind: PeKind, freq_mhz: u32, ref_freq_mhz: u32) -> SimTime {
    match kind {
        PeKind::Accelerator => ref_latency,
        PeKind::GeneralPurpose => {
            assert!(freq_mhz > 0, "frequency must be > 0");
            let scaled = (ref_latency.ns() as u128 * ref_freq_mhz as u128).div_ceil(freq_mhz as u128);
            SimTime::from_ns(scaled as u64)
        }
    }
}

/// Execution time of `task` on a PE of `pe_type` running at `freq_mhz`.
pub fn execution_time(
    task: &TaskDef,
    pe_type: &PeType,
    freq_mhz: u32,
    ref_freq_mhz: u32,
) -> Result<SimTime, ModelError> {
    let lat = task.latency_profile.get(&pe_type.name).ok_or_else(|| {
        ModelError::UnsupportedTask { task: task.name.clone(), pe_type: pe_type.name.clone() }
    })?;
    Ok(scale_latency(*lat, pe_type.kind, freq_mhz, ref_freq_mhz))
}

/// An [`AppGraph`] joined against a [`ResourceDb`]: profiles keyed by PE
/// type index, adjacency lists, and a canonical topological order. Built
/// once per simulation so the hot path never does string lookups.
#[derive(Clone, Debug)]
pub struct ResolvedApp {
    pub name: String,
    pub task_names: Vec<String>,
    /// `profile[task][type_idx]` = reference latency, None if unsupported.
    pub profile: Vec<Vec<Option<SimTime>>>,
    /// `preds[task]` = (predecessor task, edge volume in bytes).
    pub preds: Vec<Vec<(usize, u64)>>,
    pub succs: Vec<Vec<usize>>,
    pub sources: Vec<usize>,
    pub sinks: Vec<usize>,
    /// `topo_rank[task]` = position in the canonical topological order.
    pub topo_rank: Vec<usize>,
    pub topo: Vec<usize>,
}

impl ResolvedApp {
    /// Requires a validated pair; returns the violations otherwise.
    pub fn new(app: &AppGraph, db: &ResourceDb) -> Result<ResolvedApp, Vec<Violation>> {
        let violations = validate_app(app, db);
        if !violations.is_empty() {
            return Err(violations);
        }
        let n = app.tasks.len();
        let profile = app
            .tasks
            .iter()
            .map(|t| {
                db.pe_types
                    .iter()
                    .map(|pt| t.latency_profile.get(&pt.name).copied())
                    .collect()
            })
            .collect();
        let mut preds: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
        let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &app.edges {
            preds[e.dst].push((e.src, e.volume_bytes));
            succs[e.src].push(e.dst);
        }
        let topo = topo_order(n, &app.edges).expect("validated graph is acyclic");
        let mut topo_rank = vec![0usize; n];
        for (rank, &t) in topo.iter().enumerate() {
            topo_rank[t] = rank;
        }
        Ok(ResolvedApp {
            name: app.name.clone(),
            task_names: app.tasks.iter().map(|t| t.name.clone()).collect(),
            profile,
            preds,
            succs,
            sources: app.sources(),
            sinks: app.sinks(),
            topo_rank,
            topo,
        })
    }

    pub fn task_count(&self) -> usize {
        self.task_names.len()
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: unknown task \"{name}\" referenced by an edge")]
    UnknownTask { path: String, name: String },
}

// ---------------------------------------------------------------------------
// File formats (JSON)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct AppFileTask {
    name: String,
    profile: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct AppFileEdge {
    src: String,
    dst: String,
    #[serde(default)]
    volume_bytes: u64,
}

#[derive(Serialize, Deserialize)]
struct AppFile {
    name: String,
    tasks: Vec<AppFileTask>,
    #[serde(default)]
    edges: Vec<AppFileEdge>,
}

/// Parses an application description; edge endpoints are task names,
/// latencies are microseconds.
pub fn app_from_json(text: &str, origin: &str) -> Result<AppGraph, ConfigError> {
    let file: AppFile = serde_json::from_str(text)
        .map_err(|source| ConfigError::Parse { path: origin.to_string(), source })?;
    let tasks: Vec<TaskDef> = file
        .tasks
        .iter()
        .map(|t| TaskDef {
            name: t.name.clone(),
            latency_profile: t
                .profile
                .iter()
                .map(|(k, &us)| (k.clone(), SimTime::from_us_f64(us)))
                .collect(),
        })
        .collect();
    let index = |name: &str| tasks.iter().position(|t| t.name == name);
    let mut edges = Vec::with_capacity(file.edges.len());
    for e in &file.edges {
        let src = index(&e.src).ok_or_else(|| ConfigError::UnknownTask {
            path: origin.to_string(),
            name: e.src.clone(),
        })?;
        let dst = index(&e.dst).ok_or_else(|| ConfigError::UnknownTask {
            path: origin.to_string(),
            name: e.dst.clone(),
        })?;
        edges.push(Edge { src, dst, volume_bytes: e.volume_bytes });
    }
    Ok(AppGraph { name: file.name, tasks, edges })
}

pub fn app_to_json(app: &AppGraph) -> String {
    let file = AppFile {
        name: app.name.clone(),
        tasks: app
            .tasks
            .iter()
            .map(|t| AppFileTask {
                name: t.name.clone(),
                profile: t
                    .latency_profile
                    .iter()
                    .map(|(k, v)| (k.clone(), v.us_f64()))
                    .collect(),
            })
            .collect(),
        edges: app
            .edges
            .iter()
            .map(|e| AppFileEdge {
                src: app.tasks[e.src].name.clone(),
                dst: app.tasks[e.dst].name.clone(),
                volume_bytes: e.volume_bytes,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("app serialization cannot fail")
}

pub fn load_app(path: &Path) -> Result<AppGraph, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    app_from_json(&text, &path.display().to_string())
}

/// Parses an SoC description (JSON form of [`ResourceDb`]).
pub fn soc_from_json(text: &str, origin: &str) -> Result<ResourceDb, ConfigError> {
    serde_json::from_str(text)
        .map_err(|source| ConfigError::Parse { path: origin.to_string(), source })
}

pub fn soc_to_json(db: &ResourceDb) -> String {
    serde_json::to_string_pretty(db).expect("soc serialization cannot fail")
}

pub fn load_soc(path: &Path) -> Result<ResourceDb, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    soc_from_json(&text, &path.display().to_string())
}

// ---------------------------------------------------------------------------
// Built-in reference SoC
// ---------------------------------------------------------------------------

/// The reference heterogeneous SoC used by the built-in WiFi benchmark:
/// four big cores, four little cores, two scrambler-encoder accelerators,
/// and four FFT accelerators (14 PEs total). OPP power numbers are
/// synthetic defaults; reports label them as such.
pub fn builtin_wifi_soc() -> ResourceDb {
    let gp = |name: &str, count: usize, domain: &str| PeType {
        name: name.to_string(),
        kind: PeKind::GeneralPurpose,
        count,
        freq_domain: domain.to_string(),
    };
    let acc = |name: &str, count: usize, domain: &str| PeType {
        name: name.to_string(),
        kind: PeKind::Accelerator,
        count,
        freq_domain: domain.to_string(),
    };
    let mut opp_tables = BTreeMap::new();
    opp_tables.insert(
        "big".to_string(),
        OppTable::new(vec![
            Opp::from_mw(600, 0.90, 300.0, 60.0),
            Opp::from_mw(1000, 1.00, 600.0, 80.0),
            Opp::from_mw(1400, 1.10, 1000.0, 100.0),
            Opp::from_mw(2000, 1.25, 1800.0, 140.0),
        ]),
    );
    opp_tables.insert(
        "little".to_string(),
        OppTable::new(vec![
            Opp::from_mw(600, 0.90, 100.0, 30.0),
            Opp::from_mw(800, 0.95, 150.0, 35.0),
            Opp::from_mw(1000, 1.00, 200.0, 40.0),
            Opp::from_mw(1400, 1.10, 350.0, 50.0),
        ]),
    );
    opp_tables.insert(
        "scrambler_acc".to_string(),
        OppTable::new(vec![Opp::from_mw(600, 0.90, 120.0, 20.0)]),
    );
    opp_tables.insert(
        "fft_acc".to_string(),
        OppTable::new(vec![Opp::from_mw(600, 0.90, 150.0, 25.0)]),
    );
    ResourceDb {
        pe_types: vec![
            gp("A15", 4, "big"),
            gp("A7", 4, "little"),
            acc("scrambler_acc", 2, "scrambler_acc"),
            acc("fft_acc", 4, "fft_acc"),
        ],
        comm: CommParams { latency: SimTime::ZERO, bandwidth_bytes_per_us: 1000.0 },
        opp_tables,
        thermal: ThermalParams::default(),
    }
}
