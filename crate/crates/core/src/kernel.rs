//! Deterministic discrete-event simulation kernel.
//!
//! The kernel owns all mutable simulation state. It processes events in a
//! total order of (time, class, sequence number) with the class order
//! job_arrival < task_finish < governor_tick, and invokes the scheduler
//! after every event that changed the ready list or freed a PE. Identical
//! inputs always replay to an identical event sequence and trace.
//!
//! Time accounting is segmented at events and governor ticks: within a
//! segment every PE's power state is constant, so energy integrates
//! exactly. A running task's latency and busy power are pinned to the OPP
//! sampled at dispatch; idle power follows the domain's live OPP.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    scale_latency, validate_soc, AppGraph, PeId, ResolvedApp, ResourceDb, Violation,
};
use crate::power::{governor_tick, pe_power, GovernorConfig, OppTable, ThermalNode};
use crate::sched::{Assignment, PeView, PredDone, ReadyTask, SchedView, Scheduler};
use crate::units::{Energy, Power, SimTime};
use crate::workload::{
    generate_arrivals, instantiate_job, ArrivalPlan, JobInstance, TaskState,
};

/// Analytical interconnect parameters: a fixed per-transfer latency plus a
/// bandwidth term. There is no contention model; transfers never queue.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommParams {
    #[serde(rename = "latency_us")]
    pub latency: SimTime,
    pub bandwidth_bytes_per_us: f64,
}

/// Transfer delay for `volume_bytes` from `src` to `dst`: zero when both
/// tasks ran on the same PE instance, otherwise the fixed latency plus
/// volume over bandwidth, rounded up to the nanosecond grain.
pub fn comm_latency(volume_bytes: u64, src: PeId, dst: PeId, params: &CommParams) -> SimTime {
    if src == dst {
        return SimTime::ZERO;
    }
    let transfer_ns = if volume_bytes == 0 {
        0
    } else {
        (volume_bytes as f64 * 1000.0 / params.bandwidth_bytes_per_us).ceil() as u64
    };
    params.latency + SimTime::from_ns(transfer_ns)
}

/// Identity of one task instance: (job index, task index within the app).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskId {
    pub job: usize,
    pub task: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EventKind {
    JobArrival { arrival: usize },
    TaskFinish { task: TaskId },
    GovernorTick,
}

impl EventKind {
    fn class(&self) -> u8 {
        match self {
            EventKind::JobArrival { .. } => 0,
            EventKind::TaskFinish { .. } => 1,
            EventKind::GovernorTick => 2,
        }
    }
}

/// A timestamped simulation event. Total order: (time, class, seq); the
/// sequence number is unique, so the order is total and replay-stable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Event {
    time: SimTime,
    seq: u64,
    kind: EventKind,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, self.kind.class(), self.seq).cmp(&(other.time, other.kind.class(), other.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Runtime state of one PE instance.
#[derive(Clone, Debug)]
pub struct PeInstance {
    pub id: PeId,
    pub busy: bool,
    pub current_task: Option<TaskId>,
    /// When the current work finishes; equals the clock when idle.
    pub available_at: SimTime,
    /// Execution window of the current task (excludes any communication
    /// stall between dispatch and first input arrival).
    work_start: SimTime,
    work_end: SimTime,
    /// Busy power pinned at dispatch time.
    busy_power: Power,
}

/// One completed (or in-flight) task execution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub job_id: u64,
    pub task_idx: usize,
    pub pe: PeId,
    pub t_ready: SimTime,
    pub t_start: SimTime,
    pub t_finish: SimTime,
    pub freq_mhz: u32,
}

/// A governor decision changing (or initially setting) a domain's OPP.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OppChange {
    pub time: SimTime,
    pub domain_idx: usize,
    pub freq_mhz: u32,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("validation failed: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid { violations: Vec<Violation> },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("deadlock: event queue drained with {} stuck task(s), e.g. {}", .stuck.len(),
            .stuck.iter().take(3).map(|(j, t)| format!("job {j} task {t}")).collect::<Vec<_>>().join(", "))]
    Deadlock { stuck: Vec<(u64, String)> },
    #[error("scheduler contract violation: task \"{task}\" assigned to busy PE {pe}")]
    AssignBusyPe { task: String, pe: String },
    #[error("scheduler contract violation: assigned task \"{task}\" is not ready")]
    AssignNotReady { task: String },
    #[error("scheduler contract violation: task \"{task}\" is not supported on {pe}")]
    AssignUnsupported { task: String, pe: String },
    #[error("scheduler contract violation: assignment references unknown PE")]
    UnknownPe,
}

/// Knobs of a single simulation run.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    /// Hard stop; events beyond this time are not processed and in-flight
    /// jobs are reported as such.
    pub max_time: Option<SimTime>,
    /// Fraction of the injection horizon treated as warm-up; jobs arriving
    /// inside it are excluded from latency averages.
    pub warmup_frac: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { max_time: None, warmup_frac: 0.1 }
    }
}

/// Everything a finished run produced; the input to report generation.
#[derive(Clone, Debug)]
pub struct SimOutcome {
    pub scheduler_name: String,
    pub app_name: String,
    pub task_names: Vec<String>,
    pub pe_names: Vec<String>,
    pub pe_type_names: Vec<String>,
    pub domains: Vec<String>,
    /// Injection horizon of the plan.
    pub duration: SimTime,
    /// Final simulated time: max(duration, last event), capped by max_time.
    pub horizon: SimTime,
    pub truncated: bool,
    pub warmup_frac: f64,
    pub seed: Option<u64>,
    pub jobs: Vec<JobInstance>,
    pub trace: Vec<TraceRecord>,
    pub opp_log: Vec<OppChange>,
    /// Exact per-PE energy, femtojoules.
    pub energy: Vec<Energy>,
    /// Cumulative per-PE execution time.
    pub busy: Vec<SimTime>,
    /// Peak temperature per frequency domain, kelvin.
    pub peak_temp_k: Vec<f64>,
}

impl SimOutcome {
    /// Completion latency of a job, if it finished.
    pub fn job_makespan(&self, job: usize) -> Option<SimTime> {
        let j = &self.jobs[job];
        j.t_complete.map(|c| c - j.t_arrive)
    }

    pub fn jobs_completed(&self) -> u64 {
        self.jobs.iter().filter(|j| j.t_complete.is_some()).count() as u64
    }
}

struct Engine<'a> {
    db: &'a ResourceDb,
    resolved: &'a ResolvedApp,
    governor: &'a GovernorConfig,
    // static lookup tables
    domains: Vec<String>,
    domain_tables: Vec<&'a OppTable>,
    type_domain: Vec<usize>,
    type_counts: Vec<usize>,
    domain_pes: Vec<usize>,
    // dynamic state
    clock: SimTime,
    queue: BinaryHeap<Reverse<Event>>,
    seq: u64,
    pes: Vec<PeInstance>,
    jobs: Vec<JobInstance>,
    ready: Vec<TaskId>,
    opp_idx: Vec<usize>,
    thermal: Vec<ThermalNode>,
    peak_temp: Vec<f64>,
    energy: Vec<Energy>,
    busy: Vec<SimTime>,
    busy_at_tick: Vec<SimTime>,
    dispatch_by_type: Vec<u64>,
    trace: Vec<TraceRecord>,
    opp_log: Vec<OppChange>,
}

impl<'a> Engine<'a> {
    fn new(
        db: &'a ResourceDb,
        resolved: &'a ResolvedApp,
        governor: &'a GovernorConfig,
    ) -> Engine<'a> {
        let domains: Vec<String> = db.domains().iter().map(|s| s.to_string()).collect();
        let domain_tables: Vec<&OppTable> =
            domains.iter().map(|d| db.opp_table(d).expect("validated")).collect();
        let type_domain: Vec<usize> = db
            .pe_types
            .iter()
            .map(|t| db.domain_index(&t.freq_domain).expect("validated"))
            .collect();
        let type_counts: Vec<usize> = db.pe_types.iter().map(|t| t.count).collect();
        let mut domain_pes = vec![0usize; domains.len()];
        for (ti, t) in db.pe_types.iter().enumerate() {
            domain_pes[type_domain[ti]] += t.count;
        }
        let pe_count = db.pe_count();
        let pes: Vec<PeInstance> = db
            .pe_ids()
            .into_iter()
            .map(|id| PeInstance {
                id,
                busy: false,
                current_task: None,
                available_at: SimTime::ZERO,
                work_start: SimTime::ZERO,
                work_end: SimTime::ZERO,
                busy_power: Power::ZERO,
            })
            .collect();
        let opp_idx: Vec<usize> = domain_tables
            .iter()
            .map(|t| governor.policy.initial_index(t))
            .collect();
        let thermal: Vec<ThermalNode> =
            domains.iter().map(|_| ThermalNode::new(db.thermal)).collect();
        let peak_temp: Vec<f64> = thermal.iter().map(|n| n.temp_k).collect();
        let opp_log: Vec<OppChange> = opp_idx
            .iter()
            .enumerate()
            .map(|(d, &i)| OppChange {
                time: SimTime::ZERO,
                domain_idx: d,
                freq_mhz: domain_tables[d].opps[i].freq_mhz,
            })
            .collect();
        Engine {
            db,
            resolved,
            governor,
            domains,
            domain_tables,
            type_domain,
            type_counts,
            domain_pes,
            clock: SimTime::ZERO,
            queue: BinaryHeap::new(),
            seq: 0,
            pes,
            jobs: Vec::new(),
            ready: Vec::new(),
            opp_idx,
            thermal,
            peak_temp,
            energy: vec![Energy::ZERO; pe_count],
            busy: vec![SimTime::ZERO; pe_count],
            busy_at_tick: vec![SimTime::ZERO; pe_count],
            dispatch_by_type: vec![0; db.pe_types.len()],
            trace: Vec::new(),
            opp_log,
        }
    }

    fn push_event(&mut self, time: SimTime, kind: EventKind) {
        let seq = self.seq;
        self.seq += 1;
        self.queue.push(Reverse(Event { time, seq, kind }));
    }

    fn current_opp(&self, type_idx: usize) -> (&crate::power::Opp, u32) {
        let d = self.type_domain[type_idx];
        let table = self.domain_tables[d];
        (&table.opps[self.opp_idx[d]], table.ref_freq_mhz())
    }

    /// Advances the clock, integrating energy, busy time, and temperature
    /// over the segment. Within a segment every PE's power is constant
    /// except at a task's execution start, which is handled by interval
    /// overlap.
    fn accumulate_to(&mut self, t: SimTime) {
        if t <= self.clock {
            return;
        }
        let dt = t - self.clock;
        let mut domain_fj = vec![Energy::ZERO; self.domains.len()];
        for (flat, pe) in self.pes.iter().enumerate() {
            let d = self.type_domain[pe.id.pe_type];
            let static_power =
                Power::from_uw(self.domain_tables[d].opps[self.opp_idx[d]].static_power_uw);
            let work = if pe.busy {
                let ws = pe.work_start.max(self.clock);
                let we = pe.work_end.min(t);
                we.saturating_sub(ws)
            } else {
                SimTime::ZERO
            };
            let idle = dt - work;
            let e = Energy::from_power_interval(pe.busy_power, work)
                + Energy::from_power_interval(static_power, idle);
            self.energy[flat] += e;
            self.busy[flat] += work;
            domain_fj[d] += e;
        }
        for d in 0..self.domains.len() {
            // mean power over the segment, in watts (fJ / ns = uW)
            let power_w = domain_fj[d].fj() as f64 / dt.ns() as f64 * 1e-6;
            self.thermal[d].advance(power_w, dt);
            if self.thermal[d].temp_k > self.peak_temp[d] {
                self.peak_temp[d] = self.thermal[d].temp_k;
            }
        }
        self.clock = t;
    }

    fn build_view(&self) -> SchedView<'_> {
        let pes = self
            .pes
            .iter()
            .enumerate()
            .map(|(flat, pe)| {
                let (opp, ref_freq) = self.current_opp(pe.id.pe_type);
                PeView {
                    id: pe.id,
                    flat,
                    idle: !pe.busy,
                    kind: self.db.pe_types[pe.id.pe_type].kind,
                    freq_mhz: opp.freq_mhz,
                    ref_freq_mhz: ref_freq,
                }
            })
            .collect();
        let ready = self
            .ready
            .iter()
            .enumerate()
            .map(|(pos, &tid)| ReadyTask {
                id: tid,
                task_idx: tid.task,
                pos,
                preds: self.resolved.preds[tid.task]
                    .iter()
                    .map(|&(p, volume_bytes)| {
                        let pt = &self.jobs[tid.job].tasks[p];
                        PredDone {
                            finish: pt.t_finish.expect("ready task's preds finished"),
                            pe: pt.assigned_pe.expect("finished task has a PE"),
                            volume_bytes,
                        }
                    })
                    .collect(),
            })
            .collect();
        SchedView {
            clock: self.clock,
            comm: self.db.comm,
            pes,
            ready,
            profile: &self.resolved.profile,
            task_names: &self.resolved.task_names,
            dispatch_by_type: &self.dispatch_by_type,
            type_counts: &self.type_counts,
        }
    }

    /// Offers the ready list to the scheduler and applies its assignments.
    fn epoch(&mut self, scheduler: &mut dyn Scheduler) -> Result<(), SimError> {
        if self.ready.is_empty() {
            return Ok(());
        }
        let assignments: Vec<Assignment> = {
            let view = self.build_view();
            scheduler.schedule(&view)
        };
        for a in assignments {
            self.dispatch(a.task, a.pe)?;
        }
        Ok(())
    }

    /// Starts a ready task on an idle PE: charges remaining communication
    /// latency from each predecessor's PE, samples the OPP in force, and
    /// schedules the finish event.
    fn dispatch(&mut self, task: TaskId, pe_id: PeId) -> Result<(), SimError> {
        if pe_id.pe_type >= self.db.pe_types.len()
            || pe_id.instance >= self.db.pe_types[pe_id.pe_type].count
            || task.job >= self.jobs.len()
            || task.task >= self.resolved.task_count()
        {
            return Err(SimError::UnknownPe);
        }
        let task_name = || self.resolved.task_names[task.task].clone();
        let flat = self.db.flat_index(pe_id);
        if self.pes[flat].busy {
            return Err(SimError::AssignBusyPe {
                task: task_name(),
                pe: self.db.pe_name(pe_id),
            });
        }
        if self.jobs[task.job].tasks[task.task].state != TaskState::Ready {
            return Err(SimError::AssignNotReady { task: task_name() });
        }
        let Some(ref_lat) = self.resolved.profile[task.task][pe_id.pe_type] else {
            return Err(SimError::AssignUnsupported {
                task: task_name(),
                pe: self.db.pe_name(pe_id),
            });
        };
        let (opp, ref_freq) = self.current_opp(pe_id.pe_type);
        let freq_mhz = opp.freq_mhz;
        let exec = scale_latency(ref_lat, self.db.pe_types[pe_id.pe_type].kind, freq_mhz, ref_freq);
        let busy_power = pe_power(true, opp);

        let mut start = self.clock;
        for &(p, volume) in &self.resolved.preds[task.task] {
            let pt = &self.jobs[task.job].tasks[p];
            let arrive = pt.t_finish.expect("predecessors finished")
                + comm_latency(volume, pt.assigned_pe.expect("finished on a PE"), pe_id, &self.db.comm);
            start = start.max(arrive);
        }
        let finish = start + exec;

        let ti = &mut self.jobs[task.job].tasks[task.task];
        ti.state = TaskState::Running;
        ti.assigned_pe = Some(pe_id);
        ti.t_start = Some(start);
        ti.t_finish = Some(finish);
        ti.freq_mhz = Some(freq_mhz);
        let t_ready = ti.t_ready.expect("ready task has a ready time");

        let pe = &mut self.pes[flat];
        pe.busy = true;
        pe.current_task = Some(task);
        pe.available_at = finish;
        pe.work_start = start;
        pe.work_end = finish;
        pe.busy_power = busy_power;

        self.ready.retain(|&t| t != task);
        self.dispatch_by_type[pe_id.pe_type] += 1;
        self.trace.push(TraceRecord {
            job_id: self.jobs[task.job].job_id,
            task_idx: task.task,
            pe: pe_id,
            t_ready,
            t_start: start,
            t_finish: finish,
            freq_mhz,
        });
        self.push_event(finish, EventKind::TaskFinish { task });
        Ok(())
    }

    /// Marks successors whose predecessors have all finished as ready.
    fn ready_successors(&mut self, finished: TaskId) -> Vec<TaskId> {
        let mut out = Vec::new();
        for &succ in &self.resolved.succs[finished.task] {
            let job = &self.jobs[finished.job];
            if job.tasks[succ].state != TaskState::Blocked {
                continue;
            }
            let all_done = self.resolved.preds[succ]
                .iter()
                .all(|&(p, _)| job.tasks[p].state == TaskState::Finished);
            if all_done {
                let t = &mut self.jobs[finished.job].tasks[succ];
                t.state = TaskState::Ready;
                t.t_ready = Some(self.clock);
                let id = TaskId { job: finished.job, task: succ };
                self.ready.push(id);
                out.push(id);
            }
        }
        out
    }

    fn on_task_finish(&mut self, task: TaskId) {
        {
            let ti = &mut self.jobs[task.job].tasks[task.task];
            debug_assert_eq!(ti.state, TaskState::Running);
            debug_assert_eq!(ti.t_finish, Some(self.clock));
            ti.state = TaskState::Finished;
            let flat = self.db.flat_index(ti.assigned_pe.expect("running task has a PE"));
            let pe = &mut self.pes[flat];
            pe.busy = false;
            pe.current_task = None;
            pe.available_at = self.clock;
        }
        self.ready_successors(task);
        if self.jobs[task.job].finished() {
            self.jobs[task.job].t_complete = Some(self.clock);
        }
    }

    fn on_governor_tick(&mut self, now: SimTime) {
        let period_ns = self.governor.period.ns() as f64;
        for d in 0..self.domains.len() {
            let table = self.domain_tables[d];
            if table.opps.len() <= 1 {
                continue;
            }
            let busy_delta: u64 = self
                .pes
                .iter()
                .enumerate()
                .filter(|(_, pe)| self.type_domain[pe.id.pe_type] == d)
                .map(|(flat, _)| (self.busy[flat] - self.busy_at_tick[flat]).ns())
                .sum();
            let util =
                (busy_delta as f64 / (self.domain_pes[d] as f64 * period_ns)).clamp(0.0, 1.0);
            let next = governor_tick(self.governor, util, self.opp_idx[d], table);
            if next != self.opp_idx[d] {
                self.opp_idx[d] = next;
                self.opp_log.push(OppChange {
                    time: now,
                    domain_idx: d,
                    freq_mhz: table.opps[next].freq_mhz,
                });
            }
        }
        self.busy_at_tick.copy_from_slice(&self.busy);
    }
}

/// Runs one simulation: injects the plan's arrivals, processes events to
/// completion (or `max_time`), and returns the raw outcome.
///
/// Fails with [`SimError::Deadlock`] if the event queue drains while
/// unfinished tasks remain — an unschedulable task or a scheduler that
/// never assigns.
pub fn run(
    db: &ResourceDb,
    app: &AppGraph,
    plan: &ArrivalPlan,
    scheduler: &mut dyn Scheduler,
    governor: &GovernorConfig,
    options: &RunOptions,
) -> Result<SimOutcome, SimError> {
    plan.validate().map_err(SimError::Config)?;
    let arrivals = generate_arrivals(plan);
    let mut outcome =
        run_with_arrivals(db, app, &arrivals, plan.duration, scheduler, governor, options)?;
    outcome.seed = Some(plan.seed);
    Ok(outcome)
}

/// One job injected at t = 0 into an otherwise empty system; the horizon is
/// just the job itself. Warm-up does not apply.
pub fn run_single_job(
    db: &ResourceDb,
    app: &AppGraph,
    scheduler: &mut dyn Scheduler,
    governor: &GovernorConfig,
) -> Result<SimOutcome, SimError> {
    run_with_arrivals(
        db,
        app,
        &[SimTime::ZERO],
        SimTime::from_ns(1),
        scheduler,
        governor,
        &RunOptions { max_time: None, warmup_frac: 0.0 },
    )
}

/// [`run`] with a pre-generated arrival sequence.
pub fn run_with_arrivals(
    db: &ResourceDb,
    app: &AppGraph,
    arrivals: &[SimTime],
    duration: SimTime,
    scheduler: &mut dyn Scheduler,
    governor: &GovernorConfig,
    options: &RunOptions,
) -> Result<SimOutcome, SimError> {
    let soc_violations = validate_soc(db);
    if !soc_violations.is_empty() {
        return Err(SimError::Invalid { violations: soc_violations });
    }
    let resolved =
        ResolvedApp::new(app, db).map_err(|violations| SimError::Invalid { violations })?;
    governor.validate().map_err(SimError::Config)?;
    if !(0.0..=1.0).contains(&options.warmup_frac) {
        return Err(SimError::Config("warmup fraction must be in [0, 1]".to_string()));
    }

    let mut eng = Engine::new(db, &resolved, governor);
    for (arrival, &t) in arrivals.iter().enumerate() {
        eng.push_event(t, EventKind::JobArrival { arrival });
    }
    if !eng.queue.is_empty() || governor.period <= duration {
        eng.push_event(governor.period, EventKind::GovernorTick);
    }

    let mut truncated = false;
    while let Some(Reverse(ev)) = eng.queue.pop() {
        if let Some(max) = options.max_time {
            if ev.time > max {
                truncated = true;
                break;
            }
        }
        if ev.kind == EventKind::GovernorTick && eng.queue.is_empty() && ev.time > duration {
            // nothing left to observe; do not let a trailing tick stretch the run
            continue;
        }
        eng.accumulate_to(ev.time);
        match ev.kind {
            EventKind::JobArrival { arrival: _ } => {
                let job_idx = eng.jobs.len();
                let job = instantiate_job(app, job_idx as u64, ev.time);
                eng.jobs.push(job);
                for &src in &resolved.sources {
                    eng.ready.push(TaskId { job: job_idx, task: src });
                }
                eng.epoch(scheduler)?;
            }
            EventKind::TaskFinish { task } => {
                eng.on_task_finish(task);
                eng.epoch(scheduler)?;
            }
            EventKind::GovernorTick => {
                eng.on_governor_tick(ev.time);
                let next = ev.time + governor.period;
                if !eng.queue.is_empty() || next <= duration {
                    eng.push_event(next, EventKind::GovernorTick);
                }
            }
        }
    }

    let mut horizon = eng.clock.max(duration);
    if let Some(max) = options.max_time {
        horizon = horizon.min(max);
    }
    eng.accumulate_to(horizon);

    if !truncated {
        let stuck: Vec<(u64, String)> = eng
            .jobs
            .iter()
            .flat_map(|j| {
                j.tasks.iter().enumerate().filter_map(|(i, t)| {
                    (t.state != TaskState::Finished)
                        .then(|| (j.job_id, resolved.task_names[i].clone()))
                })
            })
            .collect();
        if !stuck.is_empty() {
            return Err(SimError::Deadlock { stuck });
        }
    }

    Ok(SimOutcome {
        scheduler_name: scheduler.name().to_string(),
        app_name: app.name.clone(),
        task_names: resolved.task_names.clone(),
        pe_names: db.pe_ids().into_iter().map(|id| db.pe_name(id)).collect(),
        pe_type_names: db.pe_types.iter().map(|t| t.name.clone()).collect(),
        domains: eng.domains,
        duration,
        horizon,
        truncated,
        warmup_frac: options.warmup_frac,
        seed: None,
        jobs: eng.jobs,
        trace: eng.trace,
        opp_log: eng.opp_log,
        energy: eng.energy,
        busy: eng.busy,
        peak_temp_k: eng.peak_temp,
    })
}
