//! Deterministic discrete-event simulation of one hyperperiod on an
//! allocated NoC platform.
//!
//! Each core runs fixed-priority preemptive scheduling over ready
//! runnable-jobs (priority = task priority, larger is more urgent; ties
//! broken by earlier release, then task name, then runnable position, then
//! job creation order — a total, deterministic order replacing any notion
//! of simultaneous-event nondeterminism). Preemption and context switches
//! cost nothing.
//!
//! Job structure and precedence:
//! - A task activation releases one *task-job*, which expands into one
//!   *runnable-job* per runnable; within a task-job, runnables execute
//!   strictly in list order.
//! - Successive task-jobs of the same task are serialized (activation
//!   queuing): a task-job's first runnable waits for the previous
//!   task-job's last runnable.
//! - At equal release instants across tasks, writers execute before
//!   readers of the same label: a reader-job waits for every same-instant
//!   writer-job of a label it reads. Cyclic write/read relationships are
//!   broken at task granularity by priority: among mutually dependent
//!   same-instant tasks only the higher-priority task's writes keep
//!   precedence over the lower-priority readers.
//! - A runnable-job's core occupancy is one contiguous (preemptible)
//!   block: remote-read latencies, then computation, then remote-write
//!   latencies; communication never overlaps computation.
//! - Writing a label that is an inter-process trigger releases the
//!   triggered task at the writer's finish instant (dropped at or beyond
//!   the horizon). Inter-process stimuli with an injection period also
//!   release their task at each multiple of that period, modeling
//!   environment events.
//!
//! The horizon is the model hyperperiod; the simulation runs until every
//! job released in `[0, H)` completes. Only periodic task-jobs carry
//! deadlines (release + period), attached per runnable-job. A runaway
//! trigger cascade is cut off by a job-count ceiling and reported as an
//! activation-storm error.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AmaltheaModel, ExecutionBound, ModelError, StimulusKind};
use crate::noc::NocPlatform;

/// Ceiling on runnable-jobs released in one simulation; exceeding it
/// means a non-terminating trigger cascade.
pub const MAX_RUNNABLE_JOBS: usize = 1_000_000;

/// Total assignment of runnables and labels to platform core indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    /// Platform core index per runnable, in model runnable order.
    pub runnable_core: Vec<usize>,
    /// Platform core index per label, in model label order.
    pub label_core: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum AllocationError {
    #[error("allocation JSON is malformed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("allocation names unknown {kind} {name:?}")]
    UnknownEntity { kind: &'static str, name: String },
    #[error("allocation names unknown core {0:?}")]
    UnknownCore(String),
    #[error("allocation is missing {kind} {name:?}")]
    MissingEntity { kind: &'static str, name: String },
}

#[derive(Serialize, Deserialize)]
struct AllocationFile {
    runnables: BTreeMap<String, String>,
    labels: BTreeMap<String, String>,
}

impl Allocation {
    /// Places every runnable and label on one core.
    pub fn uniform(model: &AmaltheaModel, core: usize) -> Self {
        Self {
            runnable_core: vec![core; model.runnable_count()],
            label_core: vec![core; model.label_count()],
        }
    }

    /// Reads the JSON allocation format: an object with `"runnables"` and
    /// `"labels"` maps from entity name to core name. The maps must cover
    /// the model exactly.
    pub fn from_json(
        json: &str,
        model: &AmaltheaModel,
        platform: &NocPlatform,
    ) -> Result<Self, AllocationError> {
        let file: AllocationFile = serde_json::from_str(json)?;
        let resolve_core = |name: &str| {
            platform
                .core_by_name(name)
                .ok_or_else(|| AllocationError::UnknownCore(name.to_owned()))
        };
        for name in file.runnables.keys() {
            if model.runnable_by_name(name).is_none() {
                return Err(AllocationError::UnknownEntity { kind: "runnable", name: name.clone() });
            }
        }
        for name in file.labels.keys() {
            if model.label_by_name(name).is_none() {
                return Err(AllocationError::UnknownEntity { kind: "label", name: name.clone() });
            }
        }
        let mut runnable_core = Vec::with_capacity(model.runnable_count());
        for runnable in model.runnables() {
            let core = file.runnables.get(&runnable.name).ok_or_else(|| {
                AllocationError::MissingEntity { kind: "runnable", name: runnable.name.clone() }
            })?;
            runnable_core.push(resolve_core(core)?);
        }
        let mut label_core = Vec::with_capacity(model.label_count());
        for label in model.labels() {
            let core = file.labels.get(&label.name).ok_or_else(|| {
                AllocationError::MissingEntity { kind: "label", name: label.name.clone() }
            })?;
            label_core.push(resolve_core(core)?);
        }
        Ok(Self { runnable_core, label_core })
    }

    /// Serializes to the JSON allocation format (keys sorted, pretty).
    pub fn to_json(&self, model: &AmaltheaModel, platform: &NocPlatform) -> String {
        let file = AllocationFile {
            runnables: model
                .runnables()
                .iter()
                .zip(&self.runnable_core)
                .map(|(r, &c)| (r.name.clone(), platform.core(c).name.clone()))
                .collect(),
            labels: model
                .labels()
                .iter()
                .zip(&self.label_core)
                .map(|(l, &c)| (l.name.clone(), platform.core(c).name.clone()))
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&file).expect("allocation maps serialize");
        out.push('\n');
        out
    }
}

/// One completed runnable-job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobRecord {
    /// Task index in the model.
    pub task: usize,
    /// Runnable index in the model.
    pub runnable: usize,
    /// Platform core index the job ran on.
    pub core: usize,
    pub release_ns: u64,
    /// Instant every precedence constraint was satisfied (≥ release).
    pub ready_ns: u64,
    /// First dispatch instant.
    pub start_ns: u64,
    pub finish_ns: u64,
    /// Absolute deadline (release + period) for periodic tasks; `None`
    /// for deadline-free (event-driven) tasks.
    pub deadline_ns: Option<u64>,
    pub missed: bool,
}

/// One contiguous execution interval of a job on its core.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecSegment {
    /// Index into [`SimResult::jobs`].
    pub job: usize,
    pub from_ns: u64,
    pub to_ns: u64,
}

/// Outcome of one hyperperiod simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimResult {
    /// All runnable-jobs in release order.
    pub jobs: Vec<JobRecord>,
    /// Latest finish among jobs released in `[0, H)`.
    pub makespan_ns: u64,
    pub missed_deadlines: usize,
    pub total_deadlines: usize,
    /// Execution intervals per core dispatch, in chronological order of
    /// their end; lets callers audit scheduling decisions.
    pub segments: Vec<ExecSegment>,
}

/// Counts `(missed, total)` deadlines from the job records.
pub fn count_deadlines(result: &SimResult) -> (usize, usize) {
    let missed = result.jobs.iter().filter(|j| j.missed).count();
    let total = result.jobs.iter().filter(|j| j.deadline_ns.is_some()).count();
    (missed, total)
}

/// A statically timed task activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskRelease {
    pub task: usize,
    pub release_ns: u64,
}

/// Expands all statically timed stimuli (periodic, single, pattern) into
/// task releases in `[0, horizon_ns)`, sorted by (time, task index). One
/// task-job is released per activation instant. Inter-process activations
/// are created dynamically during simulation, not here; sporadic stimuli
/// have no defined instants and produce nothing.
pub fn generate_jobs(model: &AmaltheaModel, horizon_ns: u64) -> Vec<TaskRelease> {
    let mut releases = Vec::new();
    for (t, task) in model.tasks().iter().enumerate() {
        match &model.stimulus(task.stimulus).kind {
            StimulusKind::Periodic { period_ns, offset_ns } => {
                if *period_ns == 0 {
                    continue;
                }
                let mut at = *offset_ns;
                while at < horizon_ns {
                    releases.push(TaskRelease { task: t, release_ns: at });
                    at += period_ns;
                }
            }
            StimulusKind::Single { time_ns } => {
                if *time_ns < horizon_ns {
                    releases.push(TaskRelease { task: t, release_ns: *time_ns });
                }
            }
            StimulusKind::Pattern { times_ns } => {
                for &at in times_ns.iter().filter(|&&at| at < horizon_ns) {
                    releases.push(TaskRelease { task: t, release_ns: at });
                }
            }
            StimulusKind::Sporadic { .. } | StimulusKind::InterProcess { .. } => {}
        }
    }
    releases.sort_by_key(|r| (r.release_ns, r.task));
    releases
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("allocation maps {entity} to core {core}, which is not active")]
    InactiveCore { entity: String, core: usize },
    #[error("allocation maps {entity} to core index {core}, but the platform has {count} cores")]
    CoreOutOfRange { entity: String, core: usize, count: usize },
    #[error("allocation covers {got} {kind}s but the model has {want}")]
    AllocationIncomplete { kind: &'static str, got: usize, want: usize },
    #[error("activation storm: more than {MAX_RUNNABLE_JOBS} runnable-jobs released")]
    ActivationStorm,
}

/// Scheduling key: greater runs first.
#[derive(Clone, Copy, PartialEq, Eq)]
struct ReadyKey {
    priority: u32,
    release_ns: u64,
    task_name_rank: u32,
    position: u32,
    job: u32,
}

impl Ord for ReadyKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .cmp(&other.priority)
            .then(other.release_ns.cmp(&self.release_ns))
            .then(other.task_name_rank.cmp(&self.task_name_rank))
            .then(other.position.cmp(&self.position))
            .then(other.job.cmp(&self.job))
    }
}

impl PartialOrd for ReadyKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const UNSET: u64 = u64::MAX;

#[derive(Debug, Clone)]
struct Job {
    task: u32,
    runnable: u32,
    position: u32,
    core: u32,
    release_ns: u64,
    deadline_ns: u64, // UNSET = no deadline
    remaining_ns: u64,
    preds: u32,
    succs: Vec<u32>,
    ready_ns: u64,
    start_ns: u64,
    finish_ns: u64,
}

struct TaskInfo {
    priority: u32,
    name_rank: u32,
    runnables: Vec<u32>,
    period_ns: Option<u64>,
    /// Label-set bitmasks over all runnables of the task.
    reads_mask: Vec<u64>,
    writes_mask: Vec<u64>,
}

/// Reusable simulation engine for one (model, platform) pair.
///
/// Construction precomputes everything allocation-independent; `run` and
/// `run_fitness` may then be called many times with different allocations
/// (the genetic algorithm's hot path). A single run is single-threaded and
/// pure with respect to its inputs.
pub struct Simulator<'m> {
    model: &'m AmaltheaModel,
    platform: &'m NocPlatform,
    horizon_ns: u64,
    tasks: Vec<TaskInfo>,
    /// Static activations (periodic/single/pattern plus environment
    /// injections), sorted by (time, task).
    static_releases: Vec<TaskRelease>,
    /// Tasks triggered by a write of each label.
    triggered_by: Vec<Vec<u32>>,
    /// Flits needed per label.
    label_flits: Vec<u64>,
    runnable_reads_mask: Vec<Vec<u64>>,
    runnable_writes_mask: Vec<Vec<u64>>,

    // Reusable per-run scratch.
    jobs: Vec<Job>,
    ready: Vec<BinaryHeap<ReadyKey>>,
    running: Vec<Option<u32>>,
    last_update: Vec<u64>,
    dynamic_releases: BinaryHeap<std::cmp::Reverse<(u64, u32, u32)>>, // (time, seq, task)
    last_task_job: Vec<Option<u32>>,
    duration_ns: Vec<u64>,
    segments: Vec<ExecSegment>,
    /// Index into `segments` of the open interval per core.
    open_segment: Vec<Option<usize>>,
    group: Vec<(u32, u32)>, // (task, first job index) released at the current instant
}

impl<'m> Simulator<'m> {
    pub fn new(model: &'m AmaltheaModel, platform: &'m NocPlatform) -> Result<Self, SimError> {
        let horizon_ns = model.hyperperiod_ns()?;
        let n_labels = model.label_count();
        let mask_words = n_labels.div_ceil(64).max(1);

        let mut name_order: Vec<usize> = (0..model.task_count()).collect();
        name_order.sort_by_key(|&t| model.task(t).name.as_str());
        let mut name_rank = vec![0u32; model.task_count()];
        for (rank, &t) in name_order.iter().enumerate() {
            name_rank[t] = rank as u32;
        }

        let label_mask = |labels: &[usize]| {
            let mut mask = vec![0u64; mask_words];
            for &l in labels {
                mask[l / 64] |= 1 << (l % 64);
            }
            mask
        };
        let runnable_reads_mask: Vec<Vec<u64>> =
            model.runnables().iter().map(|r| label_mask(&r.reads)).collect();
        let runnable_writes_mask: Vec<Vec<u64>> =
            model.runnables().iter().map(|r| label_mask(&r.writes)).collect();

        let mut tasks = Vec::with_capacity(model.task_count());
        for (t, task) in model.tasks().iter().enumerate() {
            let mut reads_mask = vec![0u64; mask_words];
            let mut writes_mask = vec![0u64; mask_words];
            for &r in &task.runnables {
                for w in 0..mask_words {
                    reads_mask[w] |= runnable_reads_mask[r][w];
                    writes_mask[w] |= runnable_writes_mask[r][w];
                }
            }
            let period_ns = match model.stimulus(task.stimulus).kind {
                StimulusKind::Periodic { period_ns, .. } => Some(period_ns),
                _ => None,
            };
            tasks.push(TaskInfo {
                priority: task.priority,
                name_rank: name_rank[t],
                runnables: task.runnables.iter().map(|&r| r as u32).collect(),
                period_ns,
                reads_mask,
                writes_mask,
            });
        }

        let mut triggered_by = vec![Vec::new(); n_labels];
        let mut static_releases = generate_jobs(model, horizon_ns);
        for (t, task) in model.tasks().iter().enumerate() {
            if let StimulusKind::InterProcess { trigger_label, injection_period_ns } =
                model.stimulus(task.stimulus).kind
            {
                triggered_by[trigger_label].push(t as u32);
                if let Some(period) = injection_period_ns {
                    if period > 0 {
                        let mut at = 0;
                        while at < horizon_ns {
                            static_releases.push(TaskRelease { task: t, release_ns: at });
                            at += period;
                        }
                    }
                }
            }
        }
        static_releases.sort_by_key(|r| (r.release_ns, r.task));

        let label_flits = model
            .labels()
            .iter()
            .map(|l| u64::from(l.bit_length).div_ceil(platform.flit_bits))
            .collect();

        let n_cores = platform.core_count();
        Ok(Self {
            model,
            platform,
            horizon_ns,
            tasks,
            static_releases,
            triggered_by,
            label_flits,
            runnable_reads_mask,
            runnable_writes_mask,
            jobs: Vec::new(),
            ready: (0..n_cores).map(|_| BinaryHeap::new()).collect(),
            running: vec![None; n_cores],
            last_update: vec![0; n_cores],
            dynamic_releases: BinaryHeap::new(),
            last_task_job: Vec::new(),
            duration_ns: vec![0; model.runnable_count()],
            segments: Vec::new(),
            open_segment: vec![None; n_cores],
            group: Vec::new(),
        })
    }

    pub fn horizon_ns(&self) -> u64 {
        self.horizon_ns
    }

    fn check_allocation(&self, allocation: &Allocation) -> Result<(), SimError> {
        if allocation.runnable_core.len() != self.model.runnable_count() {
            return Err(SimError::AllocationIncomplete {
                kind: "runnable",
                got: allocation.runnable_core.len(),
                want: self.model.runnable_count(),
            });
        }
        if allocation.label_core.len() != self.model.label_count() {
            return Err(SimError::AllocationIncomplete {
                kind: "label",
                got: allocation.label_core.len(),
                want: self.model.label_count(),
            });
        }
        let check = |entity: String, core: usize| {
            if core >= self.platform.core_count() {
                Err(SimError::CoreOutOfRange { entity, core, count: self.platform.core_count() })
            } else if !self.platform.core(core).active {
                Err(SimError::InactiveCore { entity, core })
            } else {
                Ok(())
            }
        };
        for (r, &core) in allocation.runnable_core.iter().enumerate() {
            check(format!("runnable {:?}", self.model.runnable(r).name), core)?;
        }
        for (l, &core) in allocation.label_core.iter().enumerate() {
            check(format!("label {:?}", self.model.label(l).name), core)?;
        }
        Ok(())
    }

    /// Latency of one label access between two platform cores.
    fn access_latency(&self, label: usize, from_core: usize, to_core: usize) -> u64 {
        if from_core == to_core {
            return 0;
        }
        let a = self.platform.core(from_core).position;
        let b = self.platform.core(to_core).position;
        let hops = (a.0.abs_diff(b.0) + a.1.abs_diff(b.1)) as u64;
        hops * self.platform.hop_latency_ns * self.label_flits[label]
    }

    /// Full simulation with job records and execution segments.
    pub fn run(&mut self, allocation: &Allocation, mode: ExecutionBound) -> Result<SimResult, SimError> {
        self.exec(allocation, mode)?;
        let jobs: Vec<JobRecord> = self
            .jobs
            .iter()
            .map(|j| JobRecord {
                task: j.task as usize,
                runnable: j.runnable as usize,
                core: j.core as usize,
                release_ns: j.release_ns,
                ready_ns: j.ready_ns,
                start_ns: j.start_ns,
                finish_ns: j.finish_ns,
                deadline_ns: (j.deadline_ns != UNSET).then_some(j.deadline_ns),
                missed: j.deadline_ns != UNSET && j.finish_ns > j.deadline_ns,
            })
            .collect();
        let makespan_ns = jobs.iter().map(|j| j.finish_ns).max().unwrap_or(0);
        let missed_deadlines = jobs.iter().filter(|j| j.missed).count();
        let total_deadlines = jobs.iter().filter(|j| j.deadline_ns.is_some()).count();
        Ok(SimResult {
            jobs,
            makespan_ns,
            missed_deadlines,
            total_deadlines,
            segments: self.segments.clone(),
        })
    }

    /// Simulation reduced to `(missed deadlines, makespan)` — the fitness
    /// path, which skips materializing job records.
    pub fn run_fitness(
        &mut self,
        allocation: &Allocation,
        mode: ExecutionBound,
    ) -> Result<(usize, u64), SimError> {
        self.exec(allocation, mode)?;
        let mut missed = 0;
        let mut makespan = 0;
        for j in &self.jobs {
            if j.deadline_ns != UNSET && j.finish_ns > j.deadline_ns {
                missed += 1;
            }
            makespan = makespan.max(j.finish_ns);
        }
        Ok((missed, makespan))
    }

    fn exec(&mut self, allocation: &Allocation, mode: ExecutionBound) -> Result<(), SimError> {
        self.check_allocation(allocation)?;

        // Allocation-dependent runnable durations: remote reads, then
        // computation, then remote writes, as one preemptible block.
        for (r, runnable) in self.model.runnables().iter().enumerate() {
            let core = allocation.runnable_core[r];
            let pcore = self.platform.core(core);
            let instructions = match mode {
                ExecutionBound::Bcet => runnable.bcet_instructions,
                ExecutionBound::Wcet => runnable.wcet_instructions,
            };
            let mut total = crate::model::execution_time_ns(
                instructions,
                pcore.ticks_per_instruction,
                pcore.frequency_hz,
            );
            for &l in runnable.reads.iter().chain(&runnable.writes) {
                total += self.access_latency(l, core, allocation.label_core[l]);
            }
            self.duration_ns[r] = total;
        }

        self.jobs.clear();
        for heap in &mut self.ready {
            heap.clear();
        }
        self.running.fill(None);
        self.last_update.fill(0);
        self.dynamic_releases.clear();
        self.last_task_job.clear();
        self.last_task_job.resize(self.tasks.len(), None);
        self.segments.clear();
        self.open_segment.fill(None);
        let mut static_cursor = 0usize;
        let mut dynamic_seq = 0u32;

        loop {
            // Next event: a static release, a dynamic release, or a finish.
            let mut t = UNSET;
            if static_cursor < self.static_releases.len() {
                t = t.min(self.static_releases[static_cursor].release_ns);
            }
            if let Some(std::cmp::Reverse((at, _, _))) = self.dynamic_releases.peek() {
                t = t.min(*at);
            }
            for core in 0..self.running.len() {
                if let Some(j) = self.running[core] {
                    t = t.min(self.last_update[core] + self.jobs[j as usize].remaining_ns);
                }
            }
            if t == UNSET {
                break;
            }

            // 1) Advance running jobs to t; complete the ones that finish.
            for core in 0..self.running.len() {
                let Some(j) = self.running[core] else { continue };
                let elapsed = t - self.last_update[core];
                self.last_update[core] = t;
                let job = &mut self.jobs[j as usize];
                job.remaining_ns -= elapsed.min(job.remaining_ns);
                if job.remaining_ns > 0 {
                    continue;
                }
                job.finish_ns = t;
                self.running[core] = None;
                self.close_segment(core, t);
                // Wake successors whose last precedence this was.
                let succs = std::mem::take(&mut self.jobs[j as usize].succs);
                for &s in &succs {
                    let succ = &mut self.jobs[s as usize];
                    succ.preds -= 1;
                    if succ.preds == 0 {
                        succ.ready_ns = t;
                        self.ready[succ.core as usize].push(ReadyKey {
                            priority: self.tasks[succ.task as usize].priority,
                            release_ns: succ.release_ns,
                            task_name_rank: self.tasks[succ.task as usize].name_rank,
                            position: succ.position,
                            job: s,
                        });
                    }
                }
                self.jobs[j as usize].succs = succs;
                // Label writes release inter-process triggered tasks now.
                let runnable = self.jobs[j as usize].runnable as usize;
                if t < self.horizon_ns {
                    for &l in &self.model.runnable(runnable).writes {
                        for &task in &self.triggered_by[l] {
                            self.dynamic_releases.push(std::cmp::Reverse((t, dynamic_seq, task)));
                            dynamic_seq += 1;
                        }
                    }
                }
            }

            // 2) Collect every release at exactly t into one group.
            self.group.clear();
            while static_cursor < self.static_releases.len()
                && self.static_releases[static_cursor].release_ns == t
            {
                let task = self.static_releases[static_cursor].task as u32;
                self.instantiate_task_job(task, t, allocation)?;
                static_cursor += 1;
            }
            let mut dynamic_now: Vec<u32> = Vec::new();
            while let Some(&std::cmp::Reverse((at, _, task))) = self.dynamic_releases.peek() {
                if at > t {
                    break;
                }
                debug_assert_eq!(at, t);
                dynamic_now.push(task);
                self.dynamic_releases.pop();
            }
            dynamic_now.sort_unstable();
            for task in dynamic_now {
                self.instantiate_task_job(task, t, allocation)?;
            }

            // Same-instant writer-before-reader precedence among the group.
            self.wire_group_precedence();

            // Enqueue released jobs with no pending predecessors.
            for gi in 0..self.group.len() {
                let (task, first) = self.group[gi];
                let count = self.tasks[task as usize].runnables.len();
                for j in first..first + count as u32 {
                    let job = &mut self.jobs[j as usize];
                    if job.preds == 0 {
                        job.ready_ns = t;
                        self.ready[job.core as usize].push(ReadyKey {
                            priority: self.tasks[task as usize].priority,
                            release_ns: job.release_ns,
                            task_name_rank: self.tasks[task as usize].name_rank,
                            position: job.position,
                            job: j,
                        });
                    }
                }
            }

            // 3) Dispatch per core: preempt if a ready job outranks the
            // running one, then start the best ready job on idle cores.
            for core in 0..self.running.len() {
                if let Some(j) = self.running[core] {
                    let job = &self.jobs[j as usize];
                    let key = ReadyKey {
                        priority: self.tasks[job.task as usize].priority,
                        release_ns: job.release_ns,
                        task_name_rank: self.tasks[job.task as usize].name_rank,
                        position: job.position,
                        job: j,
                    };
                    if self.ready[core].peek().is_some_and(|top| *top > key) {
                        self.running[core] = None;
                        self.close_segment(core, t);
                        self.ready[core].push(key);
                    }
                }
                if self.running[core].is_none() {
                    if let Some(top) = self.ready[core].pop() {
                        let job = &mut self.jobs[top.job as usize];
                        if job.start_ns == UNSET {
                            job.start_ns = t;
                        }
                        self.running[core] = Some(top.job);
                        self.last_update[core] = t;
                        self.open_segment[core] = Some(self.segments.len());
                        self.segments.push(ExecSegment {
                            job: top.job as usize,
                            from_ns: t,
                            to_ns: UNSET,
                        });
                    }
                }
            }
        }

        debug_assert!(self.jobs.iter().all(|j| j.finish_ns != UNSET), "all released jobs complete");
        debug_assert!(self.segments.iter().all(|s| s.to_ns != UNSET), "all segments closed");
        Ok(())
    }

    /// Closes the open execution interval on `core` at instant `at`.
    fn close_segment(&mut self, core: usize, at: u64) {
        let index = self.open_segment[core].take().expect("core had an open segment");
        self.segments[index].to_ns = at;
    }

    fn instantiate_task_job(
        &mut self,
        task: u32,
        t: u64,
        allocation: &Allocation,
    ) -> Result<(), SimError> {
        let info = &self.tasks[task as usize];
        let count = info.runnables.len();
        if count == 0 {
            return Ok(());
        }
        if self.jobs.len() + count > MAX_RUNNABLE_JOBS {
            return Err(SimError::ActivationStorm);
        }
        let deadline = info.period_ns.map_or(UNSET, |p| t + p);
        let first = self.jobs.len() as u32;
        for (position, &runnable) in info.runnables.iter().enumerate() {
            let mut preds = 0;
            if position > 0 {
                preds = 1; // chained below via the predecessor's succs
            }
            self.jobs.push(Job {
                task,
                runnable,
                position: position as u32,
                core: allocation.runnable_core[runnable as usize] as u32,
                release_ns: t,
                deadline_ns: deadline,
                remaining_ns: self.duration_ns[runnable as usize],
                preds,
                succs: Vec::new(),
                ready_ns: UNSET,
                start_ns: UNSET,
                finish_ns: UNSET,
            });
            if position > 0 {
                let prev = first + position as u32 - 1;
                self.jobs[prev as usize].succs.push(first + position as u32);
            }
        }
        // Serialize with the previous job of the same task if unfinished.
        if let Some(prev_last) = self.last_task_job[task as usize] {
            if self.jobs[prev_last as usize].finish_ns == UNSET {
                self.jobs[prev_last as usize].succs.push(first);
                self.jobs[first as usize].preds += 1;
            }
        }
        self.last_task_job[task as usize] = Some(first + count as u32 - 1);
        self.group.push((task, first));
        Ok(())
    }

    /// Adds writer-before-reader edges among the task-jobs released at the
    /// current instant. Mutually dependent tasks (cycles in the
    /// write/read relation) are resolved at task granularity: only the
    /// higher-priority side keeps its writer precedence.
    fn wire_group_precedence(&mut self) {
        if self.group.len() < 2 {
            return;
        }
        let n = self.group.len();
        debug_assert!(n <= 64, "same-instant release groups stay small");
        let masks_intersect = |a: &[u64], b: &[u64]| a.iter().zip(b).any(|(x, y)| x & y != 0);

        // Candidate edges between group slots (task granularity).
        let mut edges = vec![0u64; n];
        for i in 0..n {
            for j in 0..n {
                if i == j || self.group[i].0 == self.group[j].0 {
                    continue;
                }
                let wi = &self.tasks[self.group[i].0 as usize].writes_mask;
                let rj = &self.tasks[self.group[j].0 as usize].reads_mask;
                if masks_intersect(wi, rj) {
                    edges[i] |= 1 << j;
                }
            }
        }
        if edges.iter().all(|&e| e == 0) {
            return;
        }

        // Reachability closure to find mutually dependent slots.
        let mut reach = edges.clone();
        loop {
            let mut changed = false;
            for i in 0..n {
                let mut acc = reach[i];
                let mut rest = reach[i];
                while rest != 0 {
                    let j = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    acc |= reach[j];
                }
                if acc != reach[i] {
                    reach[i] = acc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        for i in 0..n {
            let mut targets = edges[i];
            while targets != 0 {
                let j = targets.trailing_zeros() as usize;
                targets &= targets - 1;
                let mutual = reach[i] & (1 << j) != 0 && reach[j] & (1 << i) != 0;
                if mutual
                    && self.tasks[self.group[i].0 as usize].priority
                        <= self.tasks[self.group[j].0 as usize].priority
                {
                    continue; // cycle: only the higher-priority writer keeps precedence
                }
                self.wire_runnable_edges(i, j);
            }
        }
    }

    /// Runnable-level edges for a kept task-level edge: every writer-job in
    /// slot `i` precedes every reader-job in slot `j` sharing a label.
    fn wire_runnable_edges(&mut self, i: usize, j: usize) {
        let (task_a, first_a) = self.group[i];
        let (task_b, first_b) = self.group[j];
        let count_a = self.tasks[task_a as usize].runnables.len();
        let count_b = self.tasks[task_b as usize].runnables.len();
        for a in 0..count_a {
            let job_a = (first_a + a as u32) as usize;
            let writes = &self.runnable_writes_mask[self.jobs[job_a].runnable as usize];
            if writes.iter().all(|&w| w == 0) {
                continue;
            }
            for b in 0..count_b {
                let job_b = (first_b + b as u32) as usize;
                let reads = &self.runnable_reads_mask[self.jobs[job_b].runnable as usize];
                if writes.iter().zip(reads).any(|(w, r)| w & r != 0) {
                    self.jobs[job_a].succs.push(job_b as u32);
                    self.jobs[job_b].preds += 1;
                }
            }
        }
    }
}

/// One-shot convenience wrapper around [`Simulator`].
pub fn simulate(
    model: &AmaltheaModel,
    platform: &NocPlatform,
    allocation: &Allocation,
    mode: ExecutionBound,
) -> Result<SimResult, SimError> {
    Simulator::new(model, platform)?.run(allocation, mode)
}

/// Renders the job records as CSV with the stable header
/// `task,runnable,core,release_ns,start_ns,finish_ns,deadline_ns,missed`.
/// `deadline_ns` is empty for deadline-free jobs; `missed` is
/// `true`/`false`.
pub fn trace_csv(result: &SimResult, model: &AmaltheaModel, platform: &NocPlatform) -> String {
    let mut out = String::from("task,runnable,core,release_ns,start_ns,finish_ns,deadline_ns,missed\n");
    for job in &result.jobs {
        let deadline = job.deadline_ns.map(|d| d.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            model.task(job.task).name,
            model.runnable(job.runnable).name,
            platform.core(job.core).name,
            job.release_ns,
            job.start_ns,
            job.finish_ns,
            deadline,
            job.missed,
        ));
    }
    out
}
