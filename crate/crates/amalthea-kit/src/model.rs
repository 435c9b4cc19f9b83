//! In-memory representation of an AMALTHEA-style software/hardware model.
//!
//! The model is a set of ordered entity lists (labels, runnables, tasks,
//! stimuli, core types, quartzes, cores) plus derived lookup maps and
//! label reader/writer indices. Entities reference each other by list
//! index; the index order is semantically meaningful (it is the execution
//! order inside tasks and the canonical serialization order).
//!
//! All durations derived here are integer nanoseconds; stimulus times are
//! stored in nanoseconds too, while model files carry microseconds (see
//! the `xml` module). Integer time keeps hyperperiod arithmetic and the
//! simulator exact.

use std::collections::HashMap;
use std::fmt;

use num_integer::Integer;
use thiserror::Error;

/// A named data element of fixed bit length; the unit of communication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Label {
    pub id: String,
    pub name: String,
    pub bit_length: u32,
}

/// An atomic executable entity; the unit of scheduling and allocation.
///
/// `reads` and `writes` are ordered lists of label indices. Execution
/// bounds are abstract instruction counts; wall-clock time is derived per
/// core via [`AmaltheaModel::execution_time`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Runnable {
    pub id: String,
    pub name: String,
    /// Memory footprint in bits.
    pub size_bits: u64,
    pub reads: Vec<usize>,
    pub writes: Vec<usize>,
    pub bcet_instructions: u64,
    pub wcet_instructions: u64,
}

/// An ordered cluster of runnables with one priority and one stimulus.
///
/// Larger priority values are more urgent. The runnable list order is the
/// intra-task execution order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub id: String,
    pub name: String,
    pub priority: u32,
    /// Stimulus index.
    pub stimulus: usize,
    /// Runnable indices in execution order; must be non-empty.
    pub runnables: Vec<usize>,
}

/// Activation source of a task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StimulusKind {
    /// Fires at `offset_ns + k * period_ns` for every k ≥ 0.
    Periodic { period_ns: u64, offset_ns: u64 },
    /// Fires at most once per `min_inter_arrival_ns`; carries no concrete
    /// activation instants, so the deterministic simulator ignores it.
    Sporadic { min_inter_arrival_ns: u64 },
    /// Fires exactly once.
    Single { time_ns: u64 },
    /// Fires at each listed instant (strictly increasing).
    Pattern { times_ns: Vec<u64> },
    /// Fires whenever `trigger_label` is written. If `injection_period_ns`
    /// is set, the environment additionally writes the trigger label at
    /// `k * injection_period_ns`, modeling external events (no in-model
    /// writer is required).
    InterProcess {
        trigger_label: usize,
        injection_period_ns: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stimulus {
    pub id: String,
    pub kind: StimulusKind,
}

/// Core timing class: clock ticks consumed per instruction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreType {
    pub id: String,
    pub ticks_per_instruction: u64,
}

/// Clock source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quartz {
    pub id: String,
    pub frequency_hz: u64,
}

/// A processing core at a mesh position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Core {
    pub id: String,
    pub name: String,
    /// CoreType index.
    pub core_type: usize,
    /// Quartz index.
    pub quartz: usize,
    /// Mesh coordinate (x, y).
    pub position: (u32, u32),
}

/// Execution bound selector for time derivation and simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionBound {
    Bcet,
    Wcet,
}

/// A validation finding: the offending entity and the violated rule.
///
/// Violations are data, not failures; [`AmaltheaModel::validate`] returns
/// all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Human-readable entity designation, e.g. `runnable "APedSensor"`.
    pub entity: String,
    /// Description of the violated rule.
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.message)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    /// The model has no periodic task, so no hyperperiod is defined.
    #[error("no hyperperiod defined: the model has no periodic task")]
    NoHyperperiod,
}

/// Container of all model entities with index, id and name lookup.
///
/// Constructed via [`ModelBuilder`]; immutable afterwards, so concurrent
/// readers need no synchronization.
///
/// Index-based accessors (`label(i)`, `runnable(i)`, …) panic on an
/// out-of-range index — that is a caller contract violation, reported
/// loudly rather than masked. Keyed accessors (`*_by_id`, `*_by_name`)
/// return `None` for absent keys.
#[derive(Debug, Clone)]
pub struct AmaltheaModel {
    labels: Vec<Label>,
    runnables: Vec<Runnable>,
    tasks: Vec<Task>,
    stimuli: Vec<Stimulus>,
    core_types: Vec<CoreType>,
    quartzes: Vec<Quartz>,
    cores: Vec<Core>,

    label_by_id: HashMap<String, usize>,
    label_by_name: HashMap<String, usize>,
    runnable_by_id: HashMap<String, usize>,
    runnable_by_name: HashMap<String, usize>,
    task_by_id: HashMap<String, usize>,
    task_by_name: HashMap<String, usize>,
    stimulus_by_id: HashMap<String, usize>,
    core_type_by_id: HashMap<String, usize>,
    quartz_by_id: HashMap<String, usize>,
    core_by_id: HashMap<String, usize>,

    /// Per label: indices of runnables writing it, in model runnable order.
    writers_of: Vec<Vec<usize>>,
    /// Per label: indices of runnables reading it, in model runnable order.
    readers_of: Vec<Vec<usize>>,
}

impl PartialEq for AmaltheaModel {
    fn eq(&self, other: &Self) -> bool {
        // The lookup maps and reader/writer indices are derived from the
        // entity lists, so list equality is model equality.
        self.labels == other.labels
            && self.runnables == other.runnables
            && self.tasks == other.tasks
            && self.stimuli == other.stimuli
            && self.core_types == other.core_types
            && self.quartzes == other.quartzes
            && self.cores == other.cores
    }
}

impl Eq for AmaltheaModel {}

macro_rules! indexed_access {
    ($get:ident, $by_id:ident, $index_of:ident, $count:ident, $field:ident, $map:ident, $ty:ty, $kind:literal) => {
        #[doc = concat!("Returns the ", $kind, " at `index`; panics if out of range.")]
        pub fn $get(&self, index: usize) -> &$ty {
            match self.$field.get(index) {
                Some(e) => e,
                None => panic!(
                    concat!($kind, " index {} out of range (count {})"),
                    index,
                    self.$field.len()
                ),
            }
        }

        #[doc = concat!("Looks up a ", $kind, " by id.")]
        pub fn $by_id(&self, id: &str) -> Option<&$ty> {
            self.$map.get(id).map(|&i| &self.$field[i])
        }

        #[doc = concat!("Returns the index of a ", $kind, " held by this model; panics for a foreign entity.")]
        pub fn $index_of(&self, entity: &$ty) -> usize {
            match self.$map.get(entity.id.as_str()) {
                Some(&i) if self.$field[i] == *entity => i,
                _ => panic!(concat!($kind, " {:?} does not belong to this model"), entity.id),
            }
        }

        #[doc = concat!("Number of ", $kind, "s.")]
        pub fn $count(&self) -> usize {
            self.$field.len()
        }
    };
}

impl AmaltheaModel {
    indexed_access!(label, label_by_id, index_of_label, label_count, labels, label_by_id, Label, "label");
    indexed_access!(runnable, runnable_by_id, index_of_runnable, runnable_count, runnables, runnable_by_id, Runnable, "runnable");
    indexed_access!(task, task_by_id, index_of_task, task_count, tasks, task_by_id, Task, "task");
    indexed_access!(stimulus, stimulus_by_id, index_of_stimulus, stimulus_count, stimuli, stimulus_by_id, Stimulus, "stimulus");
    indexed_access!(core_type, core_type_by_id, index_of_core_type, core_type_count, core_types, core_type_by_id, CoreType, "core type");
    indexed_access!(quartz, quartz_by_id, index_of_quartz, quartz_count, quartzes, quartz_by_id, Quartz, "quartz");
    indexed_access!(core, core_by_id, index_of_core, core_count, cores, core_by_id, Core, "core");

    /// Looks up a label by name.
    pub fn label_by_name(&self, name: &str) -> Option<&Label> {
        self.label_by_name.get(name).map(|&i| &self.labels[i])
    }

    /// Looks up a runnable by name.
    pub fn runnable_by_name(&self, name: &str) -> Option<&Runnable> {
        self.runnable_by_name.get(name).map(|&i| &self.runnables[i])
    }

    /// Looks up a task by name.
    pub fn task_by_name(&self, name: &str) -> Option<&Task> {
        self.task_by_name.get(name).map(|&i| &self.tasks[i])
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn runnables(&self) -> &[Runnable] {
        &self.runnables
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn stimuli(&self) -> &[Stimulus] {
        &self.stimuli
    }

    pub fn core_types(&self) -> &[CoreType] {
        &self.core_types
    }

    pub fn quartzes(&self) -> &[Quartz] {
        &self.quartzes
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    /// Runnables writing the label at `label_index`, in model runnable
    /// order. Panics on an out-of-range index.
    pub fn writers_of_label(&self, label_index: usize) -> &[usize] {
        assert!(
            label_index < self.labels.len(),
            "label index {label_index} out of range (count {})",
            self.labels.len()
        );
        &self.writers_of[label_index]
    }

    /// Runnables reading the label at `label_index`, in model runnable
    /// order. Panics on an out-of-range index.
    pub fn readers_of_label(&self, label_index: usize) -> &[usize] {
        assert!(
            label_index < self.labels.len(),
            "label index {label_index} out of range (count {})",
            self.labels.len()
        );
        &self.readers_of[label_index]
    }

    /// All derived data-dependency edges as (writer, label, reader)
    /// runnable/label index triples, in (label, writer, reader) order.
    pub fn dependencies(&self) -> Vec<(usize, usize, usize)> {
        let mut edges = Vec::new();
        for (l, writers) in self.writers_of.iter().enumerate() {
            for &w in writers {
                for &r in &self.readers_of[l] {
                    edges.push((w, l, r));
                }
            }
        }
        edges
    }

    /// Least common multiple of all periodic task periods, in microseconds.
    ///
    /// Non-periodic stimuli are ignored. Errors if no task is periodic.
    pub fn hyperperiod_us(&self) -> Result<u64, ModelError> {
        self.hyperperiod_ns().map(|ns| ns / 1_000)
    }

    /// Hyperperiod in nanoseconds (the simulation horizon).
    pub fn hyperperiod_ns(&self) -> Result<u64, ModelError> {
        let mut lcm: Option<u64> = None;
        for task in &self.tasks {
            if let StimulusKind::Periodic { period_ns, .. } = self.stimuli[task.stimulus].kind {
                lcm = Some(match lcm {
                    Some(acc) => acc.lcm(&period_ns),
                    None => period_ns,
                });
            }
        }
        lcm.ok_or(ModelError::NoHyperperiod)
    }

    /// Wall-clock execution time of a runnable on a core, in nanoseconds:
    /// round-to-nearest of `instructions × ticks_per_instruction × 10⁹ /
    /// frequency_hz`, with a minimum of 1 ns.
    pub fn execution_time(&self, runnable_index: usize, core_index: usize, bound: ExecutionBound) -> u64 {
        let runnable = self.runnable(runnable_index);
        let core = self.core(core_index);
        let instructions = match bound {
            ExecutionBound::Bcet => runnable.bcet_instructions,
            ExecutionBound::Wcet => runnable.wcet_instructions,
        };
        execution_time_ns(
            instructions,
            self.core_types[core.core_type].ticks_per_instruction,
            self.quartzes[core.quartz].frequency_hz,
        )
    }

    /// Checks every type invariant and cross-reference; returns all
    /// violations found (empty means the model is valid).
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();

        check_unique(&mut v, self.labels.iter().map(|l| (l.id.as_str(), format!("label {:?}", l.name))), "id");
        check_unique(&mut v, self.labels.iter().map(|l| (l.name.as_str(), format!("label {:?}", l.name))), "name");
        check_unique(&mut v, self.runnables.iter().map(|r| (r.id.as_str(), format!("runnable {:?}", r.name))), "id");
        check_unique(&mut v, self.runnables.iter().map(|r| (r.name.as_str(), format!("runnable {:?}", r.name))), "name");
        check_unique(&mut v, self.tasks.iter().map(|t| (t.id.as_str(), format!("task {:?}", t.name))), "id");
        check_unique(&mut v, self.tasks.iter().map(|t| (t.name.as_str(), format!("task {:?}", t.name))), "name");
        check_unique(&mut v, self.stimuli.iter().map(|s| (s.id.as_str(), format!("stimulus {:?}", s.id))), "id");
        check_unique(&mut v, self.core_types.iter().map(|c| (c.id.as_str(), format!("core type {:?}", c.id))), "id");
        check_unique(&mut v, self.quartzes.iter().map(|q| (q.id.as_str(), format!("quartz {:?}", q.id))), "id");
        check_unique(&mut v, self.cores.iter().map(|c| (c.id.as_str(), format!("core {:?}", c.name))), "id");
        check_unique(&mut v, self.cores.iter().map(|c| (c.name.as_str(), format!("core {:?}", c.name))), "name");

        for label in &self.labels {
            if label.bit_length == 0 {
                v.push(Violation {
                    entity: format!("label {:?}", label.name),
                    message: "bit length must be at least 1".into(),
                });
            }
        }

        for runnable in &self.runnables {
            let entity = || format!("runnable {:?}", runnable.name);
            if runnable.bcet_instructions == 0 {
                v.push(Violation { entity: entity(), message: "BCET must be a positive instruction count".into() });
            }
            if runnable.bcet_instructions > runnable.wcet_instructions {
                v.push(Violation {
                    entity: entity(),
                    message: format!(
                        "BCET {} exceeds WCET {}",
                        runnable.bcet_instructions, runnable.wcet_instructions
                    ),
                });
            }
            for (&l, role) in runnable
                .reads
                .iter()
                .map(|l| (l, "read"))
                .chain(runnable.writes.iter().map(|l| (l, "write")))
            {
                if l >= self.labels.len() {
                    v.push(Violation {
                        entity: entity(),
                        message: format!("dangling {role} label reference (index {l})"),
                    });
                }
            }
        }

        for task in &self.tasks {
            let entity = || format!("task {:?}", task.name);
            if task.runnables.is_empty() {
                v.push(Violation { entity: entity(), message: "runnable list must be non-empty".into() });
            }
            for &r in &task.runnables {
                if r >= self.runnables.len() {
                    v.push(Violation {
                        entity: entity(),
                        message: format!("dangling runnable reference (index {r})"),
                    });
                }
            }
            if task.stimulus >= self.stimuli.len() {
                v.push(Violation {
                    entity: entity(),
                    message: format!("dangling stimulus reference (index {})", task.stimulus),
                });
            }
        }
        {
            let mut by_priority: HashMap<u32, &str> = HashMap::new();
            for task in &self.tasks {
                if let Some(first) = by_priority.insert(task.priority, &task.name) {
                    v.push(Violation {
                        entity: format!("task {:?}", task.name),
                        message: format!("duplicate priority {} (also used by task {:?})", task.priority, first),
                    });
                }
            }
        }

        for stimulus in &self.stimuli {
            let entity = || format!("stimulus {:?}", stimulus.id);
            let mut times: Vec<(u64, &str)> = Vec::new();
            match &stimulus.kind {
                StimulusKind::Periodic { period_ns, offset_ns } => {
                    if *period_ns == 0 {
                        v.push(Violation { entity: entity(), message: "period must be at least 1 µs".into() });
                    }
                    times.push((*period_ns, "period"));
                    times.push((*offset_ns, "offset"));
                }
                StimulusKind::Sporadic { min_inter_arrival_ns } => {
                    if *min_inter_arrival_ns == 0 {
                        v.push(Violation {
                            entity: entity(),
                            message: "minimum inter-arrival must be at least 1 µs".into(),
                        });
                    }
                    times.push((*min_inter_arrival_ns, "minimum inter-arrival"));
                }
                StimulusKind::Single { time_ns } => times.push((*time_ns, "time")),
                StimulusKind::Pattern { times_ns } => {
                    if times_ns.windows(2).any(|w| w[0] >= w[1]) {
                        v.push(Violation {
                            entity: entity(),
                            message: "pattern times must be strictly increasing".into(),
                        });
                    }
                    times.extend(times_ns.iter().map(|&t| (t, "pattern time")));
                }
                StimulusKind::InterProcess { trigger_label, injection_period_ns } => {
                    if *trigger_label >= self.labels.len() {
                        v.push(Violation {
                            entity: entity(),
                            message: format!("dangling trigger label reference (index {trigger_label})"),
                        });
                    }
                    if let Some(p) = injection_period_ns {
                        if *p == 0 {
                            v.push(Violation {
                                entity: entity(),
                                message: "injection period must be at least 1 µs".into(),
                            });
                        }
                        times.push((*p, "injection period"));
                    }
                }
            }
            // Model files carry microseconds, so sub-µs stimulus times
            // cannot round-trip and are rejected.
            for (t, what) in times {
                if t % 1_000 != 0 {
                    v.push(Violation {
                        entity: entity(),
                        message: format!("{what} of {t} ns is not a whole number of microseconds"),
                    });
                }
            }
        }

        for core_type in &self.core_types {
            if core_type.ticks_per_instruction == 0 {
                v.push(Violation {
                    entity: format!("core type {:?}", core_type.id),
                    message: "ticks per instruction must be at least 1".into(),
                });
            }
        }
        for quartz in &self.quartzes {
            if quartz.frequency_hz == 0 {
                v.push(Violation {
                    entity: format!("quartz {:?}", quartz.id),
                    message: "frequency must be at least 1 Hz".into(),
                });
            }
        }

        let mut by_position: HashMap<(u32, u32), &str> = HashMap::new();
        for core in &self.cores {
            let entity = || format!("core {:?}", core.name);
            if core.core_type >= self.core_types.len() {
                v.push(Violation {
                    entity: entity(),
                    message: format!("dangling core type reference (index {})", core.core_type),
                });
            }
            if core.quartz >= self.quartzes.len() {
                v.push(Violation {
                    entity: entity(),
                    message: format!("dangling quartz reference (index {})", core.quartz),
                });
            }
            if let Some(first) = by_position.insert(core.position, &core.name) {
                v.push(Violation {
                    entity: entity(),
                    message: format!("duplicate position {:?} (also used by core {:?})", core.position, first),
                });
            }
        }

        v
    }
}

fn check_unique<'a>(
    violations: &mut Vec<Violation>,
    keyed: impl Iterator<Item = (&'a str, String)>,
    what: &str,
) {
    let mut seen: HashMap<&str, String> = HashMap::new();
    for (key, entity) in keyed {
        if let Some(first) = seen.insert(key, entity.clone()) {
            violations.push(Violation {
                entity,
                message: format!("duplicate {what} {key:?} (also used by {first})"),
            });
        }
    }
}

/// Converts an instruction count to nanoseconds on a core with the given
/// timing parameters: round-to-nearest of
/// `instructions × ticks_per_instruction × 10⁹ / frequency_hz`, minimum 1 ns.
pub fn execution_time_ns(instructions: u64, ticks_per_instruction: u64, frequency_hz: u64) -> u64 {
    let numerator = instructions as u128 * ticks_per_instruction as u128 * 1_000_000_000u128;
    let rounded = (numerator + frequency_hz as u128 / 2) / frequency_hz as u128;
    (rounded as u64).max(1)
}

/// Incremental model constructor.
///
/// The builder accepts anything — including broken cross-references and
/// duplicate identifiers — because [`AmaltheaModel::validate`] is the
/// designated place to report such defects as data. Lookup maps keep the
/// first occurrence of a duplicated key.
#[derive(Debug, Default)]
pub struct ModelBuilder {
    labels: Vec<Label>,
    runnables: Vec<Runnable>,
    tasks: Vec<Task>,
    stimuli: Vec<Stimulus>,
    core_types: Vec<CoreType>,
    quartzes: Vec<Quartz>,
    cores: Vec<Core>,
}

impl ModelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_label(&mut self, id: impl Into<String>, name: impl Into<String>, bit_length: u32) -> usize {
        self.labels.push(Label { id: id.into(), name: name.into(), bit_length });
        self.labels.len() - 1
    }

    #[allow(clippy::too_many_arguments)]
    pub fn add_runnable(
        &mut self,
        id: impl Into<String>,
        name: impl Into<String>,
        size_bits: u64,
        reads: Vec<usize>,
        writes: Vec<usize>,
        bcet_instructions: u64,
        wcet_instructions: u64,
    ) -> usize {
        self.runnables.push(Runnable {
            id: id.into(),
            name: name.into(),
            size_bits,
            reads,
            writes,
            bcet_instructions,
            wcet_instructions,
        });
        self.runnables.len() - 1
    }

    pub fn add_task(
        &mut self,
        id: impl Into<String>,
        name: impl Into<String>,
        priority: u32,
        stimulus: usize,
        runnables: Vec<usize>,
    ) -> usize {
        self.tasks.push(Task { id: id.into(), name: name.into(), priority, stimulus, runnables });
        self.tasks.len() - 1
    }

    pub fn add_stimulus(&mut self, id: impl Into<String>, kind: StimulusKind) -> usize {
        self.stimuli.push(Stimulus { id: id.into(), kind });
        self.stimuli.len() - 1
    }

    pub fn add_core_type(&mut self, id: impl Into<String>, ticks_per_instruction: u64) -> usize {
        self.core_types.push(CoreType { id: id.into(), ticks_per_instruction });
        self.core_types.len() - 1
    }

    pub fn add_quartz(&mut self, id: impl Into<String>, frequency_hz: u64) -> usize {
        self.quartzes.push(Quartz { id: id.into(), frequency_hz });
        self.quartzes.len() - 1
    }

    pub fn add_core(
        &mut self,
        id: impl Into<String>,
        name: impl Into<String>,
        core_type: usize,
        quartz: usize,
        position: (u32, u32),
    ) -> usize {
        self.cores.push(Core { id: id.into(), name: name.into(), core_type, quartz, position });
        self.cores.len() - 1
    }

    /// Finalizes the model, computing lookup maps and the label
    /// reader/writer indices.
    pub fn build(self) -> AmaltheaModel {
        fn index_map<'a>(keys: impl Iterator<Item = &'a str>) -> HashMap<String, usize> {
            let mut map = HashMap::new();
            for (i, key) in keys.enumerate() {
                map.entry(key.to_owned()).or_insert(i);
            }
            map
        }

        let n_labels = self.labels.len();
        let mut writers_of = vec![Vec::new(); n_labels];
        let mut readers_of = vec![Vec::new(); n_labels];
        for (r, runnable) in self.runnables.iter().enumerate() {
            for &l in &runnable.writes {
                if l < n_labels && !writers_of[l].contains(&r) {
                    writers_of[l].push(r);
                }
            }
            for &l in &runnable.reads {
                if l < n_labels && !readers_of[l].contains(&r) {
                    readers_of[l].push(r);
                }
            }
        }

        AmaltheaModel {
            label_by_id: index_map(self.labels.iter().map(|l| l.id.as_str())),
            label_by_name: index_map(self.labels.iter().map(|l| l.name.as_str())),
            runnable_by_id: index_map(self.runnables.iter().map(|r| r.id.as_str())),
            runnable_by_name: index_map(self.runnables.iter().map(|r| r.name.as_str())),
            task_by_id: index_map(self.tasks.iter().map(|t| t.id.as_str())),
            task_by_name: index_map(self.tasks.iter().map(|t| t.name.as_str())),
            stimulus_by_id: index_map(self.stimuli.iter().map(|s| s.id.as_str())),
            core_type_by_id: index_map(self.core_types.iter().map(|c| c.id.as_str())),
            quartz_by_id: index_map(self.quartzes.iter().map(|q| q.id.as_str())),
            core_by_id: index_map(self.cores.iter().map(|c| c.id.as_str())),
            writers_of,
            readers_of,
            labels: self.labels,
            runnables: self.runnables,
            tasks: self.tasks,
            stimuli: self.stimuli,
            core_types: self.core_types,
            quartzes: self.quartzes,
            cores: self.cores,
        }
    }
}
