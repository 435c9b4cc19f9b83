//! Design-space exploration for multi-core automotive real-time systems.
//!
//! The crate models embedded software the way AMALTHEA-style tooling does —
//! labels (shared data), runnables (schedulable functions), tasks
//! (fixed-priority containers), stimuli, and a hardware mesh of cores — and
//! builds three things on top:
//!
//! - a deterministic hyperperiod simulator that checks a runnable/label
//!   allocation for deadline misses on a mesh network-on-chip
//!   ([`sim`], [`noc`]),
//! - a genetic algorithm that searches the allocation space for
//!   deadline-safe, low-makespan placements ([`ga`]),
//! - an XML interchange dialect plus a generator for the DemoCar
//!   engine-management benchmark used throughout the examples and tests
//!   ([`xml`], [`democar`]).
//!
//! Everything is reproducible: simulation is single-threaded and
//! event-ordered by a total tie-break, and optimization derives all
//! randomness from an explicit seed (island parallelism included).
//!
//! ```
//! use amalthea_kit::democar::{build_democar, build_democar_platform};
//! use amalthea_kit::model::ExecutionBound;
//! use amalthea_kit::sim::{simulate, Allocation};
//!
//! let model = build_democar();
//! let platform = build_democar_platform(2, 2, 4).unwrap();
//! let everything_on_one_core = Allocation::uniform(&model, 0);
//! let result = simulate(&model, &platform, &everything_on_one_core, ExecutionBound::Wcet).unwrap();
//! assert_eq!(result.total_deadlines, 152);
//! ```

pub mod cli;
pub mod democar;
pub mod ga;
pub mod model;
pub mod noc;
pub mod sim;
pub mod xml;
