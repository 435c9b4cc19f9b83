//! Programmatic construction of the DemoCar engine-control benchmark: 6
//! tasks, 18 runnables, and 62 labels, plus the default NoC platform used
//! in the allocation experiments.
//!
//! DemoCar models a simplified gasoline-engine controller. Four tasks are
//! periodic (5/10/20/100 ms, relative deadlines equal to the periods) and
//! two are event-driven with no deadlines: `CylNumTriggeredTask` reacts to
//! crank events (writes of `CylinderNumber`), and `ActuatorTask` reacts to
//! `TriggeredCylinderNumber`, which `CylNumObserverEntity` produces — so a
//! crank event ripples through cylinder-number observation into ignition
//! and injection actuation.
//!
//! No runnable writes `CylinderNumber` itself: crank events come from the
//! engine. The generated stimulus therefore carries an environment
//! injection period ([`DEFAULT_CRANK_PERIOD_US`]), configurable via
//! [`build_democar_with_crank_period`].

use crate::model::{AmaltheaModel, ModelBuilder, StimulusKind};
use crate::noc::{NocError, NocPlatform, DEFAULT_FLIT_BITS, DEFAULT_HOP_LATENCY_NS};

/// Default period of environment crank events driving
/// `CylNumTriggeredTask`, in microseconds. 2.5 ms corresponds to one
/// ignition event at ~4800 rpm on an 8-cylinder four-stroke engine — a
/// demanding but realistic operating point that keeps the event-driven
/// load significant next to the periodic tasks.
pub const DEFAULT_CRANK_PERIOD_US: u64 = 2_500;

/// Clock ticks per instruction of the DemoCar platform cores. Together
/// with the 200 MHz quartz this puts total worst-case demand near 2.2
/// cores' worth of work per hyperperiod: two active cores are provably
/// overloaded, three suffice with careful placement, four leave headroom —
/// the regime where allocation search is interesting.
pub const DEMOCAR_TICKS_PER_INSTRUCTION: u64 = 45;

/// Quartz frequency of the DemoCar platform cores, in Hz (200 MHz).
pub const DEMOCAR_FREQUENCY_HZ: u64 = 200_000_000;

/// Labels: (name, bit length), in canonical (alphabetical) model order.
/// `AcceleratorPedalPositions` and `DesiredThrottlePos` are referenced by
/// no runnable but belong to the benchmark and are retained.
const LABELS: &[(&str, u32)] = &[
    ("AcceleratorPedalPosition1", 16),
    ("AcceleratorPedalPosition2", 16),
    ("AcceleratorPedalPositions", 16),
    ("AFRFeedbackFlag", 1),
    ("BaseFuelMassPerStroke", 16),
    ("BatteryVoltage", 16),
    ("BatVoltCorr", 16),
    ("CoolantTemperature", 8),
    ("CrankFlag", 1),
    ("CylinderNumber", 8),
    ("DesiredThrottlePos", 16),
    ("DesiredThrottlePosOut", 16),
    ("EngineSpeed", 16),
    ("FuelEnabled", 1),
    ("IdleFlag", 1),
    ("IdleIgnitionCorrection", 8),
    ("IdleOLFlag", 1),
    ("IdleSpeedSetpoint", 16),
    ("IdleThrottleCorrection", 16),
    ("IgnitionOn", 1),
    ("IgnitionTime1", 16),
    ("IgnitionTime2", 16),
    ("IgnitionTime3", 16),
    ("IgnitionTime4", 16),
    ("IgnitionTime5", 16),
    ("IgnitionTime6", 16),
    ("IgnitionTime7", 16),
    ("IgnitionTime8", 16),
    ("IgnitionTiming", 8),
    ("InjTimeCyl1", 16),
    ("InjTimeCyl2", 16),
    ("InjTimeCyl3", 16),
    ("InjTimeCyl4", 16),
    ("InjTimeCyl5", 16),
    ("InjTimeCyl6", 16),
    ("InjTimeCyl7", 16),
    ("InjTimeCyl8", 16),
    ("InletAirTemperature", 8),
    ("LambdaCat1", 16),
    ("LambdaCat2", 16),
    ("MafRateOut", 16),
    ("MAFSensor", 16),
    ("MAFSensorVoltage", 8),
    ("OverrunFlag", 1),
    ("OverrunFuelShutoffFlag", 1),
    ("OverrunIgnitionRetard", 8),
    ("PedalAngle1", 16),
    ("PedalAngle2", 16),
    ("PowerUpComplete", 1),
    ("RateOfThrottleChange", 16),
    ("ThrottleAngle1", 16),
    ("ThrottleAngle2", 16),
    ("ThrottleImpulseBeta1", 16),
    ("ThrottleImpulseBeta2", 16),
    ("ThrottlePosition1", 16),
    ("ThrottlePosition2", 16),
    ("TotalFuelMassPerStroke", 16),
    ("TransientFuelMassPerStroke", 16),
    ("TriggeredCylinderNumber", 8),
    ("UpdatePeriod", 16),
    ("VehicleSpeed", 16),
    ("VotedPedalPosition", 16),
];

struct RunnableRow {
    task: &'static str,
    name: &'static str,
    size_bits: u64,
    reads: &'static [&'static str],
    writes: &'static [&'static str],
    bcet: u64,
    wcet: u64,
}

macro_rules! row {
    ($task:literal, $name:literal, $size:literal, [$($r:literal),*], [$($w:literal),*], $bcet:literal, $wcet:literal) => {
        RunnableRow {
            task: $task,
            name: $name,
            size_bits: $size,
            reads: &[$($r),*],
            writes: &[$($w),*],
            bcet: $bcet,
            wcet: $wcet,
        }
    };
}

/// Runnables in model order, grouped by task exactly as the benchmark
/// defines them; the in-task order below is the execution order.
const RUNNABLES: &[RunnableRow] = &[
    row!("CylNumTriggeredTask", "CylNumObserverEntity", 55600,
        ["CylinderNumber"],
        ["TriggeredCylinderNumber"],
        434, 1145),
    row!("ActuatorTask", "IgnitionSWCSyncEntity", 72512,
        ["IgnitionTiming", "EngineSpeed", "TriggeredCylinderNumber"],
        ["IgnitionTime1", "IgnitionTime2", "IgnitionTime3", "IgnitionTime4",
         "IgnitionTime5", "IgnitionTime6", "IgnitionTime7", "IgnitionTime8"],
        2728, 4921),
    row!("ActuatorTask", "InjectionSWCSync", 69824,
        ["TotalFuelMassPerStroke", "CrankFlag", "TriggeredCylinderNumber", "EngineSpeed", "BatVoltCorr"],
        ["InjTimeCyl1", "InjTimeCyl2", "InjTimeCyl3", "InjTimeCyl4",
         "InjTimeCyl5", "InjTimeCyl6", "InjTimeCyl7", "InjTimeCyl8"],
        1644, 3302),
    row!("Task5ms", "MassAirFlowSWCEntity", 56608,
        ["MAFSensorVoltage"],
        ["MAFSensor"],
        55, 172),
    row!("Task5ms", "ThrottleSensSWCEntity", 58816,
        ["ThrottleAngle1", "ThrottleAngle2"],
        ["ThrottlePosition1", "ThrottlePosition2"],
        113, 337),
    row!("Task5ms", "APedSensor", 66288,
        ["PedalAngle1", "PedalAngle2"],
        ["AcceleratorPedalPosition1", "AcceleratorPedalPosition2"],
        555, 964),
    row!("Task10ms", "APedVoterSWCEntity", 56832,
        ["AcceleratorPedalPosition1", "AcceleratorPedalPosition2"],
        ["VotedPedalPosition"],
        87, 287),
    row!("Task10ms", "ThrottleCtrlEntity", 70944,
        ["CoolantTemperature", "EngineSpeed", "MAFSensor", "ThrottlePosition1", "ThrottlePosition2"],
        ["BaseFuelMassPerStroke", "MafRateOut"],
        3664, 5783),
    row!("Task10ms", "ThrottleActuatorEntity", 128464,
        ["CoolantTemperature", "CrankFlag", "DesiredThrottlePosOut", "EngineSpeed",
         "FuelEnabled", "InletAirTemperature", "OverrunFlag", "UpdatePeriod"],
        ["RateOfThrottleChange", "ThrottleImpulseBeta1", "ThrottleImpulseBeta2"],
        3788, 5913),
    row!("Task10ms", "BaseFuelMassEntity", 70944,
        ["CoolantTemperature", "EngineSpeed", "MAFSensor", "ThrottlePosition1", "ThrottlePosition2"],
        ["BaseFuelMassPerStroke", "MafRateOut"],
        3664, 5783),
    row!("Task10ms", "ThrottleChangeSWCEntity", 128464,
        ["CoolantTemperature", "CrankFlag", "DesiredThrottlePosOut", "EngineSpeed",
         "FuelEnabled", "InletAirTemperature", "OverrunFlag", "UpdatePeriod"],
        ["RateOfThrottleChange", "ThrottleImpulseBeta1", "ThrottleImpulseBeta2"],
        3788, 5913),
    row!("Task10ms", "TransFuelMassSWCEntity", 128464,
        ["InletAirTemperature", "CoolantTemperature", "MafRateOut", "EngineSpeed",
         "UpdatePeriod", "RateOfThrottleChange", "ThrottleImpulseBeta1", "ThrottleImpulseBeta2",
         "OverrunFuelShutoffFlag", "CrankFlag", "FuelEnabled", "BaseFuelMassPerStroke"],
        ["TransientFuelMassPerStroke"],
        3985, 6376),
    row!("Task10ms", "IgnitionSWCEntity", 66784,
        ["CrankFlag", "MafRateOut", "EngineSpeed", "InletAirTemperature", "OverrunIgnitionRetard",
         "IdleFlag", "IdleOLFlag", "IdleIgnitionCorrection", "CoolantTemperature"],
        ["IgnitionTiming"],
        3047, 4537),
    row!("Task10ms", "TotalFuelMassSWCEntity", 66432,
        ["CrankFlag", "LambdaCat1", "LambdaCat2", "CoolantTemperature",
         "OverrunFuelShutoffFlag", "TransientFuelMassPerStroke"],
        ["TotalFuelMassPerStroke"],
        743, 1354),
    row!("Task20ms", "OperatingModeSWCEntity", 139392,
        ["EngineSpeed", "VehicleSpeed", "IgnitionOn", "PowerUpComplete",
         "VotedPedalPosition", "IdleSpeedSetpoint"],
        ["OverrunFuelShutoffFlag", "IdleFlag", "IdleOLFlag", "CrankFlag", "OverrunFlag",
         "FuelEnabled", "AFRFeedbackFlag", "OverrunIgnitionRetard", "UpdatePeriod"],
        18612, 39281),
    row!("Task20ms", "IdleSpeedCtrlSWCEntity", 66976,
        ["IdleFlag", "EngineSpeed", "CoolantTemperature"],
        ["IdleSpeedSetpoint", "IdleThrottleCorrection", "IdleIgnitionCorrection"],
        913, 1686),
    row!("Task100ms", "APedSensorDiag", 66288,
        ["PedalAngle1", "PedalAngle2"],
        [],
        102, 235),
    row!("Task100ms", "InjBattVoltCorrSWC", 56928,
        ["BatteryVoltage"],
        ["BatVoltCorr"],
        290, 547),
];

/// Tasks: (name, priority, period in µs or None for the event-driven
/// tasks), in model order. Larger priority values are more urgent.
const TASKS: &[(&str, u32, Option<u64>)] = &[
    ("CylNumTriggeredTask", 30, None),
    ("ActuatorTask", 25, None),
    ("Task5ms", 20, Some(5_000)),
    ("Task10ms", 15, Some(10_000)),
    ("Task20ms", 10, Some(20_000)),
    ("Task100ms", 5, Some(100_000)),
];

/// Builds the DemoCar software model with the default crank-event period.
pub fn build_democar() -> AmaltheaModel {
    build_democar_with_crank_period(DEFAULT_CRANK_PERIOD_US)
}

/// Builds DemoCar with a custom environment crank-event period (µs) for
/// `CylNumTriggeredTask`. The period models how often the engine requests
/// cylinder-number processing; it is external input, not benchmark data.
pub fn build_democar_with_crank_period(crank_period_us: u64) -> AmaltheaModel {
    let mut b = ModelBuilder::new();

    for &(name, bits) in LABELS {
        b.add_label(format!("l_{name}"), name, bits);
    }
    let label_index = |name: &str| {
        LABELS
            .iter()
            .position(|&(n, _)| n == name)
            .unwrap_or_else(|| panic!("unknown label {name:?} in runnable table"))
    };

    let mut runnables_of_task: Vec<Vec<usize>> = vec![Vec::new(); TASKS.len()];
    for row in RUNNABLES {
        let reads = row.reads.iter().map(|n| label_index(n)).collect();
        let writes = row.writes.iter().map(|n| label_index(n)).collect();
        let r = b.add_runnable(
            format!("r_{}", row.name),
            row.name,
            row.size_bits,
            reads,
            writes,
            row.bcet,
            row.wcet,
        );
        let t = TASKS
            .iter()
            .position(|&(n, _, _)| n == row.task)
            .unwrap_or_else(|| panic!("unknown task {:?} in runnable table", row.task));
        runnables_of_task[t].push(r);
    }

    for (t, &(name, priority, period_us)) in TASKS.iter().enumerate() {
        let kind = match (name, period_us) {
            (_, Some(period)) => StimulusKind::Periodic { period_ns: period * 1_000, offset_ns: 0 },
            ("CylNumTriggeredTask", None) => StimulusKind::InterProcess {
                trigger_label: label_index("CylinderNumber"),
                injection_period_ns: Some(crank_period_us * 1_000),
            },
            ("ActuatorTask", None) => StimulusKind::InterProcess {
                trigger_label: label_index("TriggeredCylinderNumber"),
                injection_period_ns: None,
            },
            _ => unreachable!("every aperiodic task needs an explicit stimulus"),
        };
        let s = b.add_stimulus(format!("s_{name}"), kind);
        b.add_task(format!("t_{name}"), name, priority, s, std::mem::take(&mut runnables_of_task[t]));
    }

    b.build()
}

/// Builds the DemoCar NoC platform: a `width`×`height` mesh of identical
/// cores ([`DEMOCAR_TICKS_PER_INSTRUCTION`] ticks per instruction at
/// [`DEMOCAR_FREQUENCY_HZ`]), the first `active` cores in row-major order
/// active, with default NoC latency parameters.
pub fn build_democar_platform(width: u32, height: u32, active: usize) -> Result<NocPlatform, NocError> {
    NocPlatform::mesh(
        width,
        height,
        active,
        DEMOCAR_TICKS_PER_INSTRUCTION,
        DEMOCAR_FREQUENCY_HZ,
        DEFAULT_HOP_LATENCY_NS,
        DEFAULT_FLIT_BITS,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ExecutionBound;

    #[test]
    fn entity_counts_match_the_benchmark() {
        let m = build_democar();
        assert_eq!(m.task_count(), 6);
        assert_eq!(m.runnable_count(), 18);
        assert_eq!(m.label_count(), 62);
        assert_eq!(m.stimulus_count(), 6);
    }

    #[test]
    fn democar_validates_cleanly() {
        assert_eq!(build_democar().validate(), vec![]);
    }

    #[test]
    fn democar_is_deterministic() {
        assert_eq!(build_democar(), build_democar());
    }

    #[test]
    fn task_priorities_and_membership() {
        let m = build_democar();
        let priorities: Vec<u32> = m.tasks().iter().map(|t| t.priority).collect();
        assert_eq!(priorities, vec![30, 25, 20, 15, 10, 5]);
        assert_eq!(m.task_by_name("Task10ms").unwrap().runnables.len(), 8);
        assert_eq!(m.task_by_name("Task5ms").unwrap().runnables.len(), 3);
        assert_eq!(m.task_by_name("ActuatorTask").unwrap().runnables.len(), 2);

        // Intra-task order is the table order.
        let t5 = m.task_by_name("Task5ms").unwrap();
        let names: Vec<&str> = t5.runnables.iter().map(|&r| m.runnable(r).name.as_str()).collect();
        assert_eq!(names, vec!["MassAirFlowSWCEntity", "ThrottleSensSWCEntity", "APedSensor"]);
    }

    #[test]
    fn spot_checks_on_labels_and_dataflow() {
        let m = build_democar();
        assert_eq!(m.label_by_name("EngineSpeed").unwrap().bit_length, 16);
        assert_eq!(m.label_by_name("CrankFlag").unwrap().bit_length, 1);

        let tcn = m.index_of_label(m.label_by_name("TriggeredCylinderNumber").unwrap());
        let writer_names: Vec<&str> =
            m.writers_of_label(tcn).iter().map(|&r| m.runnable(r).name.as_str()).collect();
        assert_eq!(writer_names, vec!["CylNumObserverEntity"]);
        let reader_names: Vec<&str> =
            m.readers_of_label(tcn).iter().map(|&r| m.runnable(r).name.as_str()).collect();
        assert_eq!(reader_names, vec!["IgnitionSWCSyncEntity", "InjectionSWCSync"]);

        let pedal1 = m.index_of_label(m.label_by_name("PedalAngle1").unwrap());
        let reader_names: Vec<&str> =
            m.readers_of_label(pedal1).iter().map(|&r| m.runnable(r).name.as_str()).collect();
        assert_eq!(reader_names, vec!["APedSensor", "APedSensorDiag"]);

        let trans = m.runnable_by_name("TransFuelMassSWCEntity").unwrap();
        assert_eq!(trans.reads.len(), 12);
        let write_names: Vec<&str> = trans.writes.iter().map(|&l| m.label(l).name.as_str()).collect();
        assert_eq!(write_names, vec!["TransientFuelMassPerStroke"]);

        assert!(m.runnable_by_name("APedSensorDiag").unwrap().writes.is_empty());
    }

    #[test]
    fn unused_labels_are_retained() {
        let m = build_democar();
        for name in ["AcceleratorPedalPositions", "DesiredThrottlePos"] {
            let l = m.index_of_label(m.label_by_name(name).unwrap());
            assert!(m.writers_of_label(l).is_empty());
            assert!(m.readers_of_label(l).is_empty());
        }
    }

    #[test]
    fn hyperperiod_is_100ms() {
        assert_eq!(build_democar().hyperperiod_us(), Ok(100_000));
    }

    #[test]
    fn stimuli_wire_the_event_driven_tasks() {
        let m = build_democar();
        let cyl = m.index_of_label(m.label_by_name("CylinderNumber").unwrap());
        let tcn = m.index_of_label(m.label_by_name("TriggeredCylinderNumber").unwrap());
        let cn_task = m.task_by_name("CylNumTriggeredTask").unwrap();
        assert_eq!(
            m.stimulus(cn_task.stimulus).kind,
            StimulusKind::InterProcess {
                trigger_label: cyl,
                injection_period_ns: Some(DEFAULT_CRANK_PERIOD_US * 1_000)
            }
        );
        let act = m.task_by_name("ActuatorTask").unwrap();
        assert_eq!(
            m.stimulus(act.stimulus).kind,
            StimulusKind::InterProcess { trigger_label: tcn, injection_period_ns: None }
        );
    }

    #[test]
    fn platform_uses_democar_core_timing() {
        let p = build_democar_platform(2, 2, 3).unwrap();
        assert_eq!(p.core_count(), 4);
        assert_eq!(p.active_cores(), vec![0, 1, 2]);
        assert!(!p.core(3).active);
        assert_eq!(p.core(3).position, (1, 1));
        assert_eq!(p.core(0).ticks_per_instruction, DEMOCAR_TICKS_PER_INSTRUCTION);
        assert_eq!(p.core(0).frequency_hz, DEMOCAR_FREQUENCY_HZ);
    }

    #[test]
    fn execution_times_follow_core_timing_on_a_model_with_cores() {
        // When a model carries its own hardware section the same
        // conversion applies: 1 tick per instruction at 200 MHz gives
        // 5 ns per instruction.
        let mut b = ModelBuilder::new();
        let r = b.add_runnable("r", "CylNumObserverEntityLike", 0, vec![], vec![], 434, 1145);
        let ct = b.add_core_type("ct", 1);
        let q = b.add_quartz("q", 200_000_000);
        b.add_core("c", "c0", ct, q, (0, 0));
        let s = b.add_stimulus("s", StimulusKind::Periodic { period_ns: 1_000_000, offset_ns: 0 });
        b.add_task("t", "T", 1, s, vec![r]);
        let m = b.build();
        assert_eq!(m.execution_time(0, 0, ExecutionBound::Wcet), 5_725);
    }
}
