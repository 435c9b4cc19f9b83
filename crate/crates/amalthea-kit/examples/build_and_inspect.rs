//! Build the bundled DemoCar engine-control model in memory and walk its
//! structure: entity counts, the derived hyperperiod, per-task timing on
//! the reference core, and the busiest producer/consumer label paths.
//!
//! Run with: `cargo run --example build_and_inspect`

use amalthea_kit::democar::{
    build_democar, DEMOCAR_FREQUENCY_HZ, DEMOCAR_TICKS_PER_INSTRUCTION,
};
use amalthea_kit::model::execution_time_ns;

fn main() {
    let model = build_democar();

    println!(
        "DemoCar: {} tasks, {} runnables, {} labels, {} stimuli",
        model.task_count(),
        model.runnable_count(),
        model.label_count(),
        model.stimulus_count()
    );
    println!("hyperperiod: {} us\n", model.hyperperiod_us().unwrap());

    // Worst-case demand per task on the reference core, against its period.
    println!("{:<22} {:>8} {:>12} {:>12} {:>8}", "task", "priority", "wcet [us]", "period [us]", "load");
    for task in model.tasks() {
        let wcet_ns: u64 = task
            .runnables
            .iter()
            .map(|&r| {
                execution_time_ns(
                    model.runnables()[r].wcet_instructions,
                    DEMOCAR_TICKS_PER_INSTRUCTION,
                    DEMOCAR_FREQUENCY_HZ,
                )
            })
            .sum();
        let period = match &model.stimuli()[task.stimulus].kind {
            amalthea_kit::model::StimulusKind::Periodic { period_ns, .. } => Some(*period_ns),
            _ => None,
        };
        match period {
            Some(p) => println!(
                "{:<22} {:>8} {:>12.1} {:>12} {:>7.1}%",
                task.name,
                task.priority,
                wcet_ns as f64 / 1_000.0,
                p / 1_000,
                100.0 * wcet_ns as f64 / p as f64
            ),
            None => println!(
                "{:<22} {:>8} {:>12.1} {:>12} {:>8}",
                task.name,
                task.priority,
                wcet_ns as f64 / 1_000.0,
                "event",
                "-"
            ),
        }
    }

    // Data flow: which labels carry values from task to task? Those are the
    // paths an allocator has to keep short.
    println!("\ncross-task label traffic:");
    for (l, label) in model.labels().iter().enumerate() {
        let writer_tasks: Vec<&str> = model
            .tasks()
            .iter()
            .filter(|t| t.runnables.iter().any(|&r| model.runnables()[r].writes.contains(&l)))
            .map(|t| t.name.as_str())
            .collect();
        let reader_tasks: Vec<&str> = model
            .tasks()
            .iter()
            .filter(|t| t.runnables.iter().any(|&r| model.runnables()[r].reads.contains(&l)))
            .map(|t| t.name.as_str())
            .collect();
        if !writer_tasks.is_empty()
            && !reader_tasks.is_empty()
            && reader_tasks.iter().any(|r| !writer_tasks.contains(r))
        {
            println!(
                "  {:<28} {:>2} bits  {} -> {}",
                label.name,
                label.bit_length,
                writer_tasks.join("+"),
                reader_tasks.join("+")
            );
        }
    }
}
