//! Let the genetic algorithm place DemoCar on four active cores: run the
//! default search, watch the objective fall generation by generation, and
//! decode the winning chromosome back into a per-core placement.
//!
//! Run with: `cargo run --example optimize_allocation`

use amalthea_kit::democar::{build_democar, build_democar_platform};
use amalthea_kit::ga::{decode, run, GaConfig};
use amalthea_kit::model::ExecutionBound;
use amalthea_kit::sim::simulate;

fn main() {
    let model = build_democar();
    let platform = build_democar_platform(2, 2, 4).unwrap();

    // 100 generations, 20 individuals, seeded — reruns reproduce this
    // output byte for byte.
    let config = GaConfig { seed: 2, ..GaConfig::default() };
    println!(
        "searching {} genes over {} active cores ({} generations x {} individuals, seed {})\n",
        model.runnable_count() + model.label_count(),
        platform.active_cores().len(),
        config.generations,
        config.population,
        config.seed
    );

    let history = run(&model, &platform, &config).unwrap();

    println!("{:>10} {:>8} {:>16} {:>18}", "generation", "missed", "makespan [us]", "min makespan [us]");
    for record in history.records.iter().filter(|r| r.generation % 10 == 0 || r.generation == 1) {
        println!(
            "{:>10} {:>8} {:>16.1} {:>18.1}",
            record.generation,
            record.best.missed,
            record.best.makespan_ns as f64 / 1_000.0,
            record.min_makespan_ns as f64 / 1_000.0
        );
    }
    let feasible = history.records.iter().find(|r| r.best.missed == 0).map(|r| r.generation);
    let found = history
        .records
        .iter()
        .find(|r| r.best == history.best)
        .map(|r| r.generation)
        .unwrap_or(1);
    println!(
        "\nfirst deadline-free placement in generation {}",
        feasible.expect("four cores leave plenty of slack")
    );
    println!(
        "best: missed={} makespan={:.1} us after {} evaluations (first reached in generation {})",
        history.best.missed,
        history.best.makespan_ns as f64 / 1_000.0,
        history.evaluations,
        found
    );

    // A chromosome is just one active-core choice per runnable, then per
    // label; decoding turns it into the simulator's allocation.
    let allocation = decode(&history.best_chromosome, &model, &platform).unwrap();
    println!("\nwinning placement:");
    for &core in &platform.active_cores() {
        let runnables: Vec<&str> = model
            .runnables()
            .iter()
            .enumerate()
            .filter(|&(r, _)| allocation.runnable_core[r] == core)
            .map(|(_, r)| r.name.as_str())
            .collect();
        let labels = allocation.label_core.iter().filter(|&&c| c == core).count();
        println!(
            "  {}: {} labels, runnables {}",
            platform.core(core).name,
            labels,
            runnables.join(" ")
        );
    }

    // Replay the winner through the full simulator to confirm the fitness.
    let result = simulate(&model, &platform, &allocation, ExecutionBound::Wcet).unwrap();
    println!(
        "\nreplay: {} of {} deadlines missed, makespan {:.1} us",
        result.missed_deadlines,
        result.total_deadlines,
        result.makespan_ns as f64 / 1_000.0
    );
}
