//! Genetic search over the joint runnable/label allocation space.
//!
//! A chromosome is one gene per runnable (model order) followed by one
//! gene per label (model order); each gene indexes the platform's
//! active-core list, so every chromosome decodes to a complete, valid
//! allocation. Fitness is the pair (missed deadlines, makespan) from a
//! worst-case hyperperiod simulation, ordered lexicographically: any
//! zero-miss individual outranks every miss-carrying one regardless of
//! makespan.
//!
//! The engine is a plain generational GA — tournament selection,
//! single-point crossover, per-gene uniform-reset mutation, elitism — with
//! an optional island model: islands evolve independently from decorrelated
//! streams of one seeded generator and exchange their best individual along
//! a ring at a fixed interval (a migrant replaces the target island's worst
//! individual when strictly better, so island bests never regress).
//!
//! Everything derives from `GaConfig::seed`: island randomness uses one
//! ChaCha stream per island, fitness evaluation is pure, and parallel
//! evaluation merges results in chromosome order — so a run is a pure
//! function of (model, platform, config), bit-for-bit.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{AmaltheaModel, ExecutionBound};
use crate::noc::NocPlatform;
use crate::sim::{Allocation, SimError, Simulator};

/// Candidate solution: active-core slot per runnable, then per label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chromosome {
    pub genes: Vec<u32>,
}

/// Simulation outcome as an optimization objective. The derived ordering
/// is lexicographic: missed deadlines first, makespan as tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fitness {
    pub missed: usize,
    pub makespan_ns: u64,
}

/// Search parameters. `Default` matches the benchmark baseline: 100
/// generations of one 20-individual island.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub generations: usize,
    /// Individuals per island.
    pub population: usize,
    pub islands: usize,
    /// Ring migration happens every this many generations.
    pub migration_interval: usize,
    pub crossover_rate: f64,
    /// Per-gene reset probability; `None` means 1/|genes|.
    pub mutation_rate: Option<f64>,
    /// Best individuals carried over unchanged (and not re-evaluated).
    pub elitism: usize,
    pub tournament_size: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            generations: 100,
            population: 20,
            islands: 1,
            migration_interval: 10,
            crossover_rate: 0.9,
            mutation_rate: None,
            elitism: 1,
            tournament_size: 2,
            seed: 0,
        }
    }
}

impl GaConfig {
    fn check(&self) -> Result<(), GaError> {
        let bad = |message: &str| Err(GaError::Config(message.to_owned()));
        if self.generations == 0 {
            return bad("generations must be at least 1");
        }
        if self.population == 0 {
            return bad("population must be at least 1");
        }
        if self.islands == 0 {
            return bad("islands must be at least 1");
        }
        if self.migration_interval == 0 {
            return bad("migration interval must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad("crossover rate must be within [0, 1]");
        }
        if let Some(rate) = self.mutation_rate {
            if !(0.0..=1.0).contains(&rate) {
                return bad("mutation rate must be within [0, 1]");
            }
        }
        if self.elitism >= self.population {
            return bad("elitism must leave room for offspring (elitism < population)");
        }
        if self.tournament_size == 0 {
            return bad("tournament size must be at least 1");
        }
        Ok(())
    }
}

/// Snapshot of the search after one generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationRecord {
    /// 1..=generations. The evaluated initial population seeds the running
    /// values but gets no record of its own.
    pub generation: usize,
    /// Best fitness seen so far across all islands (non-worsening).
    pub best: Fitness,
    /// The individual that achieved `best`.
    pub best_chromosome: Chromosome,
    /// Smallest makespan over every individual evaluated so far,
    /// regardless of its miss count (non-increasing).
    pub min_makespan_ns: u64,
}

/// Full account of one GA run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaHistory {
    /// One record per generation: `records[i].generation == i + 1`.
    pub records: Vec<GenerationRecord>,
    pub best: Fitness,
    pub best_chromosome: Chromosome,
    /// Total simulator invocations.
    pub evaluations: u64,
}

#[derive(Debug, Error)]
pub enum GaError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("chromosome has {got} genes but the model needs {want} (runnables + labels)")]
    LengthMismatch { got: usize, want: usize },
    #[error("gene {index} selects active-core slot {gene}, but only {count} cores are active")]
    GeneOutOfRange { index: usize, gene: u32, count: usize },
    #[error("core {core} is inactive and has no chromosome encoding")]
    InactiveCore { core: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

fn gene_count(model: &AmaltheaModel) -> usize {
    model.runnable_count() + model.label_count()
}

/// Expands a chromosome into an allocation: genes `0..R` map runnables in
/// model order, genes `R..R+L` map labels in model order, each through the
/// platform's active-core list.
pub fn decode(
    chromosome: &Chromosome,
    model: &AmaltheaModel,
    platform: &NocPlatform,
) -> Result<Allocation, GaError> {
    let want = gene_count(model);
    if chromosome.genes.len() != want {
        return Err(GaError::LengthMismatch { got: chromosome.genes.len(), want });
    }
    let active = platform.active_cores();
    let slot = |index: usize, gene: u32| {
        active
            .get(gene as usize)
            .copied()
            .ok_or(GaError::GeneOutOfRange { index, gene, count: active.len() })
    };
    let runnables = model.runnable_count();
    let mut allocation = Allocation {
        runnable_core: Vec::with_capacity(runnables),
        label_core: Vec::with_capacity(model.label_count()),
    };
    for (i, &gene) in chromosome.genes.iter().enumerate() {
        let core = slot(i, gene)?;
        if i < runnables {
            allocation.runnable_core.push(core);
        } else {
            allocation.label_core.push(core);
        }
    }
    Ok(allocation)
}

/// Inverse of [`decode`]: every mapped core must be active.
pub fn encode(allocation: &Allocation, platform: &NocPlatform) -> Result<Chromosome, GaError> {
    let active = platform.active_cores();
    let slot_of = |core: usize| {
        active
            .iter()
            .position(|&c| c == core)
            .map(|slot| slot as u32)
            .ok_or(GaError::InactiveCore { core })
    };
    let mut genes = Vec::with_capacity(allocation.runnable_core.len() + allocation.label_core.len());
    for &core in allocation.runnable_core.iter().chain(&allocation.label_core) {
        genes.push(slot_of(core)?);
    }
    Ok(Chromosome { genes })
}

/// Worst-case fitness of one chromosome. One-shot convenience; the GA
/// itself reuses simulators across evaluations.
pub fn evaluate(
    chromosome: &Chromosome,
    model: &AmaltheaModel,
    platform: &NocPlatform,
) -> Result<Fitness, GaError> {
    let allocation = decode(chromosome, model, platform)?;
    let (missed, makespan_ns) =
        Simulator::new(model, platform)?.run_fitness(&allocation, ExecutionBound::Wcet)?;
    Ok(Fitness { missed, makespan_ns })
}

struct Island {
    population: Vec<Chromosome>,
    fitness: Vec<Fitness>,
    rng: ChaCha8Rng,
}

impl Island {
    fn best_index(&self) -> usize {
        (0..self.fitness.len()).min_by_key(|&i| (self.fitness[i], i)).expect("non-empty island")
    }

    fn worst_index(&self) -> usize {
        (0..self.fitness.len()).max_by_key(|&i| (self.fitness[i], i)).expect("non-empty island")
    }

    /// Tournament selection: best of `size` uniform picks (first wins ties).
    fn select(&mut self, size: usize) -> usize {
        let mut winner = self.rng.random_range(0..self.population.len());
        for _ in 1..size {
            let challenger = self.rng.random_range(0..self.population.len());
            if self.fitness[challenger] < self.fitness[winner] {
                winner = challenger;
            }
        }
        winner
    }
}

/// Evaluates chromosomes in parallel, merging results in input order so
/// the outcome is independent of the degree of parallelism.
fn evaluate_all(
    chromosomes: &[Chromosome],
    model: &AmaltheaModel,
    platform: &NocPlatform,
) -> Result<Vec<Fitness>, GaError> {
    chromosomes
        .par_iter()
        .map_init(
            || Simulator::new(model, platform),
            |sim, chromosome| {
                let sim = sim.as_mut().map_err(|e| GaError::Config(e.to_string()))?;
                let allocation = decode(chromosome, model, platform)?;
                let (missed, makespan_ns) = sim.run_fitness(&allocation, ExecutionBound::Wcet)?;
                Ok(Fitness { missed, makespan_ns })
            },
        )
        .collect()
}

/// Runs the seeded search and returns its full history.
///
/// Deterministic: the same (model, platform, config) triple always yields
/// the same history, regardless of evaluation parallelism.
pub fn run(
    model: &AmaltheaModel,
    platform: &NocPlatform,
    config: &GaConfig,
) -> Result<GaHistory, GaError> {
    config.check()?;
    // Surface model/platform problems (e.g. no hyperperiod) before any work.
    Simulator::new(model, platform)?;

    let genes = gene_count(model);
    let active_count = platform.active_cores().len() as u32;
    let mutation_rate = config.mutation_rate.unwrap_or(1.0 / genes.max(1) as f64);

    // Decorrelated randomness per island: one seed, one stream per island.
    let mut islands: Vec<Island> = (0..config.islands)
        .map(|island| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(island as u64);
            let population = (0..config.population)
                .map(|_| Chromosome {
                    genes: (0..genes).map(|_| rng.random_range(0..active_count)).collect(),
                })
                .collect();
            Island { population, fitness: Vec::new(), rng }
        })
        .collect();

    let mut evaluations = 0u64;
    let mut min_makespan_ns = u64::MAX;
    for island in &mut islands {
        island.fitness = evaluate_all(&island.population, model, platform)?;
        evaluations += island.population.len() as u64;
        for f in &island.fitness {
            min_makespan_ns = min_makespan_ns.min(f.makespan_ns);
        }
    }

    let global_best = |islands: &[Island]| {
        islands
            .iter()
            .map(|island| {
                let i = island.best_index();
                (island.fitness[i], island.population[i].clone())
            })
            .min_by_key(|(f, _)| *f)
            .expect("at least one island")
    };
    let (mut best, mut best_chromosome) = global_best(&islands);
    let mut records = Vec::with_capacity(config.generations);

    let mut offspring: Vec<Chromosome> = Vec::with_capacity(config.population);
    for generation in 1..=config.generations {
        for island in &mut islands {
            // Elites survive unchanged, best first.
            let mut order: Vec<usize> = (0..island.population.len()).collect();
            order.sort_by_key(|&i| (island.fitness[i], i));
            let elites: Vec<(Chromosome, Fitness)> = order[..config.elitism]
                .iter()
                .map(|&i| (island.population[i].clone(), island.fitness[i]))
                .collect();

            offspring.clear();
            while offspring.len() < config.population - config.elitism {
                let a = island.select(config.tournament_size);
                let b = island.select(config.tournament_size);
                let mut first = island.population[a].clone();
                let mut second = island.population[b].clone();
                if genes >= 2 && island.rng.random_bool(config.crossover_rate) {
                    let point = island.rng.random_range(1..genes);
                    for i in point..genes {
                        std::mem::swap(&mut first.genes[i], &mut second.genes[i]);
                    }
                }
                for child in [&mut first, &mut second] {
                    for gene in &mut child.genes {
                        if island.rng.random_bool(mutation_rate) {
                            *gene = island.rng.random_range(0..active_count);
                        }
                    }
                }
                offspring.push(first);
                if offspring.len() < config.population - config.elitism {
                    offspring.push(second);
                }
            }

            let offspring_fitness = evaluate_all(&offspring, model, platform)?;
            evaluations += offspring.len() as u64;
            for f in &offspring_fitness {
                min_makespan_ns = min_makespan_ns.min(f.makespan_ns);
            }

            island.population.clear();
            island.fitness.clear();
            for (chromosome, fitness) in elites {
                island.population.push(chromosome);
                island.fitness.push(fitness);
            }
            island.population.append(&mut offspring);
            island.fitness.extend(offspring_fitness);
        }

        // Ring migration on snapshots: island i donates its best to
        // island i+1, replacing the worst individual there if the migrant
        // is strictly better.
        if config.islands > 1 && generation % config.migration_interval == 0 {
            let donors: Vec<(Chromosome, Fitness)> = islands
                .iter()
                .map(|island| {
                    let i = island.best_index();
                    (island.population[i].clone(), island.fitness[i])
                })
                .collect();
            for (from, donor) in donors.into_iter().enumerate() {
                let to = (from + 1) % config.islands;
                let island = &mut islands[to];
                let worst = island.worst_index();
                if donor.1 < island.fitness[worst] {
                    island.population[worst] = donor.0;
                    island.fitness[worst] = donor.1;
                }
            }
        }

        let (generation_best, generation_chromosome) = global_best(&islands);
        if generation_best < best {
            best = generation_best;
            best_chromosome = generation_chromosome;
        }
        records.push(GenerationRecord {
            generation,
            best,
            best_chromosome: best_chromosome.clone(),
            min_makespan_ns,
        });
    }

    Ok(GaHistory { records, best, best_chromosome, evaluations })
}

/// Renders a history as CSV with the stable header
/// `generation,best_missed,best_makespan_us`: per generation, the running
/// best miss count and the running minimum makespan (in microseconds,
/// three decimals). Both series are non-increasing by construction.
pub fn history_csv(history: &GaHistory) -> String {
    let mut out = String::from("generation,best_missed,best_makespan_us\n");
    for record in &history.records {
        out.push_str(&format!(
            "{},{},{:.3}\n",
            record.generation,
            record.best.missed,
            record.min_makespan_ns as f64 / 1_000.0
        ));
    }
    out
}
