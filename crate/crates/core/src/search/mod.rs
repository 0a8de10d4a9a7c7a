//! NSGA-II with seeded initial populations, and the random-search baseline.

mod operators;
mod seeding;
mod sorting;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use operators::{polynomial_mutation, sbx_crossover};
pub use seeding::{
    init_population, random_individual, seed_individual, seed_individual_traced, Seeding,
};
pub use sorting::{
    crowded_better, crowding_distance, environmental_selection, fast_nondominated_sort,
    rank_and_crowding,
};

use crate::domain::Individual;
use crate::error::{Error, Result};
use crate::fitness::{EvalContext, EvalRecord, Evaluation, ObjectiveVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub seeding: Seeding,
    pub crossover_probability: f64,
    pub crossover_distribution_index: f64,
    pub mutation_distribution_index: f64,
    pub expected_mutated_variables: f64,
    pub rng_seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            population_size: 10,
            max_generations: 1000,
            seeding: Seeding::Seed,
            crossover_probability: 1.0,
            crossover_distribution_index: 20.0,
            mutation_distribution_index: 20.0,
            expected_mutated_variables: 1.0,
            rng_seed: 0,
        }
    }
}

impl SearchConfig {
    /// Total number of evaluations a run consumes.
    pub fn budget(&self) -> usize {
        self.population_size * self.max_generations
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.population_size == 0 || self.max_generations == 0 {
            return bad("population size and generations must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.crossover_probability) {
            return bad(format!(
                "crossover probability must lie in [0, 1], got {}",
                self.crossover_probability
            ));
        }
        for (name, v) in [
            (
                "crossover distribution index",
                self.crossover_distribution_index,
            ),
            (
                "mutation distribution index",
                self.mutation_distribution_index,
            ),
            (
                "expected mutated variables",
                self.expected_mutated_variables,
            ),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontMember {
    pub individual: Individual,
    pub objectives: ObjectiveVector,
}

/// Mutually nondominated solutions, kept in a canonical order
/// (ascending `dist_wps`, then descending `unstable`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    members: Vec<FrontMember>,
}

impl ParetoFront {
    pub fn new() -> Self {
        Self::default()
    }

    /// Nondominated subset of `candidates`; exact duplicate individuals kept once.
    pub fn from_members(candidates: impl IntoIterator<Item = FrontMember>) -> Self {
        let mut front = Self::new();
        for m in candidates {
            front.insert(m);
        }
        front
    }

    /// Archive update: adds `m` unless it is dominated or already present, and
    /// evicts members it dominates. Returns whether `m` was added.
    pub fn insert(&mut self, m: FrontMember) -> bool {
        if self
            .members
            .iter()
            .any(|e| e.objectives.dominates(&m.objectives) || e.individual == m.individual)
        {
            return false;
        }
        self.members
            .retain(|e| !m.objectives.dominates(&e.objectives));
        let pos = self
            .members
            .partition_point(|e| canonical_cmp(e, &m) == std::cmp::Ordering::Less);
        self.members.insert(pos, m);
        true
    }

    pub fn members(&self) -> &[FrontMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.members.iter().map(|m| m.objectives).collect()
    }
}

fn canonical_cmp(a: &FrontMember, b: &FrontMember) -> std::cmp::Ordering {
    a.objectives
        .dist_wps
        .total_cmp(&b.objectives.dist_wps)
        .then(b.objectives.unstable.total_cmp(&a.objectives.unstable))
        .then_with(|| {
            a.individual
                .values()
                .iter()
                .zip(b.individual.values())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
}

/// Outcome of one search run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub front: ParetoFront,
    /// One entry per evaluation, in evaluation order.
    pub evals: Vec<EvalRecord>,
}

impl RunRecord {
    pub fn evaluations(&self) -> usize {
        self.evals.len()
    }
}

fn evaluate_batch(ctx: &EvalContext, inds: &[Individual]) -> Vec<Evaluation> {
    inds.par_iter().map(|ind| ctx.evaluate(ind)).collect()
}

fn log_batch(evals: &mut Vec<EvalRecord>, gen: usize, inds: &[Individual], results: &[Evaluation]) {
    evals.extend(
        inds.iter()
            .zip(results)
            .map(|(i, e)| EvalRecord::new(gen, i, e)),
    );
}

fn binary_tournament<R: Rng + ?Sized>(rank: &[usize], crowd: &[f64], rng: &mut R) -> usize {
    let a = rng.gen_range(0..rank.len());
    let b = rng.gen_range(0..rank.len());
    if crowded_better(rank, crowd, b, a) {
        b
    } else {
        a
    }
}

/// Runs NSGA-II for exactly `population_size * max_generations` evaluations
/// (the initial population is the first generation) and returns the final
/// population's first front.
pub fn nsga2_run(ctx: &EvalContext, config: &SearchConfig) -> Result<RunRecord> {
    config.validate()?;
    let mu = config.population_size;
    if mu < 2 {
        return Err(Error::InvalidParameter(format!(
            "NSGA-II needs a population of at least 2, got {mu}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut log = Vec::with_capacity(config.budget());

    let mut pop = init_population(config.seeding, mu, &ctx.original, &ctx.bounds, &mut rng)?;
    let mut fit = evaluate_batch(ctx, &pop);
    log_batch(&mut log, 0, &pop, &fit);

    for gen in 1..config.max_generations {
        let (rank, crowd) = rank_and_crowding(&fit);
        let mut offspring = Vec::with_capacity(mu + 1);
        while offspring.len() < mu {
            let pa = &pop[binary_tournament(&rank, &crowd, &mut rng)];
            let pb = &pop[binary_tournament(&rank, &crowd, &mut rng)];
            let (c1, c2) = sbx_crossover(pa, pb, &ctx.bounds, config, &mut rng);
            for c in [c1, c2] {
                offspring.push(polynomial_mutation(
                    &c,
                    &ctx.bounds,
                    ctx.vessel.min_wp_dist,
                    &ctx.original,
                    config,
                    &mut rng,
                ));
            }
        }
        offspring.truncate(mu);
        let child_fit = evaluate_batch(ctx, &offspring);
        log_batch(&mut log, gen, &offspring, &child_fit);

        pop.extend(offspring);
        fit.extend(child_fit);
        let keep = environmental_selection(&fit, mu);
        pop = keep.iter().map(|&i| pop[i].clone()).collect();
        fit = keep.iter().map(|&i| fit[i]).collect();
    }

    let first = fast_nondominated_sort(&fit)
        .into_iter()
        .next()
        .unwrap_or_default();
    let front = ParetoFront::from_members(first.into_iter().filter_map(|i| {
        fit[i].objectives().map(|o| FrontMember {
            individual: pop[i].clone(),
            objectives: *o,
        })
    }));
    Ok(RunRecord { front, evals: log })
}

/// Evaluates `population_size * max_generations` uniform random individuals,
/// the first being the original route, and returns the nondominated subset of
/// all feasible evaluations.
pub fn random_search_run(ctx: &EvalContext, config: &SearchConfig) -> Result<RunRecord> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut log = Vec::with_capacity(config.budget());
    let mut front = ParetoFront::new();
    let mut produced = 0;
    for gen in 0..config.max_generations {
        let batch: Vec<Individual> = (0..config.population_size)
            .map(|k| {
                if produced + k == 0 {
                    ctx.original.flatten()
                } else {
                    random_individual(&ctx.bounds, &mut rng)
                }
            })
            .collect();
        produced += batch.len();
        let fit = evaluate_batch(ctx, &batch);
        log_batch(&mut log, gen, &batch, &fit);
        for (ind, e) in batch.into_iter().zip(&fit) {
            if let Evaluation::Feasible(o) = e {
                front.insert(FrontMember {
                    individual: ind,
                    objectives: *o,
                });
            }
        }
    }
    Ok(RunRecord { front, evals: log })
}
