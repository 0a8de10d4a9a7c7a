//! Initial-population construction.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Individual, SearchBounds, WaypointSet};
use crate::error::{Error, Result};

/// How the initial population is built. Every strategy includes one copy of
/// the original route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Seeding {
    /// All other members mutated from the original.
    Seed,
    /// Half mutated from the original, half uniform random.
    Comb,
    /// All other members uniform random.
    Rnd,
}

impl Seeding {
    pub const ALL: [Seeding; 3] = [Seeding::Seed, Seeding::Comb, Seeding::Rnd];

    pub fn as_str(self) -> &'static str {
        match self {
            Seeding::Seed => "seed",
            Seeding::Comb => "comb",
            Seeding::Rnd => "rnd",
        }
    }
}

/// Mutates whole waypoints of the original route until a geometric stop.
///
/// Starts from the original, picks a uniform waypoint among `2..=N`, redraws all
/// of its coordinates inside their search intervals, and after `k` such
/// mutations continues only if a fresh uniform draw is below `0.5^k`.
pub fn seed_individual<R: Rng + ?Sized>(
    original: &WaypointSet,
    bounds: &SearchBounds,
    rng: &mut R,
) -> Individual {
    seed_individual_traced(original, bounds, rng).0
}

/// [`seed_individual`] also returning the 0-based genotype waypoint picked at
/// each loop iteration (repeats possible).
pub fn seed_individual_traced<R: Rng + ?Sized>(
    original: &WaypointSet,
    bounds: &SearchBounds,
    rng: &mut R,
) -> (Individual, Vec<usize>) {
    let mut ind = original.flatten();
    let dim = bounds.dim();
    let n = bounds.waypoint_count();
    let mut picks = Vec::new();
    loop {
        let w = rng.gen_range(0..n);
        for i in w * dim..(w + 1) * dim {
            let (lo, hi) = bounds.interval(i);
            ind.values_mut()[i] = rng.gen_range(lo..=hi);
        }
        picks.push(w);
        let p: f64 = rng.gen();
        if p >= 0.5f64.powi(picks.len() as i32) {
            break;
        }
    }
    (ind, picks)
}

/// Every coordinate drawn uniformly from its search interval.
pub fn random_individual<R: Rng + ?Sized>(bounds: &SearchBounds, rng: &mut R) -> Individual {
    Individual::new(
        (0..bounds.len())
            .map(|i| {
                let (lo, hi) = bounds.interval(i);
                rng.gen_range(lo..=hi)
            })
            .collect(),
    )
}

/// Builds `size` individuals: the original first, then seeded and/or random
/// members according to `strategy`. `comb` seeds `ceil((size - 1) / 2)`.
pub fn init_population<R: Rng + ?Sized>(
    strategy: Seeding,
    size: usize,
    original: &WaypointSet,
    bounds: &SearchBounds,
    rng: &mut R,
) -> Result<Vec<Individual>> {
    if size < 2 {
        return Err(Error::InvalidParameter(format!(
            "population size must be at least 2, got {size}"
        )));
    }
    let rest = size - 1;
    let seeded = match strategy {
        Seeding::Seed => rest,
        Seeding::Comb => rest.div_ceil(2),
        Seeding::Rnd => 0,
    };
    let mut pop = Vec::with_capacity(size);
    pop.push(original.flatten());
    for _ in 0..seeded {
        pop.push(seed_individual(original, bounds, rng));
    }
    for _ in seeded..rest {
        pop.push(random_individual(bounds, rng));
    }
    Ok(pop)
}
