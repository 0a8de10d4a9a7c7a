//! Variation operators working at waypoint granularity.

use rand::Rng;

use super::SearchConfig;
use crate::domain::{decode, validate_waypoint_set, Individual, SearchBounds, WaypointSet};

fn sbx_beta<R: Rng + ?Sized>(eta: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    if u <= 0.5 {
        (2.0 * u).powf(1.0 / (eta + 1.0))
    } else {
        (2.0 - 2.0 * u).powf(-1.0 / (eta + 1.0))
    }
}

/// Simulated binary crossover with a waypoint-aligned cut.
///
/// With probability `crossover_probability` a cut between two waypoints is
/// drawn; before the cut the first child leans towards `a`, after it towards
/// `b`. Each waypoint draws one spread factor shared by all of its coordinates
/// (or keeps the parents' values with probability 0.5), so a waypoint is
/// never split across children. Children are clipped to `bounds`.
pub fn sbx_crossover<R: Rng + ?Sized>(
    a: &Individual,
    b: &Individual,
    bounds: &SearchBounds,
    config: &SearchConfig,
    rng: &mut R,
) -> (Individual, Individual) {
    let p: f64 = rng.gen();
    if p >= config.crossover_probability {
        return (a.clone(), b.clone());
    }
    let dim = bounds.dim();
    let n = bounds.waypoint_count();
    let cut = if n > 1 { rng.gen_range(1..n) } else { 0 };
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    for w in 0..n {
        let beta = if rng.gen::<f64>() < 0.5 {
            1.0
        } else {
            sbx_beta(config.crossover_distribution_index, rng)
        };
        let sign = if w < cut { 1.0 } else { -1.0 };
        for i in w * dim..(w + 1) * dim {
            let (x, y) = (a.values()[i], b.values()[i]);
            let mean = 0.5 * (x + y);
            let spread = 0.5 * sign * beta * (x - y);
            c1.values_mut()[i] = bounds.clip(i, mean + spread);
            c2.values_mut()[i] = bounds.clip(i, mean - spread);
        }
    }
    (c1, c2)
}

/// Bounded polynomial mutation with all-or-nothing repair.
///
/// Each coordinate mutates with probability `expected_mutated_variables / len`.
/// If the mutated route violates `min_wp_dist`, the input is returned unchanged.
pub fn polynomial_mutation<R: Rng + ?Sized>(
    ind: &Individual,
    bounds: &SearchBounds,
    min_wp_dist: f64,
    original: &WaypointSet,
    config: &SearchConfig,
    rng: &mut R,
) -> Individual {
    let len = ind.len();
    if len == 0 {
        return ind.clone();
    }
    let pm = config.expected_mutated_variables / len as f64;
    let eta = config.mutation_distribution_index;
    let mut out = ind.clone();
    let mut changed = false;
    for i in 0..len {
        if rng.gen::<f64>() >= pm {
            continue;
        }
        let (lo, hi) = bounds.interval(i);
        let x = out.values()[i];
        let range = hi - lo;
        let u: f64 = rng.gen();
        let d1 = (x - lo) / range;
        let d2 = (hi - x) / range;
        let power = 1.0 / (eta + 1.0);
        let dq = if u <= 0.5 {
            let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
            v.powf(power) - 1.0
        } else {
            let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - v.powf(power)
        };
        out.values_mut()[i] = bounds.clip(i, x + dq * range);
        changed = true;
    }
    if !changed {
        return out;
    }
    match decode(&out, original) {
        Ok(ws) if validate_waypoint_set(&ws, min_wp_dist) => out,
        _ => ind.clone(),
    }
}
