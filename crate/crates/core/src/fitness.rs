//! Objective functions and the evaluation bridge from genotype to objectives.
//!
//! Two objectives compete: `dist_wps` (minimize) keeps the generated route close
//! to the original, `unstable` (maximize) rewards long, meandering sub-paths.
//! Infeasible individuals are never simulated.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::domain::{
    decode, euclidean_distance, validate_waypoint_set, Individual, SearchBounds, VesselConfig,
    WaypointSet,
};
use crate::error::{Error, Result};
use crate::simulator::{simulate_with_caps, SimulationResult, VesselState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    /// Distance from the original route, m. Minimized.
    pub dist_wps: f64,
    /// Sample count per original leg length, summed over legs. Maximized.
    pub unstable: f64,
}

impl ObjectiveVector {
    pub fn new(dist_wps: f64, unstable: f64) -> Result<Self> {
        if !(dist_wps.is_finite() && unstable.is_finite() && dist_wps >= 0.0 && unstable >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "objectives must be finite and non-negative, got ({dist_wps}, {unstable})"
            )));
        }
        Ok(Self { dist_wps, unstable })
    }

    /// Both objectives as minimization values: `(dist_wps, -unstable)`.
    pub fn as_minimization(&self) -> [f64; 2] {
        [self.dist_wps, -self.unstable]
    }

    /// Pareto dominance under (min dist_wps, max unstable).
    pub fn dominates(&self, other: &Self) -> bool {
        let no_worse = self.dist_wps <= other.dist_wps && self.unstable >= other.unstable;
        let better = self.dist_wps < other.dist_wps || self.unstable > other.unstable;
        no_worse && better
    }
}

/// Outcome of evaluating one individual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluation {
    Feasible(ObjectiveVector),
    /// Death penalty: ranked below every feasible individual.
    Infeasible,
}

impl Evaluation {
    pub fn objectives(&self) -> Option<&ObjectiveVector> {
        match self {
            Evaluation::Feasible(o) => Some(o),
            Evaluation::Infeasible => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Evaluation::Feasible(_))
    }
}

/// Square root of the summed squared coordinate differences over all waypoints.
pub fn fit_dist_wps(candidate: &WaypointSet, original: &WaypointSet) -> Result<f64> {
    if candidate.len() != original.len() {
        return Err(Error::LengthMismatch {
            expected: original.len(),
            got: candidate.len(),
        });
    }
    let mut sum = 0.0;
    for (c, o) in candidate.waypoints().iter().zip(original.waypoints()) {
        let d = euclidean_distance(c, o)?;
        sum += d * d;
    }
    Ok(sum.sqrt())
}

/// Sum over attempted legs of sample count divided by the original leg length.
pub fn fit_unstable(result: &SimulationResult, original: &WaypointSet) -> Result<f64> {
    let lengths = original.leg_lengths();
    let mut total = 0.0;
    for sp in &result.subpaths {
        let len = *sp
            .leg
            .checked_sub(1)
            .and_then(|i| lengths.get(i))
            .ok_or_else(|| {
                Error::InvalidParameter(format!("sub-path for unknown leg {}", sp.leg))
            })?;
        if len <= 0.0 {
            return Err(Error::DegenerateLeg);
        }
        total += sp.samples.len() as f64 / len;
    }
    Ok(total)
}

/// Everything needed to evaluate individuals of one experiment.
#[derive(Debug)]
pub struct EvalContext {
    pub original: WaypointSet,
    pub bounds: SearchBounds,
    pub vessel: VesselConfig,
    leg_caps: Vec<usize>,
    evaluations: AtomicUsize,
    simulations: AtomicUsize,
}

impl EvalContext {
    pub fn new(original: WaypointSet, bounds: SearchBounds, vessel: VesselConfig) -> Result<Self> {
        vessel.validate()?;
        if original.dim() != vessel.dim() {
            return Err(Error::DimensionMismatch {
                expected: vessel.dim(),
                got: original.dim(),
            });
        }
        if bounds.len() != original.genotype_len() {
            return Err(Error::LengthMismatch {
                expected: original.genotype_len(),
                got: bounds.len(),
            });
        }
        if !validate_waypoint_set(&original, vessel.min_wp_dist) {
            return Err(Error::InvalidWaypoints(
                "original route violates the minimum waypoint distance".into(),
            ));
        }
        let leg_caps = vessel.leg_caps(&original);
        Ok(Self {
            original,
            bounds,
            vessel,
            leg_caps,
            evaluations: AtomicUsize::new(0),
            simulations: AtomicUsize::new(0),
        })
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn simulations(&self) -> usize {
        self.simulations.load(Ordering::Relaxed)
    }

    pub fn leg_caps(&self) -> &[usize] {
        &self.leg_caps
    }

    /// Decodes and checks bounds and the minimum waypoint distance.
    pub fn feasible_decode(&self, ind: &Individual) -> Option<WaypointSet> {
        if ind.len() != self.bounds.len() || !self.bounds.contains(ind) {
            return None;
        }
        let ws = decode(ind, &self.original).ok()?;
        validate_waypoint_set(&ws, self.vessel.min_wp_dist).then_some(ws)
    }

    /// Simulates a decoded route with this context's leg caps.
    pub fn simulate(&self, ws: &WaypointSet) -> Result<SimulationResult> {
        self.simulations.fetch_add(1, Ordering::Relaxed);
        simulate_with_caps(
            &self.vessel,
            ws,
            &VesselState::at_start(&self.vessel, ws),
            &self.leg_caps,
        )
    }

    pub fn evaluate(&self, ind: &Individual) -> Evaluation {
        self.evaluate_detailed(ind).0
    }

    /// Like [`EvalContext::evaluate`], also returning the simulation when one ran.
    pub fn evaluate_detailed(&self, ind: &Individual) -> (Evaluation, Option<SimulationResult>) {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        let Some(ws) = self.feasible_decode(ind) else {
            return (Evaluation::Infeasible, None);
        };
        let objectives = self.simulate(&ws).and_then(|sim| {
            let dist = fit_dist_wps(&ws, &self.original)?;
            let unstable = fit_unstable(&sim, &self.original)?;
            Ok((ObjectiveVector::new(dist, unstable)?, sim))
        });
        match objectives {
            Ok((o, sim)) => (Evaluation::Feasible(o), Some(sim)),
            Err(_) => (Evaluation::Infeasible, None),
        }
    }
}

/// One line of the JSON-lines evaluation log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub gen: usize,
    pub individual: Vec<f64>,
    pub feasible: bool,
    pub dist_wps: Option<f64>,
    pub unstable: Option<f64>,
}

impl EvalRecord {
    pub fn new(gen: usize, ind: &Individual, eval: &Evaluation) -> Self {
        let o = eval.objectives();
        Self {
            gen,
            individual: ind.values().to_vec(),
            feasible: eval.is_feasible(),
            dist_wps: o.map(|o| o.dist_wps),
            unstable: o.map(|o| o.unstable),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::make_bounds;
    use crate::simulator::{LegStatus, Sample, SubPath};
    use crate::vessels;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn route() -> WaypointSet {
        WaypointSet::from_rows(&[
            vec![0.0, 0.0],
            vec![100.0, 0.0],
            vec![200.0, 0.0],
            vec![300.0, 0.0],
        ])
        .unwrap()
    }

    fn synthetic(counts: &[usize]) -> SimulationResult {
        let subpaths = counts
            .iter()
            .enumerate()
            .map(|(i, &n)| SubPath {
                leg: i + 1,
                samples: vec![
                    Sample {
                        t: 0.0,
                        x: 0.0,
                        y: 0.0,
                        z: 0.0,
                        roll: 0.0,
                        pitch: 0.0,
                        yaw: 0.0
                    };
                    n
                ],
                status: LegStatus::Completed,
            })
            .collect();
        SimulationResult::new(2, subpaths)
    }

    fn mariner_ctx() -> EvalContext {
        let reg = vessels::builtin();
        let (route, delta) = reg.route("mariner").unwrap();
        let bounds = make_bounds(&route, delta).unwrap();
        EvalContext::new(route, bounds, reg.vessel("mariner").unwrap().clone()).unwrap()
    }

    #[test]
    fn dist_identity_and_pythagoras() {
        let o = route();
        assert_eq!(fit_dist_wps(&o, &o).unwrap(), 0.0);
        let mut rows = o.to_rows();
        rows[1][0] += 3.0;
        rows[1][1] += 4.0;
        let c = WaypointSet::from_rows(&rows).unwrap();
        assert_eq!(fit_dist_wps(&c, &o).unwrap(), 5.0);
    }

    #[test]
    fn dist_matches_per_coordinate_accumulation() {
        let o = route();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let rows: Vec<Vec<f64>> = o
                .to_rows()
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    r.iter()
                        .map(|&c| {
                            if i == 0 {
                                c
                            } else {
                                c + rng.gen_range(-50.0..50.0)
                            }
                        })
                        .collect()
                })
                .collect();
            let c = WaypointSet::from_rows(&rows).unwrap();
            let mut acc = 0.0;
            for (a, b) in rows.iter().zip(o.to_rows()) {
                for (x, y) in a.iter().zip(b) {
                    acc += (x - y) * (x - y);
                }
            }
            assert!((fit_dist_wps(&c, &o).unwrap() - acc.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn dist_rejects_length_mismatch() {
        let short = WaypointSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(fit_dist_wps(&short, &route()).is_err());
    }

    #[test]
    fn unstable_direct_substitution() {
        let one = WaypointSet::from_rows(&[vec![0.0, 0.0], vec![100.0, 0.0]]).unwrap();
        assert_eq!(fit_unstable(&synthetic(&[200]), &one).unwrap(), 2.0);
        let two =
            WaypointSet::from_rows(&[vec![0.0, 0.0], vec![50.0, 0.0], vec![100.0, 0.0]]).unwrap();
        assert_eq!(fit_unstable(&synthetic(&[50, 50]), &two).unwrap(), 2.0);
    }

    #[test]
    fn unattempted_legs_contribute_nothing() {
        assert_eq!(fit_unstable(&synthetic(&[100]), &route()).unwrap(), 1.0);
    }

    #[test]
    fn unstable_replays_from_trace_csv() {
        let ctx = mariner_ctx();
        let sim = ctx.simulate(&ctx.original).unwrap();
        let mut buf = Vec::new();
        sim.write_trace_csv(&mut buf).unwrap();
        let mut counts = std::collections::BTreeMap::<usize, usize>::new();
        for line in std::str::from_utf8(&buf).unwrap().lines().skip(1) {
            let leg: usize = line.split(',').next().unwrap().parse().unwrap();
            *counts.entry(leg).or_default() += 1;
        }
        let lengths = ctx.original.leg_lengths();
        let expected: f64 = counts
            .iter()
            .map(|(&leg, &n)| n as f64 / lengths[leg - 1])
            .sum();
        assert_eq!(fit_unstable(&sim, &ctx.original).unwrap(), expected);
    }

    #[test]
    fn original_is_feasible_with_zero_distance() {
        let ctx = mariner_ctx();
        let ind = ctx.original.flatten();
        let Evaluation::Feasible(o) = ctx.evaluate(&ind) else {
            panic!("original must be feasible");
        };
        assert_eq!(o.dist_wps, 0.0);
        assert!(o.unstable > 0.0);
        assert_eq!((ctx.evaluations(), ctx.simulations()), (1, 1));
    }

    #[test]
    fn collapsed_waypoints_are_never_simulated() {
        let ctx = mariner_ctx();
        let mut values = ctx.original.flatten().into_values();
        // move wp2 onto wp3
        values[0] = values[2];
        values[1] = values[3];
        let eval = ctx.evaluate(&Individual::new(values));
        assert_eq!(eval, Evaluation::Infeasible);
        assert_eq!((ctx.evaluations(), ctx.simulations()), (1, 0));
    }

    #[test]
    fn out_of_bounds_is_infeasible() {
        let ctx = mariner_ctx();
        let mut values = ctx.original.flatten().into_values();
        values[0] += 2.0 * ctx.bounds.delta();
        assert_eq!(
            ctx.evaluate(&Individual::new(values)),
            Evaluation::Infeasible
        );
        assert_eq!(ctx.simulations(), 0);
    }

    #[test]
    fn feasibility_partition_matches_validator() {
        let ctx = mariner_ctx();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut infeasible = 0;
        for _ in 0..100 {
            let values: Vec<f64> = (0..ctx.bounds.len())
                .map(|i| {
                    let (lo, hi) = ctx.bounds.interval(i);
                    rng.gen_range(lo..=hi)
                })
                .collect();
            let ind = Individual::new(values);
            let ws = decode(&ind, &ctx.original).unwrap();
            let valid = validate_waypoint_set(&ws, ctx.vessel.min_wp_dist);
            let before = ctx.simulations();
            assert_eq!(ctx.evaluate(&ind).is_feasible(), valid);
            assert_eq!(ctx.simulations() - before, usize::from(valid));
            infeasible += usize::from(!valid);
        }
        assert_eq!(ctx.evaluations(), 100);
        assert!(infeasible > 0, "sample should exercise both branches");
    }

    #[test]
    fn eval_record_serializes_infeasible_as_null() {
        let ind = Individual::new(vec![1.0, 2.0]);
        let line =
            serde_json::to_string(&EvalRecord::new(3, &ind, &Evaluation::Infeasible)).unwrap();
        assert_eq!(
            line,
            r#"{"gen":3,"individual":[1.0,2.0],"feasible":false,"dist_wps":null,"unstable":null}"#
        );
    }

    proptest! {
        #[test]
        fn dist_scales_linearly(offsets in prop::collection::vec(-100.0f64..100.0, 6), c in 0.0f64..10.0) {
            let o = route();
            let shifted = |k: f64| {
                let mut rows = o.to_rows();
                for (i, d) in offsets.iter().enumerate() {
                    rows[1 + i / 2][i % 2] += k * d;
                }
                WaypointSet::from_rows(&rows).unwrap()
            };
            let base = fit_dist_wps(&shifted(1.0), &o).unwrap();
            let scaled = fit_dist_wps(&shifted(c), &o).unwrap();
            prop_assert!((scaled - c * base).abs() <= 1e-9 * (1.0 + c * base));
        }

        #[test]
        fn unstable_monotone_in_samples(counts in prop::collection::vec(0usize..500, 3), leg in 0usize..3, extra in 1usize..100) {
            let o = route();
            let before = fit_unstable(&synthetic(&counts), &o).unwrap();
            let mut more = counts.clone();
            more[leg] += extra;
            prop_assert!(fit_unstable(&synthetic(&more), &o).unwrap() > before);
        }
    }
}
