//! Hypervolume and the pairwise statistical comparison of approaches.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::fitness::ObjectiveVector;

/// Relative margin added to the worst observed value to form a reference point.
pub const REFERENCE_MARGIN: f64 = 0.01;

/// Reference point used on normalized objectives.
pub const NORMALIZED_REFERENCE: [f64; 2] = [1.0 + REFERENCE_MARGIN, 1.0 + REFERENCE_MARGIN];

/// Exact 2D hypervolume of minimization `points` against `reference`.
///
/// Every point must weakly dominate the reference.
pub fn hypervolume_2d(points: &[[f64; 2]], reference: [f64; 2]) -> Result<f64> {
    for p in points {
        if !(p[0] <= reference[0] && p[1] <= reference[1]) {
            return Err(Error::ReferenceNotDominated(p[0], p[1]));
        }
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut volume = 0.0;
    let mut ceiling = reference[1];
    for p in sorted {
        if p[1] < ceiling {
            volume += (reference[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    Ok(volume)
}

/// Coordinate-wise worst (largest) value plus a 1% margin of its magnitude.
pub fn choose_reference(points: &[[f64; 2]]) -> Result<[f64; 2]> {
    if points.is_empty() {
        return Err(Error::InsufficientData(
            "no points to derive a reference from".into(),
        ));
    }
    let mut worst = [f64::NEG_INFINITY; 2];
    for p in points {
        worst[0] = worst[0].max(p[0]);
        worst[1] = worst[1].max(p[1]);
    }
    Ok(worst.map(|w| w + REFERENCE_MARGIN * w.abs()))
}

/// Min-max scaling of minimization-oriented objectives over a global point set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Normalizer {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a ObjectiveVector>) -> Result<Self> {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        let mut any = false;
        for o in points {
            let m = o.as_minimization();
            for k in 0..2 {
                min[k] = min[k].min(m[k]);
                max[k] = max[k].max(m[k]);
            }
            any = true;
        }
        if !any {
            return Err(Error::InsufficientData(
                "no feasible objective vectors".into(),
            ));
        }
        Ok(Self { min, max })
    }

    /// Maps into `[0, 1]`; a degenerate objective maps to 0.
    pub fn apply(&self, o: &ObjectiveVector) -> [f64; 2] {
        let m = o.as_minimization();
        let mut out = [0.0; 2];
        for k in 0..2 {
            let range = self.max[k] - self.min[k];
            out[k] = if range > 0.0 {
                (m[k] - self.min[k]) / range
            } else {
                0.0
            };
        }
        out
    }

    /// Hypervolume of one front in normalized space; an empty front scores 0.
    pub fn hypervolume(&self, front: &[ObjectiveVector]) -> Result<f64> {
        let pts: Vec<[f64; 2]> = front.iter().map(|o| self.apply(o)).collect();
        hypervolume_2d(&pts, NORMALIZED_REFERENCE)
    }
}

/// Two-sided Mann-Whitney U test p-value.
///
/// Exact when the combined size is at most 20 and there are no ties,
/// otherwise the normal approximation with tie and continuity corrections.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData(
            "Mann-Whitney needs two nonempty samples".into(),
        ));
    }
    let (na, nb) = (a.len(), b.len());
    let ranks = RankSum::new(a, b);
    let u = ranks.u_a();
    if na + nb <= 20 && !ranks.has_ties {
        return Ok(exact_p(u, na, nb));
    }
    let n = (na + nb) as f64;
    let (naf, nbf) = (na as f64, nb as f64);
    let mean = naf * nbf / 2.0;
    let var = naf * nbf / 12.0 * ((n + 1.0) - ranks.tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return Ok(1.0);
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    Ok(erfc(z / std::f64::consts::SQRT_2).min(1.0))
}

/// `P(U = k)` counts for all rank assignments, then doubles the smaller tail.
fn exact_p(u: f64, na: usize, nb: usize) -> f64 {
    let max_u = na * nb;
    // counts[m][n][k]: arrangements of m a's and n b's with U = k, built row by row
    let mut prev: Vec<Vec<f64>> = vec![vec![1.0]; nb + 1];
    for m in 1..=na {
        let mut cur: Vec<Vec<f64>> = Vec::with_capacity(nb + 1);
        cur.push(vec![1.0]);
        for n in 1..=nb {
            let mut c = vec![0.0; m * n + 1];
            // the largest element is an a (beats all n b's) or a b
            for (k, v) in prev[n].iter().enumerate() {
                c[k + n] += v;
            }
            for (k, v) in cur[n - 1].iter().enumerate() {
                c[k] += v;
            }
            cur.push(c);
        }
        prev = cur;
    }
    let counts = &prev[nb];
    debug_assert_eq!(counts.len(), max_u + 1);
    let total: f64 = counts.iter().sum();
    let k = u.round() as usize;
    let lower: f64 = counts[..=k].iter().sum::<f64>() / total;
    let upper: f64 = counts[k..].iter().sum::<f64>() / total;
    (2.0 * lower.min(upper)).min(1.0)
}

struct RankSum {
    rank_sum_a: f64,
    na: usize,
    has_ties: bool,
    /// Sum of `t^3 - t` over tie groups.
    tie_term: f64,
}

impl RankSum {
    fn new(a: &[f64], b: &[f64]) -> Self {
        let mut all: Vec<(f64, bool)> = a
            .iter()
            .map(|&v| (v, true))
            .chain(b.iter().map(|&v| (v, false)))
            .collect();
        all.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut rank_sum_a = 0.0;
        let mut tie_term = 0.0;
        let mut has_ties = false;
        let mut i = 0;
        while i < all.len() {
            let mut j = i + 1;
            while j < all.len() && all[j].0 == all[i].0 {
                j += 1;
            }
            let t = (j - i) as f64;
            // average of 1-based ranks i+1..=j
            let rank = (i + 1 + j) as f64 / 2.0;
            if t > 1.0 {
                has_ties = true;
                tie_term += t * t * t - t;
            }
            rank_sum_a += rank * all[i..j].iter().filter(|x| x.1).count() as f64;
            i = j;
        }
        Self {
            rank_sum_a,
            na: a.len(),
            has_ties,
            tie_term,
        }
    }

    fn u_a(&self) -> f64 {
        let na = self.na as f64;
        self.rank_sum_a - na * (na + 1.0) / 2.0
    }
}

/// Probability that a draw from `a` exceeds one from `b` (ties count half).
pub fn vargha_delaney_a12(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData(
            "A12 needs two nonempty samples".into(),
        ));
    }
    let u = RankSum::new(a, b).u_a();
    Ok(u / (a.len() * b.len()) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strength {
    #[serde(rename = "negligible")]
    Negligible,
    #[serde(rename = "small")]
    Small,
    #[serde(rename = "medium")]
    Medium,
    #[serde(rename = "large")]
    Large,
    #[serde(rename = "ND")]
    NotDifferent,
}

impl Strength {
    pub fn as_str(self) -> &'static str {
        match self {
            Strength::Negligible => "negligible",
            Strength::Small => "small",
            Strength::Medium => "medium",
            Strength::Large => "large",
            Strength::NotDifferent => "ND",
        }
    }
}

impl fmt::Display for Strength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Effect-size bucket of an A12 value.
pub fn strength_of(a12: f64) -> Result<Strength> {
    if !(0.0..=1.0).contains(&a12) {
        return Err(Error::InvalidParameter(format!(
            "A12 must lie in [0, 1], got {a12}"
        )));
    }
    Ok(if a12 <= 0.29 || a12 >= 0.71 {
        Strength::Large
    } else if a12 <= 0.34 || a12 >= 0.64 {
        Strength::Medium
    } else if a12 <= 0.44 || a12 >= 0.56 {
        Strength::Small
    } else {
        Strength::Negligible
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "ND")]
    NotDifferent,
    #[serde(rename = "A-better")]
    ABetter,
    #[serde(rename = "B-better")]
    BBetter,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NotDifferent => "ND",
            Verdict::ABetter => "A-better",
            Verdict::BBetter => "B-better",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub approach_a: String,
    pub approach_b: String,
    pub p_value: f64,
    pub a12: f64,
    pub verdict: Verdict,
    pub strength: Strength,
}

/// Compares two HV samples: not different if `p >= alpha`, otherwise the side
/// favoured by A12 wins (higher HV is better).
pub fn compare_samples(
    approach_a: &str,
    a: &[f64],
    approach_b: &str,
    b: &[f64],
    alpha: f64,
) -> Result<ComparisonResult> {
    let p_value = mann_whitney_u(a, b)?;
    let a12 = vargha_delaney_a12(a, b)?;
    let (verdict, strength) = if p_value >= alpha {
        (Verdict::NotDifferent, Strength::NotDifferent)
    } else if a12 > 0.5 {
        (Verdict::ABetter, strength_of(a12)?)
    } else {
        (Verdict::BBetter, strength_of(a12)?)
    };
    Ok(ComparisonResult {
        approach_a: approach_a.to_string(),
        approach_b: approach_b.to_string(),
        p_value,
        a12,
        verdict,
        strength,
    })
}

/// Per-run hypervolumes of one approach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproachHv {
    pub approach: String,
    pub values: Vec<f64>,
    /// Indices of runs whose front was empty (scored 0).
    pub empty_runs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub normalizer: Normalizer,
    pub hypervolumes: Vec<ApproachHv>,
    pub results: Vec<ComparisonResult>,
}

/// Per-run fronts grouped by approach.
pub type ApproachFronts = (String, Vec<Vec<ObjectiveVector>>);

/// Normalized hypervolume per run with a shared normalization over every front.
pub fn hypervolumes(groups: &[ApproachFronts]) -> Result<(Normalizer, Vec<ApproachHv>)> {
    let normalizer = Normalizer::from_points(groups.iter().flat_map(|g| g.1.iter().flatten()))?;
    let mut out = Vec::with_capacity(groups.len());
    for (approach, fronts) in groups {
        let values = fronts
            .iter()
            .map(|f| normalizer.hypervolume(f))
            .collect::<Result<Vec<_>>>()?;
        let empty_runs = fronts
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_empty())
            .map(|(i, _)| i)
            .collect();
        out.push(ApproachHv {
            approach: approach.clone(),
            values,
            empty_runs,
        });
    }
    Ok((normalizer, out))
}

/// All unordered approach pairs, in input order.
pub fn compare(groups: &[ApproachFronts], alpha: f64) -> Result<Comparison> {
    if groups.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least two approaches".into(),
        ));
    }
    if let Some((name, runs)) = groups.iter().find(|g| g.1.len() < 2) {
        return Err(Error::InsufficientData(format!(
            "approach {name} has {} run(s), need at least 2",
            runs.len()
        )));
    }
    let (normalizer, hv) = hypervolumes(groups)?;
    let mut results = Vec::new();
    for i in 0..hv.len() {
        for j in i + 1..hv.len() {
            results.push(compare_samples(
                &hv[i].approach,
                &hv[i].values,
                &hv[j].approach,
                &hv[j].values,
                alpha,
            )?);
        }
    }
    Ok(Comparison {
        normalizer,
        hypervolumes: hv,
        results,
    })
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}
