//! Autocorrelation-based stability classification of sub-paths and full paths.
//!
//! An attitude signal is unstable when its sample autocorrelation has more
//! than one local peak above 0.1 (lag 0 excluded). A sub-path is `Missing` if
//! its waypoint was never reached, `Unstable` if any of roll, pitch or yaw is
//! unstable, and `Stable` otherwise.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{LegStatus, SimulationResult, SubPath};

/// Peak height above which an autocorrelation peak counts.
pub const PEAK_THRESHOLD: f64 = 0.1;

/// Signals whose standard deviation is below this (rad) are treated as constant.
pub const CONSTANT_SIGNAL_STD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubPathClass {
    Stable,
    Unstable,
    Missing,
}

impl SubPathClass {
    pub const ALL: [SubPathClass; 3] = [
        SubPathClass::Stable,
        SubPathClass::Unstable,
        SubPathClass::Missing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SubPathClass::Stable => "stable",
            SubPathClass::Unstable => "unstable",
            SubPathClass::Missing => "missing",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "stable" => Some(SubPathClass::Stable),
            "unstable" => Some(SubPathClass::Unstable),
            "missing" => Some(SubPathClass::Missing),
            _ => None,
        }
    }
}

impl fmt::Display for SubPathClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-leg classes of one simulated path, in leg order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathCategory(pub Vec<SubPathClass>);

impl PathCategory {
    pub fn count(&self, class: SubPathClass) -> usize {
        self.0.iter().filter(|c| **c == class).count()
    }
}

impl fmt::Display for PathCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letters: String = self
            .0
            .iter()
            .map(|c| match c {
                SubPathClass::Stable => 'S',
                SubPathClass::Unstable => 'U',
                SubPathClass::Missing => 'M',
            })
            .collect();
        f.write_str(&letters)
    }
}

/// Mean-removed, variance-normalised sample autocorrelation for lags
/// `0..=min(n - 1, n / 2)`.
///
/// Signals with (near-)zero variance give `[1, 0, 0, ...]`.
pub fn autocorrelation(signal: &[f64]) -> Result<Vec<f64>> {
    let n = signal.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "autocorrelation needs at least 2 samples, got {n}"
        )));
    }
    let max_lag = (n - 1).min(n / 2);
    let mean = signal.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = signal.iter().map(|v| v - mean).collect();
    let denom: f64 = centred.iter().map(|v| v * v).sum();
    let mut acf = vec![0.0; max_lag + 1];
    acf[0] = 1.0;
    if (denom / n as f64).sqrt() <= CONSTANT_SIGNAL_STD {
        return Ok(acf);
    }
    for (lag, slot) in acf.iter_mut().enumerate().skip(1) {
        let num: f64 = centred[..n - lag]
            .iter()
            .zip(&centred[lag..])
            .map(|(a, b)| a * b)
            .sum();
        *slot = num / denom;
    }
    Ok(acf)
}

/// Counts strict local maxima above `threshold` among lags `>= 1`.
///
/// A plateau counts once, at its first index, when the values on both sides
/// of it are lower. The last lag has no right neighbour and is never a peak.
pub fn count_threshold_peaks(acf: &[f64], threshold: f64) -> usize {
    let mut peaks = 0;
    let mut i = 1;
    while i + 1 < acf.len() {
        if acf[i] > acf[i - 1] {
            let mut j = i;
            while j + 1 < acf.len() && acf[j + 1] == acf[i] {
                j += 1;
            }
            if j + 1 < acf.len() && acf[j + 1] < acf[i] && acf[i] > threshold {
                peaks += 1;
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Removes 2*pi jumps from a wrapped angle sequence.
pub fn unwrap_angles(signal: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(signal.len());
    let mut offset = 0.0;
    for (i, &v) in signal.iter().enumerate() {
        if i > 0 {
            let d = v - signal[i - 1];
            if d > PI {
                offset -= 2.0 * PI;
            } else if d < -PI {
                offset += 2.0 * PI;
            }
        }
        out.push(v + offset);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleClass {
    Stable,
    Unstable,
}

pub fn classify_angle(signal: &[f64]) -> Result<AngleClass> {
    let peaks = count_threshold_peaks(&autocorrelation(signal)?, PEAK_THRESHOLD);
    Ok(if peaks > 1 {
        AngleClass::Unstable
    } else {
        AngleClass::Stable
    })
}

pub fn classify_subpath(sp: &SubPath) -> SubPathClass {
    if sp.status == LegStatus::Missing {
        return SubPathClass::Missing;
    }
    // a single sample cannot oscillate
    if sp.samples.len() < 2 {
        return SubPathClass::Stable;
    }
    let channels = [sp.roll(), sp.pitch(), unwrap_angles(&sp.yaw())];
    let unstable = channels
        .iter()
        .any(|c| matches!(classify_angle(c), Ok(AngleClass::Unstable)));
    if unstable {
        SubPathClass::Unstable
    } else {
        SubPathClass::Stable
    }
}

pub fn categorize_path(result: &SimulationResult) -> PathCategory {
    PathCategory(result.subpaths.iter().map(classify_subpath).collect())
}

/// Number of distinct full-path categorisations for a route of `n` waypoints,
/// `2^(n-1) + 2(n-2)`.
pub fn max_categories(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "routes need at least 2 waypoints, got {n}"
        )));
    }
    Ok((1usize << (n - 1)) + 2 * (n - 2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub paths: usize,
    pub subpaths: usize,
    /// Percentage of sub-path slots per class (0-100).
    pub percentages: BTreeMap<SubPathClass, f64>,
    pub unique_categories: usize,
    pub max_categories: usize,
    pub unique_percentage: f64,
}

impl ClassSummary {
    pub fn percentage(&self, class: SubPathClass) -> f64 {
        self.percentages.get(&class).copied().unwrap_or(0.0)
    }
}

pub fn summarize(categories: &[PathCategory], n: usize) -> Result<ClassSummary> {
    let max = max_categories(n)?;
    let slots: usize = categories.iter().map(|c| c.0.len()).sum();
    let percentages = SubPathClass::ALL
        .iter()
        .map(|&class| {
            let count: usize = categories.iter().map(|c| c.count(class)).sum();
            let pct = if slots == 0 {
                0.0
            } else {
                100.0 * count as f64 / slots as f64
            };
            (class, pct)
        })
        .collect();
    let unique = categories.iter().collect::<HashSet<_>>().len();
    Ok(ClassSummary {
        paths: categories.len(),
        subpaths: slots,
        percentages,
        unique_categories: unique,
        max_categories: max,
        unique_percentage: 100.0 * unique as f64 / max as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::Sample;

    fn sine(periods: f64, n: usize, amp: f64) -> Vec<f64> {
        (0..n)
            .map(|i| amp * (2.0 * PI * periods * i as f64 / n as f64).sin())
            .collect()
    }

    fn subpath(roll: &[f64], yaw: &[f64], status: LegStatus) -> SubPath {
        SubPath {
            leg: 1,
            samples: roll
                .iter()
                .zip(yaw)
                .enumerate()
                .map(|(i, (&r, &y))| Sample {
                    t: i as f64,
                    x: i as f64,
                    y: 0.0,
                    z: 0.0,
                    roll: r,
                    pitch: 0.0,
                    yaw: y,
                })
                .collect(),
            status,
        }
    }

    #[test]
    fn constant_signal_acf() {
        let acf = autocorrelation(&[0.3; 50]).unwrap();
        assert_eq!(acf[0], 1.0);
        assert!(acf[1..].iter().all(|v| *v == 0.0));
        assert_eq!(acf.len(), 26);
    }

    #[test]
    fn short_signal_rejected() {
        assert!(autocorrelation(&[1.0]).is_err());
        assert_eq!(autocorrelation(&[1.0, 2.0]).unwrap().len(), 2);
    }

    #[test]
    fn alternating_signal_lag_one() {
        let n = 200;
        let s: Vec<f64> = (0..n)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let acf = autocorrelation(&s).unwrap();
        // closed form for the biased estimator: -(n-1)/n
        assert!((acf[1] + (n as f64 - 1.0) / n as f64).abs() < 1e-12);
    }

    #[test]
    fn white_noise_acf_small() {
        use rand::SeedableRng;
        use rand_distr_free::normal;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let s: Vec<f64> = (0..1000).map(|_| normal(&mut rng)).collect();
        let acf = autocorrelation(&s).unwrap();
        assert!(acf[1..].iter().all(|v| v.abs() < 0.1));
    }

    /// Box-Muller, kept local so the test does not depend on a distributions crate.
    mod rand_distr_free {
        use rand::Rng;
        pub fn normal<R: Rng>(rng: &mut R) -> f64 {
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        }
    }

    #[test]
    fn peaks_examples() {
        let decaying: Vec<f64> = (0..50).map(|k| 0.9f64.powi(k)).collect();
        assert_eq!(count_threshold_peaks(&decaying, 0.1), 0);

        // ACF of a sinusoid is a cosine of the same period; 3 periods of lag
        let period = 20.0;
        let cosine: Vec<f64> = (0..=60)
            .map(|k| (2.0 * PI * k as f64 / period).cos())
            .collect();
        assert!(count_threshold_peaks(&cosine, 0.1) >= 2);

        let mut bump = vec![1.0, 0.5, 0.0, 0.02, 0.05, 0.02, 0.0, -0.1];
        assert_eq!(count_threshold_peaks(&bump, 0.1), 0);
        bump[4] = 0.2;
        assert_eq!(count_threshold_peaks(&bump, 0.1), 1);
    }

    #[test]
    fn plateau_counted_once() {
        let acf = [1.0, 0.0, 0.5, 0.5, 0.5, 0.0, 0.4, 0.4, 0.6, 0.0];
        // plateau at 0.5 counts; 0.4 plateau rises into 0.6 so only 0.6 counts
        assert_eq!(count_threshold_peaks(&acf, 0.1), 2);
    }

    #[test]
    fn classify_angle_examples() {
        assert_eq!(classify_angle(&[0.2; 100]).unwrap(), AngleClass::Stable);
        assert_eq!(
            classify_angle(&sine(5.0, 400, 0.1)).unwrap(),
            AngleClass::Unstable
        );
        // 3 periods: the only interior peak within n/2 lags sits at one period
        let s = sine(3.0, 300, 0.1);
        let acf = autocorrelation(&s).unwrap();
        assert_eq!(count_threshold_peaks(&acf, 0.1), 1);
        assert_eq!(classify_angle(&s).unwrap(), AngleClass::Stable);
    }

    #[test]
    fn subpath_precedence_and_classes() {
        let flat = vec![0.0; 100];
        assert_eq!(
            classify_subpath(&subpath(&flat, &flat, LegStatus::Missing)),
            SubPathClass::Missing
        );
        assert_eq!(
            classify_subpath(&subpath(&flat, &flat, LegStatus::Completed)),
            SubPathClass::Stable
        );
        let wavy = sine(5.0, 100, 0.3);
        assert_eq!(
            classify_subpath(&subpath(&flat, &wavy, LegStatus::Completed)),
            SubPathClass::Unstable
        );
        assert_eq!(
            classify_subpath(&subpath(&wavy, &flat, LegStatus::Missing)),
            SubPathClass::Missing
        );
    }

    #[test]
    fn clean_turn_is_not_oscillation() {
        // heading ramp across the wrap point, then steady
        let yaw: Vec<f64> = (0..200)
            .map(|i| crate::simulator::wrap_angle(3.0 + (i.min(60) as f64) * 0.01))
            .collect();
        let flat = vec![0.0; 200];
        assert_eq!(
            classify_subpath(&subpath(&flat, &yaw, LegStatus::Completed)),
            SubPathClass::Stable
        );
    }

    #[test]
    fn categorize_mixed_and_truncated() {
        let flat = vec![0.0; 100];
        let wavy = sine(6.0, 100, 0.2);
        let legs = vec![
            subpath(&flat, &flat, LegStatus::Completed),
            subpath(&wavy, &flat, LegStatus::Completed),
            subpath(&flat, &flat, LegStatus::Completed),
        ];
        let result = SimulationResult::new(2, legs);
        let cat = categorize_path(&result);
        assert_eq!(
            cat.0,
            vec![
                SubPathClass::Stable,
                SubPathClass::Unstable,
                SubPathClass::Stable
            ]
        );
        assert_eq!(cat.to_string(), "SUS");
    }

    #[test]
    fn summary_examples() {
        assert_eq!(max_categories(7).unwrap(), 74);
        assert_eq!(max_categories(6).unwrap(), 40);
        assert!(max_categories(1).is_err());
        let cat = PathCategory(vec![SubPathClass::Stable; 6]);
        let s = summarize(&vec![cat; 30], 7).unwrap();
        assert_eq!(s.unique_categories, 1);
        assert_eq!(s.percentage(SubPathClass::Stable), 100.0);
        assert!((s.unique_percentage - 100.0 / 74.0).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn class() -> impl Strategy<Value = SubPathClass> {
            prop_oneof![
                Just(SubPathClass::Stable),
                Just(SubPathClass::Unstable),
                Just(SubPathClass::Missing)
            ]
        }

        proptest! {
            #[test]
            fn acf_bounded(signal in prop::collection::vec(-3.0..3.0f64, 2..300)) {
                let acf = autocorrelation(&signal).unwrap();
                for v in acf {
                    prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&v));
                }
            }

            #[test]
            fn percentages_sum_to_100(cats in prop::collection::vec(prop::collection::vec(class(), 1..7), 1..20)) {
                let cats: Vec<_> = cats.into_iter().map(PathCategory).collect();
                let s = summarize(&cats, 7).unwrap();
                let total: f64 = s.percentages.values().sum();
                prop_assert!((total - 100.0).abs() < 0.01);
            }

            #[test]
            fn adding_stable_leg_keeps_other_counts(legs in prop::collection::vec(class(), 0..7), at in 0usize..8) {
                let before = PathCategory(legs.clone());
                let mut grown = legs;
                let at = at.min(grown.len());
                grown.insert(at, SubPathClass::Stable);
                let after = PathCategory(grown);
                prop_assert_eq!(before.count(SubPathClass::Unstable), after.count(SubPathClass::Unstable));
                prop_assert_eq!(before.count(SubPathClass::Missing), after.count(SubPathClass::Missing));
            }
        }
    }
}
