//! Experiment orchestration: configs, repeated runs, persistence and reports.

mod report;
mod store;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use report::{
    class_table, classification_summary, classification_table, classify_runs, compare_runs,
    comparison_table, hypervolume_tables, unique_path_table, write_classification,
    write_comparison, write_hypervolumes, write_report, ReportFiles, RunClassification, Table,
    VesselComparison,
};
pub use store::{load_runs, write_run, RunMeta, StoredRun};

use crate::domain::{make_bounds, validate_waypoint_set, VesselConfig, WaypointSet};
use crate::error::{Error, Result};
use crate::fitness::EvalContext;
use crate::search::{nsga2_run, random_search_run, RunRecord, SearchConfig, Seeding};
use crate::vessels;

/// The compared approaches: NSGA-II under each seeding strategy, and random search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Approach {
    #[serde(rename = "WPgen_seed")]
    WpgenSeed,
    #[serde(rename = "WPgen_comb")]
    WpgenComb,
    #[serde(rename = "WPgen_rnd")]
    WpgenRnd,
    #[serde(rename = "RS")]
    Rs,
}

impl Approach {
    pub const ALL: [Approach; 4] = [
        Approach::WpgenSeed,
        Approach::WpgenComb,
        Approach::WpgenRnd,
        Approach::Rs,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Approach::WpgenSeed => "WPgen_seed",
            Approach::WpgenComb => "WPgen_comb",
            Approach::WpgenRnd => "WPgen_rnd",
            Approach::Rs => "RS",
        }
    }

    pub fn seeding(self) -> Option<Seeding> {
        match self {
            Approach::WpgenSeed => Some(Seeding::Seed),
            Approach::WpgenComb => Some(Seeding::Comb),
            Approach::WpgenRnd => Some(Seeding::Rnd),
            Approach::Rs => None,
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Approach {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Approach::ALL
            .into_iter()
            .find(|a| a.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown approach {s:?}; expected one of WPgen_seed, WPgen_comb, WPgen_rnd, RS"
                ))
            })
    }
}

/// Run seed: first 8 bytes (little endian) of SHA-256 over the base seed,
/// the approach id and the repetition index.
pub fn derive_seed(base_seed: u64, approach: Approach, repetition: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(base_seed.to_le_bytes());
    h.update(approach.id().as_bytes());
    h.update([0u8]);
    h.update((repetition as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub vessel: VesselConfig,
    pub waypoints: Vec<Vec<f64>>,
    pub delta: f64,
    pub search: SearchConfig,
    pub approaches: Vec<Approach>,
    pub repetitions: usize,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum VesselSpec {
    Preset(String),
    Custom(Box<VesselConfig>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    vessel: VesselSpec,
    waypoints: Option<Vec<Vec<f64>>>,
    delta: Option<f64>,
    search: Option<SearchConfig>,
    approaches: Option<Vec<Approach>>,
    repetitions: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses a JSON config. Missing `waypoints`/`delta` fall back to the
    /// vessel's preset route; `search` falls back to desk-scale defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text)?;
        let (vessel, preset) = match raw.vessel {
            VesselSpec::Preset(name) => {
                let v = vessels::vessel(&name)?;
                let route = vessels::builtin().route(&name).ok();
                (v, route)
            }
            VesselSpec::Custom(v) => (*v, None),
        };
        let waypoints = match (raw.waypoints, &preset) {
            (Some(w), _) => w,
            (None, Some((route, _))) => route.to_rows(),
            (None, None) => {
                return Err(Error::InvalidParameter(
                    "config needs `waypoints` for a custom vessel".into(),
                ))
            }
        };
        let delta = match (raw.delta, &preset) {
            (Some(d), _) => d,
            (None, Some((_, d))) => *d,
            (None, None) => {
                return Err(Error::InvalidParameter(
                    "config needs `delta` for a custom vessel".into(),
                ))
            }
        };
        let cfg = Self {
            out: raw
                .out
                .unwrap_or_else(|| PathBuf::from("out").join(&vessel.name)),
            vessel,
            waypoints,
            delta,
            search: raw.search.unwrap_or_else(desk_scale_search),
            approaches: raw.approaches.unwrap_or_else(|| Approach::ALL.to_vec()),
            repetitions: raw.repetitions.unwrap_or(DESK_REPETITIONS),
            seed: raw.seed.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(e) => Error::Format {
                path: path.to_path_buf(),
                message: e.to_string(),
            },
            other => other,
        })
    }

    pub fn original(&self) -> Result<WaypointSet> {
        WaypointSet::from_rows(&self.waypoints)
    }

    pub fn validate(&self) -> Result<()> {
        self.vessel.validate()?;
        self.search.validate()?;
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter(
                "repetitions must be at least 1".into(),
            ));
        }
        if self.approaches.is_empty() {
            return Err(Error::InvalidParameter("no approaches selected".into()));
        }
        let original = self.original()?;
        if original.dim() != self.vessel.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.vessel.dim(),
                got: original.dim(),
            });
        }
        if !validate_waypoint_set(&original, self.vessel.min_wp_dist) {
            return Err(Error::InvalidWaypoints(format!(
                "original route has consecutive waypoints closer than {} m",
                self.vessel.min_wp_dist
            )));
        }
        make_bounds(&original, self.delta)?;
        Ok(())
    }

    pub fn context(&self) -> Result<EvalContext> {
        let original = self.original()?;
        let bounds = make_bounds(&original, self.delta)?;
        EvalContext::new(original, bounds, self.vessel.clone())
    }

    /// Search config for one run, with its derived seed and the approach's seeding.
    pub fn run_search_config(&self, approach: Approach, repetition: usize) -> SearchConfig {
        SearchConfig {
            rng_seed: derive_seed(self.seed, approach, repetition),
            seeding: approach.seeding().unwrap_or(self.search.seeding),
            ..self.search.clone()
        }
    }
}

pub const DESK_REPETITIONS: usize = 10;
pub const DESK_GENERATIONS: usize = 100;

pub fn desk_scale_search() -> SearchConfig {
    SearchConfig {
        max_generations: DESK_GENERATIONS,
        ..SearchConfig::default()
    }
}

/// One desk-scale experiment per built-in vessel, on its default route.
pub fn builtin_case_studies() -> Vec<ExperimentConfig> {
    let reg = vessels::builtin();
    reg.vessels
        .iter()
        .map(|v| {
            let (route, delta) = reg.route(&v.name).expect("every preset vessel has a route");
            ExperimentConfig {
                vessel: v.clone(),
                waypoints: route.to_rows(),
                delta,
                search: desk_scale_search(),
                approaches: Approach::ALL.to_vec(),
                repetitions: DESK_REPETITIONS,
                seed: 0,
                out: PathBuf::from("out").join(&v.name),
            }
        })
        .collect()
}

/// Executes one search run in memory.
pub fn execute_run(
    cfg: &ExperimentConfig,
    approach: Approach,
    repetition: usize,
) -> Result<RunRecord> {
    let ctx = cfg.context()?;
    let search = cfg.run_search_config(approach, repetition);
    match approach {
        Approach::Rs => random_search_run(&ctx, &search),
        _ => nsga2_run(&ctx, &search),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentOutcome {
    /// Run directories written by this call.
    pub completed: Vec<PathBuf>,
    /// Runs already present on disk.
    pub skipped: Vec<PathBuf>,
}

pub fn run_dir(out: &Path, approach: Approach, repetition: usize) -> PathBuf {
    out.join(approach.id()).join(format!("rep_{repetition:03}"))
}

fn check_writable(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let probe = out.join(format!(".write-probe-{}", std::process::id()));
    std::fs::write(&probe, b"")?;
    std::fs::remove_file(&probe)?;
    Ok(())
}

/// Runs every (approach, repetition) pair not yet persisted under `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    check_writable(&cfg.out)?;
    std::fs::write(
        cfg.out.join("experiment.json"),
        serde_json::to_string_pretty(cfg)? + "\n",
    )?;
    let jobs: Vec<(Approach, usize)> = cfg
        .approaches
        .iter()
        .flat_map(|&a| (0..cfg.repetitions).map(move |r| (a, r)))
        .collect();
    let results: Vec<Result<(PathBuf, bool)>> = jobs
        .par_iter()
        .map(|&(approach, rep)| {
            let dir = run_dir(&cfg.out, approach, rep);
            if dir.join("meta.json").is_file() {
                return Ok((dir, false));
            }
            let started = Instant::now();
            let record = execute_run(cfg, approach, rep)?;
            let secs = started.elapsed().as_secs_f64();
            write_run(cfg, approach, rep, &record, secs)?;
            Ok((dir, true))
        })
        .collect();
    let mut outcome = ExperimentOutcome::default();
    for r in results {
        let (dir, fresh) = r?;
        if fresh {
            outcome.completed.push(dir);
        } else {
            outcome.skipped.push(dir);
        }
    }
    Ok(outcome)
}
