//! On-disk run records.
//!
//! Layout: `<out>/<approach>/rep_XXX/{front.csv, evals.jsonl, meta.json,
//! traces/solution_<k>.csv}`. A run directory is assembled under a temporary
//! name and renamed into place, so a present `meta.json` marks a complete run.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{run_dir, Approach, ExperimentConfig};
use crate::domain::{decode, Individual, VesselConfig, WaypointSet};
use crate::error::{Error, Result};
use crate::fitness::{fit_dist_wps, fit_unstable, EvalRecord, ObjectiveVector};
use crate::search::{FrontMember, ParetoFront, RunRecord, SearchConfig};
use crate::simulator::SimulationResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub approach: Approach,
    pub repetition: usize,
    pub seed: u64,
    pub vessel: VesselConfig,
    pub original: Vec<Vec<f64>>,
    pub delta: f64,
    pub search: SearchConfig,
    pub evaluations: usize,
    pub feasible_evaluations: usize,
    pub front_size: usize,
    pub wall_clock_seconds: f64,
}

/// A run loaded back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredRun {
    pub dir: PathBuf,
    pub meta: RunMeta,
    pub front: ParetoFront,
}

impl StoredRun {
    /// `<vessel>/<approach>/rep_XXX`.
    pub fn run_id(&self) -> String {
        format!(
            "{}/{}/rep_{:03}",
            self.meta.vessel.name, self.meta.approach, self.meta.repetition
        )
    }

    pub fn original(&self) -> Result<WaypointSet> {
        WaypointSet::from_rows(&self.meta.original)
    }

    pub fn trace_path(&self, solution: usize) -> PathBuf {
        trace_path(&self.dir, solution)
    }

    pub fn load_trace(&self, solution: usize) -> Result<SimulationResult> {
        let path = self.trace_path(solution);
        SimulationResult::read_trace_csv(File::open(&path)?).map_err(|e| with_path(e, &path))
    }

    /// Recomputes the objectives of front member `solution` from its stored trace.
    pub fn recompute_objectives(&self, solution: usize) -> Result<ObjectiveVector> {
        let original = self.original()?;
        let member = self.front.members().get(solution).ok_or_else(|| {
            Error::InvalidParameter(format!("{} has no front member {solution}", self.run_id()))
        })?;
        let ws = decode(&member.individual, &original)?;
        let trace = self.load_trace(solution)?;
        ObjectiveVector::new(
            fit_dist_wps(&ws, &original)?,
            fit_unstable(&trace, &original)?,
        )
    }

    pub fn read_evals(&self) -> Result<Vec<EvalRecord>> {
        let path = self.dir.join("evals.jsonl");
        let reader = BufReader::new(File::open(&path)?);
        let mut out = Vec::new();
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(serde_json::from_str(&line).map_err(|e| Error::Format {
                path: path.clone(),
                message: e.to_string(),
            })?);
        }
        Ok(out)
    }
}

fn trace_path(dir: &Path, solution: usize) -> PathBuf {
    dir.join("traces").join(format!("solution_{solution}.csv"))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Format { message, .. } => Error::Format {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    }
}

fn coordinate_names(dim: usize) -> &'static [&'static str] {
    if dim == 3 {
        &["x", "y", "z"]
    } else {
        &["x", "y"]
    }
}

fn write_front_csv(path: &Path, front: &ParetoFront, original: &WaypointSet) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["solution".to_string()];
    for i in 2..=original.len() {
        for c in coordinate_names(original.dim()) {
            header.push(format!("wp{i}_{c}"));
        }
    }
    header.push("dist_wps".into());
    header.push("unstable".into());
    w.write_record(&header)?;
    for (k, m) in front.members().iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(m.individual.values().iter().map(|v| v.to_string()));
        row.push(m.objectives.dist_wps.to_string());
        row.push(m.objectives.unstable.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn read_front_csv(path: &Path) -> Result<ParetoFront> {
    let bad = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut r = csv::Reader::from_path(path)?;
    let width = r.headers()?.len();
    if width < 4 {
        return Err(bad(format!("front has only {width} columns")));
    }
    let mut members = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let nums = rec
            .iter()
            .skip(1)
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| bad(format!("bad number {s:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let (coords, obj) = nums.split_at(nums.len() - 2);
        members.push(FrontMember {
            individual: Individual::new(coords.to_vec()),
            objectives: ObjectiveVector::new(obj[0], obj[1])?,
        });
    }
    Ok(ParetoFront::from_members(members))
}

/// Persists one finished run atomically, simulating every front member for its trace.
pub fn write_run(
    cfg: &ExperimentConfig,
    approach: Approach,
    repetition: usize,
    record: &RunRecord,
    wall_clock_seconds: f64,
) -> Result<PathBuf> {
    let ctx = cfg.context()?;
    let dest = run_dir(&cfg.out, approach, repetition);
    let parent = dest.parent().expect("run dir has a parent");
    fs::create_dir_all(parent)?;
    let tmp = parent.join(format!(".rep_{repetition:03}.tmp-{}", std::process::id()));
    if tmp.exists() {
        fs::remove_dir_all(&tmp)?;
    }
    fs::create_dir_all(tmp.join("traces"))?;

    write_front_csv(&tmp.join("front.csv"), &record.front, &ctx.original)?;

    let mut evals = BufWriter::new(File::create(tmp.join("evals.jsonl"))?);
    for e in &record.evals {
        serde_json::to_writer(&mut evals, e)?;
        evals.write_all(b"\n")?;
    }
    evals.flush()?;

    for (k, m) in record.front.members().iter().enumerate() {
        let ws = decode(&m.individual, &ctx.original)?;
        let sim = ctx.simulate(&ws)?;
        let file = BufWriter::new(File::create(trace_path(&tmp, k))?);
        sim.write_trace_csv(file)?;
    }

    let search = cfg.run_search_config(approach, repetition);
    let meta = RunMeta {
        approach,
        repetition,
        seed: search.rng_seed,
        vessel: cfg.vessel.clone(),
        original: cfg.waypoints.clone(),
        delta: cfg.delta,
        search,
        evaluations: record.evaluations(),
        feasible_evaluations: record.evals.iter().filter(|e| e.feasible).count(),
        front_size: record.front.len(),
        wall_clock_seconds,
    };
    fs::write(
        tmp.join("meta.json"),
        serde_json::to_string_pretty(&meta)? + "\n",
    )?;

    if dest.exists() {
        fs::remove_dir_all(&dest)?;
    }
    fs::rename(&tmp, &dest)?;
    Ok(dest)
}

fn load_one(dir: &Path) -> Result<StoredRun> {
    let meta_path = dir.join("meta.json");
    let meta: RunMeta =
        serde_json::from_str(&fs::read_to_string(&meta_path)?).map_err(|e| Error::Format {
            path: meta_path,
            message: e.to_string(),
        })?;
    let front = read_front_csv(&dir.join("front.csv"))?;
    Ok(StoredRun {
        dir: dir.to_path_buf(),
        meta,
        front,
    })
}

fn collect_run_dirs(dir: &Path, depth: usize, out: &mut Vec<PathBuf>) -> Result<()> {
    if dir.join("meta.json").is_file() {
        out.push(dir.to_path_buf());
        return Ok(());
    }
    if depth == 0 {
        return Ok(());
    }
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_dir()
                && !p
                    .file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with('.'))
        })
        .collect();
    entries.sort();
    for e in entries {
        collect_run_dirs(&e, depth - 1, out)?;
    }
    Ok(())
}

/// Loads every complete run found under `dirs` (a run directory, an
/// experiment output directory, or a parent of several experiments).
/// Runs are ordered by vessel, approach and repetition.
pub fn load_runs(dirs: &[PathBuf]) -> Result<Vec<StoredRun>> {
    let mut found = Vec::new();
    for d in dirs {
        if !d.is_dir() {
            return Err(Error::InvalidParameter(format!(
                "{} is not a directory",
                d.display()
            )));
        }
        collect_run_dirs(d, 3, &mut found)?;
    }
    found.sort();
    found.dedup();
    let mut runs = found
        .iter()
        .map(|d| load_one(d))
        .collect::<Result<Vec<_>>>()?;
    runs.sort_by(|a, b| {
        (&a.meta.vessel.name, a.meta.approach, a.meta.repetition).cmp(&(
            &b.meta.vessel.name,
            b.meta.approach,
            b.meta.repetition,
        ))
    });
    Ok(runs)
}
