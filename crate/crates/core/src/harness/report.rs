//! Tables and plot data computed from stored runs.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{Approach, StoredRun};
use crate::classify::{categorize_path, max_categories, summarize, PathCategory, SubPathClass};
use crate::error::{Error, Result};
use crate::stats::{compare, hypervolumes, ApproachFronts, Comparison};

/// Path categories of every front solution of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunClassification {
    pub run_id: String,
    pub vessel: String,
    pub approach: Approach,
    pub repetition: usize,
    pub waypoints: usize,
    pub categories: Vec<PathCategory>,
}

impl RunClassification {
    /// Distinct categories among this run's solutions over the theoretical maximum, in percent.
    pub fn unique_percentage(&self) -> Result<f64> {
        let distinct: BTreeSet<String> = self.categories.iter().map(|c| c.to_string()).collect();
        Ok(100.0 * distinct.len() as f64 / max_categories(self.waypoints)? as f64)
    }
}

/// Classifies the stored trace of every front solution.
pub fn classify_runs(runs: &[StoredRun]) -> Result<Vec<RunClassification>> {
    runs.iter()
        .map(|run| {
            let categories = (0..run.front.len())
                .map(|k| run.load_trace(k).map(|t| categorize_path(&t)))
                .collect::<Result<Vec<_>>>()?;
            Ok(RunClassification {
                run_id: run.run_id(),
                vessel: run.meta.vessel.name.clone(),
                approach: run.meta.approach,
                repetition: run.meta.repetition,
                waypoints: run.meta.original.len(),
                categories,
            })
        })
        .collect()
}

/// A header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn vessels_and_approaches(classes: &[RunClassification]) -> (Vec<String>, Vec<Approach>) {
    let vessels: BTreeSet<String> = classes.iter().map(|c| c.vessel.clone()).collect();
    let approaches: BTreeSet<Approach> = classes.iter().map(|c| c.approach).collect();
    (
        vessels.into_iter().collect(),
        approaches.into_iter().collect(),
    )
}

/// Sub-path class percentages: rows approach x class, columns vessels.
pub fn class_table(classes: &[RunClassification]) -> Result<Table> {
    let (vessels, approaches) = vessels_and_approaches(classes);
    let mut header = vec!["approach".to_string(), "class".to_string()];
    header.extend(vessels.iter().cloned());
    let mut rows = Vec::new();
    for &a in &approaches {
        let mut per_vessel = Vec::new();
        for v in &vessels {
            let group: Vec<&RunClassification> = classes
                .iter()
                .filter(|c| c.approach == a && &c.vessel == v)
                .collect();
            let cats: Vec<PathCategory> = group.iter().flat_map(|c| c.categories.clone()).collect();
            per_vessel.push(match group.first() {
                Some(first) if !cats.is_empty() => Some(summarize(&cats, first.waypoints)?),
                _ => None,
            });
        }
        for class in SubPathClass::ALL {
            let mut row = vec![a.id().to_string(), class.as_str().to_string()];
            row.extend(per_vessel.iter().map(|s| match s {
                Some(s) => format!("{:.4}", s.percentage(class)),
                None => String::new(),
            }));
            rows.push(row);
        }
    }
    Ok(Table { header, rows })
}

/// Mean per-run unique-path percentage: rows approach, columns vessels.
pub fn unique_path_table(classes: &[RunClassification]) -> Result<Table> {
    let (vessels, approaches) = vessels_and_approaches(classes);
    let mut header = vec!["approach".to_string()];
    header.extend(vessels.iter().cloned());
    let mut rows = Vec::new();
    for &a in &approaches {
        let mut row = vec![a.id().to_string()];
        for v in &vessels {
            let values = classes
                .iter()
                .filter(|c| c.approach == a && &c.vessel == v)
                .map(|c| c.unique_percentage())
                .collect::<Result<Vec<f64>>>()?;
            row.push(if values.is_empty() {
                String::new()
            } else {
                format!("{:.4}", values.iter().sum::<f64>() / values.len() as f64)
            });
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VesselComparison {
    pub vessel: String,
    pub comparison: Comparison,
}

/// Groups runs per vessel and compares every pair of approaches on hypervolume.
/// Vessels with fewer than two approaches are skipped.
pub fn compare_runs(runs: &[StoredRun], alpha: f64) -> Result<Vec<VesselComparison>> {
    let mut out = Vec::new();
    for (vessel, groups) in group_by_vessel(runs) {
        if groups.len() < 2 {
            continue;
        }
        out.push(VesselComparison {
            vessel: vessel.to_string(),
            comparison: compare(&approach_fronts(&groups), alpha)?,
        });
    }
    if out.is_empty() {
        return Err(Error::InsufficientData(
            "no vessel has runs of at least two approaches".into(),
        ));
    }
    Ok(out)
}

/// `comparison.csv` rows.
pub fn comparison_table(comparisons: &[VesselComparison]) -> Table {
    let header = [
        "vessel",
        "approach_a",
        "approach_b",
        "p_value",
        "a12",
        "verdict",
        "strength",
    ]
    .map(String::from)
    .to_vec();
    let rows = comparisons
        .iter()
        .flat_map(|vc| {
            vc.comparison.results.iter().map(|r| {
                vec![
                    vc.vessel.clone(),
                    r.approach_a.clone(),
                    r.approach_b.clone(),
                    r.p_value.to_string(),
                    r.a12.to_string(),
                    r.verdict.to_string(),
                    r.strength.to_string(),
                ]
            })
        })
        .collect();
    Table { header, rows }
}

fn group_by_vessel(runs: &[StoredRun]) -> BTreeMap<&str, BTreeMap<Approach, Vec<&StoredRun>>> {
    let mut by_vessel: BTreeMap<&str, BTreeMap<Approach, Vec<&StoredRun>>> = BTreeMap::new();
    for r in runs {
        by_vessel
            .entry(&r.meta.vessel.name)
            .or_default()
            .entry(r.meta.approach)
            .or_default()
            .push(r);
    }
    by_vessel
}

fn approach_fronts(groups: &BTreeMap<Approach, Vec<&StoredRun>>) -> Vec<ApproachFronts> {
    groups
        .iter()
        .map(|(a, rs)| {
            (
                a.id().to_string(),
                rs.iter().map(|r| r.front.objectives()).collect(),
            )
        })
        .collect()
}

/// One HV table per (vessel, approach): `repetition,hv,empty_front`, one row
/// per run. Normalization is shared by all runs of a vessel.
pub fn hypervolume_tables(runs: &[StoredRun]) -> Result<Vec<(String, Approach, Table)>> {
    let mut out = Vec::new();
    for (vessel, groups) in group_by_vessel(runs) {
        let (_, hvs) = hypervolumes(&approach_fronts(&groups))?;
        for ((approach, rs), hv) in groups.iter().zip(&hvs) {
            let rows = rs
                .iter()
                .zip(&hv.values)
                .enumerate()
                .map(|(i, (r, v))| {
                    vec![
                        r.meta.repetition.to_string(),
                        v.to_string(),
                        hv.empty_runs.contains(&i).to_string(),
                    ]
                })
                .collect();
            out.push((
                vessel.to_string(),
                *approach,
                Table {
                    header: ["repetition", "hv", "empty_front"]
                        .map(String::from)
                        .to_vec(),
                    rows,
                },
            ));
        }
    }
    Ok(out)
}

/// `run,solution,leg,class` rows.
pub fn classification_table(classes: &[RunClassification]) -> Table {
    let mut rows = Vec::new();
    for c in classes {
        for (k, cat) in c.categories.iter().enumerate() {
            for (leg, class) in cat.0.iter().enumerate() {
                rows.push(vec![
                    c.run_id.clone(),
                    k.to_string(),
                    (leg + 1).to_string(),
                    class.as_str().to_string(),
                ]);
            }
        }
    }
    Table {
        header: ["run", "solution", "leg", "class"]
            .map(String::from)
            .to_vec(),
        rows,
    }
}

#[derive(Debug, Serialize)]
struct GroupSummary {
    vessel: String,
    approach: Approach,
    runs: usize,
    solutions: usize,
    percentages: BTreeMap<SubPathClass, f64>,
    mean_unique_percentage: f64,
    max_categories: usize,
}

#[derive(Debug, Serialize)]
struct RunSummary {
    run: String,
    solutions: usize,
    unique_categories: usize,
    unique_percentage: f64,
}

#[derive(Debug, Serialize)]
struct ClassificationSummary {
    groups: Vec<GroupSummary>,
    runs: Vec<RunSummary>,
}

/// Summary JSON for the classify output: per (vessel, approach) and per run.
pub fn classification_summary(classes: &[RunClassification]) -> Result<serde_json::Value> {
    let (vessels, approaches) = vessels_and_approaches(classes);
    let mut groups = Vec::new();
    for v in &vessels {
        for &a in &approaches {
            let group: Vec<&RunClassification> = classes
                .iter()
                .filter(|c| c.approach == a && &c.vessel == v)
                .collect();
            let Some(first) = group.first() else { continue };
            let cats: Vec<PathCategory> = group.iter().flat_map(|c| c.categories.clone()).collect();
            let uniques = group
                .iter()
                .map(|c| c.unique_percentage())
                .collect::<Result<Vec<f64>>>()?;
            let percentages = if cats.is_empty() {
                BTreeMap::new()
            } else {
                summarize(&cats, first.waypoints)?.percentages
            };
            groups.push(GroupSummary {
                vessel: v.clone(),
                approach: a,
                runs: group.len(),
                solutions: cats.len(),
                percentages,
                mean_unique_percentage: uniques.iter().sum::<f64>() / uniques.len() as f64,
                max_categories: max_categories(first.waypoints)?,
            });
        }
    }
    let runs = classes
        .iter()
        .map(|c| {
            let distinct: BTreeSet<String> = c.categories.iter().map(|k| k.to_string()).collect();
            Ok(RunSummary {
                run: c.run_id.clone(),
                solutions: c.categories.len(),
                unique_categories: distinct.len(),
                unique_percentage: c.unique_percentage()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(serde_json::to_value(ClassificationSummary {
        groups,
        runs,
    })?)
}

/// Files written by [`write_report`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportFiles {
    pub comparison: Option<PathBuf>,
    pub hypervolumes: Vec<PathBuf>,
    pub classification: PathBuf,
    pub classification_summary: PathBuf,
    pub class_table: PathBuf,
    pub unique_path_table: PathBuf,
}

pub fn write_comparison(comparisons: &[VesselComparison], path: &Path) -> Result<()> {
    comparison_table(comparisons).write_csv(path)
}

pub fn write_hypervolumes(runs: &[StoredRun], out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut paths = Vec::new();
    for (vessel, approach, table) in hypervolume_tables(runs)? {
        let path = out_dir.join(format!("hv_{vessel}_{approach}.csv"));
        table.write_csv(&path)?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn write_classification(
    classes: &[RunClassification],
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join("classification.csv");
    classification_table(classes).write_csv(&csv_path)?;
    let json_path = out_dir.join("classification_summary.json");
    fs::write(
        &json_path,
        serde_json::to_string_pretty(&classification_summary(classes)?)? + "\n",
    )?;
    Ok((csv_path, json_path))
}

/// Writes every table and plot-data file into `out_dir`.
pub fn write_report(runs: &[StoredRun], out_dir: &Path, alpha: f64) -> Result<ReportFiles> {
    fs::create_dir_all(out_dir)?;
    let mut files = ReportFiles::default();
    match compare_runs(runs, alpha) {
        Ok(comparisons) => {
            let path = out_dir.join("comparison.csv");
            write_comparison(&comparisons, &path)?;
            files.comparison = Some(path);
        }
        Err(Error::InsufficientData(_)) => {}
        Err(e) => return Err(e),
    }
    files.hypervolumes = write_hypervolumes(runs, out_dir)?;
    let classes = classify_runs(runs)?;
    let (csv_path, json_path) = write_classification(&classes, out_dir)?;
    files.classification = csv_path;
    files.classification_summary = json_path;
    files.class_table = out_dir.join("subpath_classes.csv");
    class_table(&classes)?.write_csv(&files.class_table)?;
    files.unique_path_table = out_dir.join("unique_paths.csv");
    unique_path_table(&classes)?.write_csv(&files.unique_path_table)?;
    Ok(files)
}
