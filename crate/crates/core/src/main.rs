use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use wpgen::harness::{
    self, classify_runs, compare_runs, load_runs, write_classification, write_comparison,
    write_hypervolumes, write_report, Approach, ExperimentConfig, StoredRun,
};
use wpgen::vessels;

#[derive(Parser)]
#[command(
    name = "wpgen",
    version,
    about = "Search-based waypoint generation for vessel autopilot testing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment (every approach x repetition not yet on disk).
    Run(RunArgs),
    /// Compare approaches on hypervolume (Mann-Whitney U + A12) and write comparison.csv.
    Compare(RunsArgs),
    /// Classify the stored trace of every front solution.
    Classify(RunsArgs),
    /// Write per-run normalized hypervolumes, one CSV per vessel and approach.
    Hv(RunsArgs),
    /// Write every table and plot-data file.
    Report(RunsArgs),
    /// Print the built-in experiment configs as JSON.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Use a built-in case study instead of a config file.
    #[arg(long)]
    preset: Option<String>,
    /// Restrict to these approaches (repeatable).
    #[arg(long = "approach")]
    approaches: Vec<Approach>,
    /// Number of repetitions.
    #[arg(long)]
    reps: Option<usize>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunsArgs {
    /// Run directories, experiment directories or parents of several experiments.
    #[arg(long, required = true, num_args = 1..)]
    runs: Vec<PathBuf>,
    /// Where to write outputs (defaults to the first --runs directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

impl RunsArgs {
    fn load(&self) -> Result<(Vec<StoredRun>, PathBuf)> {
        let runs = load_runs(&self.runs)?;
        if runs.is_empty() {
            bail!("no completed runs found under {:?}", self.runs);
        }
        let out = self.out.clone().unwrap_or_else(|| self.runs[0].clone());
        Ok((runs, out))
    }
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::from_path(path)
            .with_context(|| format!("loading {}", path.display()))?,
        (None, Some(name)) => harness::builtin_case_studies()
            .into_iter()
            .find(|c| c.vessel.name == *name)
            .with_context(|| {
                format!(
                    "unknown preset {name:?}; available: {}",
                    vessels::builtin()
                        .vessels
                        .iter()
                        .map(|v| v.name.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            })?,
        (None, None) => unreachable!("clap requires --config or --preset"),
    };
    if !args.approaches.is_empty() {
        cfg.approaches = args.approaches.clone();
    }
    if let Some(r) = args.reps {
        cfg.repetitions = r;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &RunArgs) -> Result<()> {
    let cfg = load_config(args)?;
    eprintln!(
        "{}: {} approaches x {} reps, {} evaluations each -> {}",
        cfg.vessel.name,
        cfg.approaches.len(),
        cfg.repetitions,
        cfg.search.budget(),
        cfg.out.display()
    );
    let outcome = harness::run_experiment(&cfg)?;
    println!(
        "completed {} runs, skipped {} already on disk",
        outcome.completed.len(),
        outcome.skipped.len()
    );
    Ok(())
}

fn print_file(label: &str, path: &Path) {
    println!("{label}: {}", path.display());
}

fn compare(args: &RunsArgs) -> Result<()> {
    let (runs, out) = args.load()?;
    let comparisons = compare_runs(&runs, args.alpha)?;
    std::fs::create_dir_all(&out)?;
    let path = out.join("comparison.csv");
    write_comparison(&comparisons, &path)?;
    for vc in &comparisons {
        for r in &vc.comparison.results {
            println!(
                "{:<10} {:<10} vs {:<10} p={:.4} A12={:.3} {} {}",
                vc.vessel, r.approach_a, r.approach_b, r.p_value, r.a12, r.verdict, r.strength
            );
        }
    }
    print_file("comparison", &path);
    Ok(())
}

fn classify(args: &RunsArgs) -> Result<()> {
    let (runs, out) = args.load()?;
    let classes = classify_runs(&runs)?;
    let (csv_path, json_path) = write_classification(&classes, &out)?;
    for c in &classes {
        println!(
            "{}: {} solutions, {:.2}% unique paths",
            c.run_id,
            c.categories.len(),
            c.unique_percentage()?
        );
    }
    print_file("classification", &csv_path);
    print_file("summary", &json_path);
    Ok(())
}

fn hv(args: &RunsArgs) -> Result<()> {
    let (runs, out) = args.load()?;
    for path in write_hypervolumes(&runs, &out)? {
        print_file("hypervolume", &path);
    }
    Ok(())
}

fn report(args: &RunsArgs) -> Result<()> {
    let (runs, out) = args.load()?;
    let files = write_report(&runs, &out, args.alpha)?;
    match &files.comparison {
        Some(p) => print_file("comparison", p),
        None => eprintln!("comparison skipped: no vessel has runs of two approaches"),
    }
    for p in &files.hypervolumes {
        print_file("hypervolume", p);
    }
    print_file("classification", &files.classification);
    print_file("summary", &files.classification_summary);
    print_file("subpath classes", &files.class_table);
    print_file("unique paths", &files.unique_path_table);
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
        Command::Classify(a) => classify(a),
        Command::Hv(a) => hv(a),
        Command::Report(a) => report(a),
        Command::Presets => {
            let presets = harness::builtin_case_studies();
            println!("{}", serde_json::to_string_pretty(&presets)?);
            Ok(())
        }
    }
}
