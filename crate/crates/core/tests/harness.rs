use std::fs;
use std::path::Path;

use wpgen::domain::{decode, make_bounds, validate_waypoint_set};
use wpgen::harness::{
    class_table, classify_runs, execute_run, load_runs, run_experiment, unique_path_table,
    write_report, Approach, ExperimentConfig,
};

fn small_config(out: &Path) -> ExperimentConfig {
    let text = serde_json::json!({
        "vessel": "mariner",
        "approaches": ["WPgen_comb", "RS"],
        "repetitions": 2,
        "seed": 9,
        "search": {"population_size": 6, "max_generations": 5},
        "out": out,
    });
    ExperimentConfig::from_json(&text.to_string()).unwrap()
}

#[test]
fn experiment_persists_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let first = run_experiment(&cfg).unwrap();
    assert_eq!(first.completed.len(), 4);
    assert!(first.skipped.is_empty());
    assert!(dir.path().join("experiment.json").is_file());

    let before = fs::read(first.completed[0].join("front.csv")).unwrap();
    let again = run_experiment(&cfg).unwrap();
    assert!(again.completed.is_empty());
    assert_eq!(again.skipped.len(), 4);
    assert_eq!(
        fs::read(first.completed[0].join("front.csv")).unwrap(),
        before
    );

    // a removed run is recomputed identically
    fs::remove_dir_all(&first.completed[0]).unwrap();
    let partial = run_experiment(&cfg).unwrap();
    assert_eq!(partial.completed, vec![first.completed[0].clone()]);
    assert_eq!(
        fs::read(first.completed[0].join("front.csv")).unwrap(),
        before
    );
}

#[test]
fn stored_runs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    run_experiment(&cfg).unwrap();
    let runs = load_runs(&[dir.path().to_path_buf()]).unwrap();
    assert_eq!(runs.len(), 4);
    let ids: Vec<String> = runs.iter().map(|r| r.run_id()).collect();
    assert_eq!(
        ids,
        [
            "mariner/WPgen_comb/rep_000",
            "mariner/WPgen_comb/rep_001",
            "mariner/RS/rep_000",
            "mariner/RS/rep_001",
        ]
    );
    for run in &runs {
        assert_eq!(run.meta.evaluations, 30);
        assert_eq!(run.read_evals().unwrap().len(), 30);
        assert_eq!(run.meta.front_size, run.front.len());
        assert!(!run.front.is_empty());

        // the stored front equals a fresh in-memory run
        let record = execute_run(&cfg, run.meta.approach, run.meta.repetition).unwrap();
        assert_eq!(record.front.objectives(), run.front.objectives());

        let original = run.original().unwrap();
        let bounds = make_bounds(&original, run.meta.delta).unwrap();
        for (k, m) in run.front.members().iter().enumerate() {
            assert!(bounds.contains(&m.individual));
            let ws = decode(&m.individual, &original).unwrap();
            assert!(validate_waypoint_set(&ws, run.meta.vessel.min_wp_dist));
            let again = run.recompute_objectives(k).unwrap();
            assert!((again.dist_wps - m.objectives.dist_wps).abs() <= 1e-9);
            assert!((again.unstable - m.objectives.unstable).abs() <= 1e-9);
        }
    }
}

#[test]
fn report_layouts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    run_experiment(&cfg).unwrap();
    let runs = load_runs(&[dir.path().to_path_buf()]).unwrap();
    let report_dir = dir.path().join("report");
    let files = write_report(&runs, &report_dir, 0.05).unwrap();

    let comparison = fs::read_to_string(files.comparison.unwrap()).unwrap();
    let mut lines = comparison.lines();
    assert_eq!(
        lines.next(),
        Some("vessel,approach_a,approach_b,p_value,a12,verdict,strength")
    );
    assert!(lines.next().unwrap().starts_with("mariner,WPgen_comb,RS,"));

    assert_eq!(files.hypervolumes.len(), 2);
    for p in &files.hypervolumes {
        let text = fs::read_to_string(p).unwrap();
        assert_eq!(text.lines().count(), 1 + cfg.repetitions);
    }

    let classes = classify_runs(&runs).unwrap();
    let classes_t = class_table(&classes).unwrap();
    assert_eq!(classes_t.header, ["approach", "class", "mariner"]);
    assert_eq!(classes_t.rows.len(), 2 * 3);
    for block in classes_t.rows.chunks(3) {
        let sum: f64 = block.iter().map(|r| r[2].parse::<f64>().unwrap()).sum();
        assert!((sum - 100.0).abs() <= 0.01, "{sum}");
    }
    let unique_t = unique_path_table(&classes).unwrap();
    assert_eq!(unique_t.rows.len(), 2);

    let csv = fs::read_to_string(&files.classification).unwrap();
    let legs = cfg.waypoints.len() - 1;
    let solutions: usize = runs.iter().map(|r| r.front.len()).sum();
    assert_eq!(csv.lines().count(), 1 + solutions * legs);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&files.classification_summary).unwrap()).unwrap();
    assert_eq!(summary["runs"].as_array().unwrap().len(), 4);
}

#[test]
fn single_approach_report_skips_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.approaches = vec![Approach::Rs];
    run_experiment(&cfg).unwrap();
    let runs = load_runs(&[dir.path().to_path_buf()]).unwrap();
    let files = write_report(&runs, dir.path(), 0.05).unwrap();
    assert!(files.comparison.is_none());
    assert_eq!(files.hypervolumes.len(), 1);
}

#[test]
fn unwritable_output_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"").unwrap();
    let cfg = small_config(&blocker.join("out"));
    assert!(run_experiment(&cfg).is_err());
    assert!(load_runs(&[dir.path().to_path_buf()]).unwrap().is_empty());
}

#[test]
fn unknown_directory_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(load_runs(&[dir.path().join("missing")]).is_err());
}
