use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fairmiss::harness::{read_results, ExperimentConfig, Sweep, WeightMethod};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fairmiss"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn fairmiss(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn fairmiss")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// A small weight-comparison run written to `dir/config.json`.
fn tiny_config(dir: &Path) -> PathBuf {
    let mut cfg = ExperimentConfig::load(configs().join("weight_comparison.json")).unwrap();
    cfg.synthetic.as_mut().unwrap().n_per_group = [120, 120];
    cfg.forest.n_trees = 5;
    cfg.propensity_forest.n_trees = 5;
    cfg.weight_methods = vec![WeightMethod::Unweighted, WeightMethod::TrueWeights];
    cfg.repeats = 3;
    cfg.mc_samples = 1000;
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

#[test]
fn shipped_configs_validate() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let out = fairmiss(&["validate", path.to_str().unwrap()]);
        assert_eq!(
            code(&out),
            0,
            "{}: {}",
            path.display(),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn invalid_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            "bad_version.json",
            r#"{"version": 99, "experiment": "upper_coverage"}"#.to_string(),
        ),
        ("not_json.json", "{ nope".to_string()),
        ("zero_repeats.json", {
            let mut v: serde_json::Value = serde_json::from_str(
                &std::fs::read_to_string(configs().join("lower_assessment.json")).unwrap(),
            )
            .unwrap();
            v["repeats"] = 0.into();
            v.to_string()
        }),
    ];
    for (name, text) in cases {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        let out = fairmiss(&["validate", path.to_str().unwrap()]);
        assert_eq!(code(&out), 2, "{name}");
        assert_eq!(
            code(&fairmiss(&["run", path.to_str().unwrap()])),
            2,
            "{name}"
        );
    }
    assert_eq!(
        code(&fairmiss(&["validate", "/nonexistent/config.json"])),
        2
    );
}

#[test]
fn run_writes_outputs_and_summarize_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let out_dir = dir.path().join("out");
    let out = fairmiss(&[
        "run",
        config.to_str().unwrap(),
        "--workers",
        "2",
        "--seed",
        "7",
        "--output",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["results.csv", "summary.json", "manifest.json"] {
        assert!(out_dir.join(name).is_file(), "{name} missing");
    }
    let rows = read_results(std::fs::File::open(out_dir.join("results.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 3 * 2);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["workers"], 2);

    let summarized = fairmiss(&["summarize", out_dir.join("results.csv").to_str().unwrap()]);
    assert_eq!(code(&summarized), 0);
    let from_cli: serde_json::Value = serde_json::from_slice(&summarized.stdout).unwrap();
    let from_run: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(from_cli, from_run);
}

#[test]
fn same_seed_reproduces_results_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let read = |workers: &str| {
        let out_dir = dir.path().join(format!("w{workers}"));
        let out = fairmiss(&[
            "run",
            config.to_str().unwrap(),
            "--workers",
            workers,
            "--output",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        let text = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
        text.lines()
            .map(|l| l.rsplit_once(',').expect("wall_ms column").0.to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(read("1"), read("3"));
}

#[test]
fn bounds_subcommand_reports_both_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inputs.json");
    std::fs::write(
        &path,
        r#"{"n": [1000, 1000], "D": [1.0, 1.0], "B": 1.0, "d": 11, "delta": 0.05,
            "task": "regression", "tv": [0.0, 0.0], "sigma2": [0.04, 0.05], "delta_hat": 0.5}"#,
    )
    .unwrap();
    let out = fairmiss(&["bounds", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["upper"]["value"].as_f64().unwrap() > 0.0);
    assert_eq!(report["lower"]["regime"], "large_delta_hat");

    std::fs::write(&path, r#"{"n": [0, 10], "D": [1.0, 1.0], "B": 1.0, "d": 3, "delta": 0.05, "task": "classification"}"#)
        .unwrap();
    assert_eq!(code(&fairmiss(&["bounds", path.to_str().unwrap()])), 2);
}

#[test]
fn missing_real_data_csv_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::load(configs().join("compas_like_mar.json")).unwrap();
    cfg.real_data.as_mut().unwrap().csv = dir.path().join("absent.csv");
    cfg.repeats = 1;
    let path = dir.path().join("config.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(code(&fairmiss(&["validate", path.to_str().unwrap()])), 0);
    let out = fairmiss(&[
        "run",
        path.to_str().unwrap(),
        "--output",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn summarize_rejects_schema_drift() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    std::fs::write(&path, "experiment,point\nx,0\n").unwrap();
    let out = fairmiss(&["summarize", path.to_str().unwrap()]);
    assert_ne!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));
}

#[test]
fn sweep_configs_expand_to_points() {
    let cfg = ExperimentConfig::load(configs().join("imbalance_sweep.json")).unwrap();
    match cfg.sweep.as_ref().unwrap() {
        Sweep::Ratio { values, .. } => assert_eq!(cfg.points().len(), values.len()),
        other => panic!("unexpected sweep {other:?}"),
    }
}
