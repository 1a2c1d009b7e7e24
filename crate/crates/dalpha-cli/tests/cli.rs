//! End-to-end tests driving the built binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dalpha"))
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("dalpha-cli-tests").join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn bound_prints_sixteen() {
    let out = run(&["bound", "--alpha", "4", "--g", "1", "--sigma-ratio", "1", "--ell", "1", "--k", "16"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "16");
}

#[test]
fn bound_rejects_alpha_two_as_usage_error() {
    let out = run(&["bound", "--alpha", "2", "--g", "1", "--sigma-ratio", "1", "--ell", "1", "--k", "4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_flag_is_usage_error_and_help_succeeds() {
    let out = run(&["bound", "--alpha", "4", "--nonsense", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("sweep"));
}

#[test]
fn missing_data_file_is_io_error() {
    let out = run(&["params", "--data", "/nonexistent/nope.csv", "--alpha", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_params_seed_lloyd_pipeline() {
    let dir = tmpdir("pipeline");
    let data = dir.join("galpha.csv");
    let out = run(&[
        "generate", "--family", "galpha_lb", "--n-per-cluster", "50", "--alpha", "4",
        "--out", data.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");

    let out = run(&["params", "--data", data.to_str().unwrap(), "--alpha", "4"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["k"], 2);
    // Both clusters are built with unit deviation.
    let ratio = report["sigma_ratio"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 1e-9, "sigma ratio {ratio}");
    assert_eq!(report["ell"].as_u64(), Some(1));
    assert!(report["g_alpha"].as_f64().unwrap() > 2.0);

    let trace = dir.join("trace.json");
    let out = run(&[
        "seed", "--data", data.to_str().unwrap(), "--alpha", "4", "--k", "2",
        "--method", "dalpha", "--seed", "7", "--trace", trace.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let seeded: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let centers: Vec<usize> = seeded["centers"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap() as usize)
        .collect();
    assert_eq!(centers.len(), 2);
    assert!(trace.exists());

    let centers_arg = format!("{},{}", centers[0], centers[1]);
    let out = run(&["lloyd", "--data", data.to_str().unwrap(), "--centers", &centers_arg]);
    assert!(out.status.success());
    let refined: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(refined["final_cost2"].as_f64().unwrap() <= seeded["seed_cost2"].as_f64().unwrap() * (1.0 + 1e-9));
}

#[test]
fn verify_passes_on_mixture_instance() {
    let dir = tmpdir("verify");
    let data = dir.join("d1.csv");
    let out = run(&[
        "generate", "--preset", "d1", "--n", "400", "--seed", "3",
        "--out", data.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&[
        "verify", "--data", data.to_str().unwrap(), "--alpha", "4", "--runs", "50",
        "--expectation-samples", "20",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let lemmas = report["lemmas"].as_array().unwrap();
    assert!(lemmas.len() >= 2);
    for l in lemmas {
        assert_eq!(l["violations"].as_u64(), Some(0), "{l}");
    }
}

fn write_sweep_config(path: &Path, svg: bool) -> (PathBuf, Option<PathBuf>) {
    let dir = path.parent().unwrap();
    let cfg = serde_json::json!({
        "instance": {
            "family": "gaussian_mixture",
            "components": [
                {"mean": [-20.0, 0.0], "covariance": {"spherical": 1.0}, "weight": 1.0},
                {"mean": [20.0, 0.0], "covariance": {"spherical": 1.0}, "weight": 1.0}
            ],
            "n": 80,
            "rng_seed": 5
        },
        "alphas": [2.0, 4.0, "inf"],
        "methods": ["dalpha", "greedy", "uniform"],
        "trials": 5,
        "run_lloyd": true,
        "base_seed": 42
    });
    std::fs::write(path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    (dir.join("results.csv"), svg.then(|| dir.join("plot.svg")))
}

#[test]
fn sweep_is_byte_identical_across_invocations() {
    let dir = tmpdir("sweep");
    let cfg_path = dir.join("exp.json");
    let (csv_path, svg_path) = write_sweep_config(&cfg_path, true);
    let svg_path = svg_path.unwrap();

    let mut outputs = Vec::new();
    for _ in 0..2 {
        let out = run(&[
            "sweep", "--config", cfg_path.to_str().unwrap(),
            "--out", csv_path.to_str().unwrap(),
            "--svg", svg_path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push((std::fs::read(&csv_path).unwrap(), std::fs::read(&svg_path).unwrap()));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "CSV differs between runs");
    assert_eq!(outputs[0].1, outputs[1].1, "SVG differs between runs");

    // Different worker counts must not change a single byte.
    let out = bin()
        .args(["sweep", "--config", cfg_path.to_str().unwrap(), "--out", csv_path.to_str().unwrap()])
        .env("RAYON_NUM_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(&csv_path).unwrap(), outputs[0].0);

    let csv = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert!(csv.starts_with("alpha,method,trial,seed_cost2,seed_ratio,lloyd_cost2,lloyd_ratio,lloyd_iters,undiscovered\n"));
    assert!(csv.contains("\ninf,"));
}

#[test]
fn sweep_rejects_unknown_config_fields() {
    let dir = tmpdir("sweep-bad");
    let cfg_path = dir.join("exp.json");
    let cfg = serde_json::json!({
        "instance": {"family": "galpha_lb", "n": 10, "alpha": 4.0},
        "alphas": [4.0],
        "methods": ["dalpha"],
        "trials": 1,
        "base_seed": 0,
        "wat": 1
    });
    std::fs::write(&cfg_path, cfg.to_string()).unwrap();
    let out = run(&[
        "sweep", "--config", cfg_path.to_str().unwrap(),
        "--out", dir.join("r.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generate_to_unwritable_path_is_io_error() {
    let out = run(&[
        "generate", "--family", "galpha_lb", "--n-per-cluster", "10", "--alpha", "4",
        "--out", "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
