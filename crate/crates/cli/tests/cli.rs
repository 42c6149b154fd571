use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn kselect() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kselect"));
    cmd.env_remove("KSELECT_OUTPUT_DIR");
    cmd
}

fn run(args: &[&str]) -> Output {
    kselect().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn gen_blobs(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut args = vec!["gen", "-o", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    stdout(&run(&args));
    path
}

fn estimate(args: &[&str]) -> Value {
    let mut all = vec!["estimate-k"];
    all.extend_from_slice(args);
    serde_json::from_str(&stdout(&run(&all))).unwrap()
}

#[test]
fn help_lists_a_default_for_every_option() {
    for sub in ["estimate-k", "compare", "bench", "gen"] {
        let text = stdout(&run(&[sub, "--help"]));
        for line in text.lines().map(str::trim_start) {
            let is_option = line.starts_with("--") || line.starts_with('-') && line.contains(", --");
            if is_option && !line.contains("--help") && !line.contains("--version") {
                assert!(line.contains("[default:"), "{sub}: {line}");
            }
        }
    }
    assert!(run(&["--version"]).status.success());
}

#[test]
fn gen_writes_rows_and_labels() {
    let text = stdout(&run(&["gen", "--k", "3", "--n-per", "100", "--d", "2", "--seed", "7"]));
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 300);
    assert!(rows.iter().all(|r| r.split(',').count() == 2));

    let labelled = stdout(&run(&["gen", "--k", "3", "--seed", "7", "--with-labels"]));
    for line in labelled.lines() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 3);
        let label: usize = fields[2].parse().unwrap();
        assert!(label < 3);
    }
    // same data with the label column stripped
    let stripped: Vec<String> = labelled
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect();
    assert_eq!(stripped, rows);
}

#[test]
fn gen_is_byte_identical_for_equal_flags() {
    let a = run(&["gen", "--k", "4", "--d", "3", "--seed", "11"]).stdout;
    let b = run(&["gen", "--k", "4", "--d", "3", "--seed", "11"]).stdout;
    let c = run(&["gen", "--k", "4", "--d", "3", "--seed", "12"]).stdout;
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn gen_rejects_bad_spec_as_usage_error() {
    assert_eq!(run(&["gen", "--k", "0"]).status.code(), Some(2));
    assert_eq!(run(&["gen", "--sd", "-1"]).status.code(), Some(2));
}

#[test]
fn estimate_k_on_three_blobs() {
    let dir = TempDir::new().unwrap();
    let path = gen_blobs(dir.path(), "blobs3.csv", &["--k", "3", "--n-per", "100", "--d", "2", "--seed", "7"]);
    let json = estimate(&["--input", path.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(json["k_final"], 3);
    assert_eq!(json["n_rows"], 300);
    assert_eq!(json["n_cols"], 2);
    for key in ["density", "local_structure", "ccr_coi", "gap"] {
        assert!(json["estimates"][key].as_u64().unwrap() >= 1, "{key}");
        assert_eq!(json["weights"][key], 0.25);
    }
}

#[test]
fn single_weight_follows_that_estimator() {
    let dir = TempDir::new().unwrap();
    let path = gen_blobs(dir.path(), "b.csv", &["--k", "2", "--seed", "3"]);
    let p = path.to_str().unwrap();
    for (weights, key) in [("1,0,0,0", "density"), ("0,0,0,2", "gap"), ("0,5,0,0", "local_structure")] {
        let json = estimate(&["--input", p, "--weights", weights]);
        assert_eq!(json["k_final"], json["estimates"][key], "{weights}");
    }
}

#[test]
fn cluster_flag_reports_centroids_in_input_units() {
    let dir = TempDir::new().unwrap();
    let path = gen_blobs(dir.path(), "b.csv", &["--k", "3", "--seed", "7", "--spread", "100"]);
    let json = estimate(&["--input", path.to_str().unwrap(), "--seed", "7", "--cluster", "--diagnostics"]);
    let clustering = &json["clustering"];
    let k = clustering["k"].as_u64().unwrap() as usize;
    assert_eq!(clustering["centroids"].as_array().unwrap().len(), k);
    let sizes: u64 = clustering["cluster_sizes"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(sizes, 300);
    // a box of side 100 cannot be reached by standardized coordinates
    let far = clustering["centroids"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|c| c.as_array().unwrap().clone())
        .any(|v| v.as_f64().unwrap().abs() > 5.0);
    assert!(far);
    assert_eq!(json["diagnostics"].as_array().unwrap().len(), 4);
    assert_eq!(json["standardization"]["means"].as_array().unwrap().len(), 2);
}

#[test]
fn output_flag_mirrors_stdout() {
    let dir = TempDir::new().unwrap();
    let path = gen_blobs(dir.path(), "b.csv", &["--seed", "1"]);
    let report = dir.path().join("out/report.json");
    let out = run(&["estimate-k", "--input", path.to_str().unwrap(), "-o", report.to_str().unwrap()]);
    assert_eq!(stdout(&out), std::fs::read_to_string(&report).unwrap());
}

#[test]
fn missing_input_is_a_runtime_error_naming_the_path() {
    let out = run(&["estimate-k", "--input", "/nonexistent/data.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/data.csv"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["estimate-k", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run(&["estimate-k"]).status.code(), Some(2));
    assert_eq!(run(&["estimate-k", "-i", "x.csv", "--weights", "1,2"]).status.code(), Some(2));
    assert_eq!(run(&["estimate-k", "-i", "x.csv", "--weights", "0,0,0,0"]).status.code(), Some(2));
    assert_eq!(run(&["estimate-k", "-i", "x.csv", "--init", "forgy"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn malformed_csv_is_a_runtime_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "1,2\n3,abc\n5,6\n").unwrap();
    let out = run(&["estimate-k", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn header_and_column_selection() {
    let dir = TempDir::new().unwrap();
    let plain = gen_blobs(dir.path(), "b.csv", &["--k", "3", "--seed", "5", "--with-labels"]);
    let body = std::fs::read_to_string(&plain).unwrap();
    let with_header = dir.path().join("h.csv");
    std::fs::write(&with_header, format!("x;y;label\n{}", body.replace(',', ";"))).unwrap();

    let a = estimate(&["-i", plain.to_str().unwrap(), "--columns", "0,1", "--seed", "5"]);
    let b = estimate(&[
        "-i",
        with_header.to_str().unwrap(),
        "--header",
        "--delimiter",
        ";",
        "--columns",
        "0,1",
        "--seed",
        "5",
    ]);
    assert_eq!(a["n_cols"], 2);
    assert_eq!(a["estimates"], b["estimates"]);
    assert_eq!(a["k_final"], b["k_final"]);
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let data = gen_blobs(dir.path(), "b.csv", &["--k", "3", "--seed", "2"]);
    let config = dir.path().join("cfg.json");
    let body = serde_json::json!({
        "input": data,
        "seed": 2,
        "weights": [1.0, 0.0, 0.0, 0.0],
        "k_max": 8,
        "gap_b": 5,
    });
    std::fs::write(&config, body.to_string()).unwrap();
    let c = config.to_str().unwrap();

    let from_file = estimate(&["--config", c]);
    assert_eq!(from_file["seed"], 2);
    assert_eq!(from_file["weights"]["density"], 1.0);
    assert_eq!(from_file["gap_k_range"], serde_json::json!([1, 8]));
    assert_eq!(from_file["k_final"], from_file["estimates"]["density"]);

    let overridden = estimate(&["--config", c, "--seed", "9", "--weights", "0,0,0,1"]);
    assert_eq!(overridden["seed"], 9);
    assert_eq!(overridden["weights"]["gap"], 1.0);
    assert_eq!(overridden["gap_k_range"], serde_json::json!([1, 8]));

    std::fs::write(&config, r#"{"sede": 1}"#).unwrap();
    assert_eq!(run(&["estimate-k", "--config", c]).status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["estimate-k", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn compare_writes_reports_and_curves() {
    let dir = TempDir::new().unwrap();
    let data = gen_blobs(dir.path(), "blobs.csv", &["--k", "3", "--n-per", "60", "--seed", "4"]);
    let d = data.to_str().unwrap();
    let json_path = dir.path().join("r.json");
    let csv_path = dir.path().join("r.csv");
    let curves = dir.path().join("curves.csv");
    let common = ["--trials", "1", "--no-warmup", "--k-max", "6", "--seed", "4"];

    let mut args = vec!["compare", "-i", d, "-o", json_path.to_str().unwrap(), "--curves", curves.to_str().unwrap()];
    args.extend_from_slice(&common);
    let text = stdout(&run(&args));
    assert!(text.contains("report written to"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let report = if report.is_array() { report[0].clone() } else { report };
    assert_eq!(report["dataset_id"], "blobs");
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for row in rows {
        assert!(row["elapsed_seconds"].as_f64().unwrap() >= 0.0);
        assert!(row["selected_k"].as_u64().is_some());
    }
    let curve_text = std::fs::read_to_string(&curves).unwrap();
    assert_eq!(curve_text.lines().next().unwrap(), "method,k,score");
    assert!(curve_text.lines().count() > 1);

    let mut args = vec!["compare", "-i", d, "-o", csv_path.to_str().unwrap(), "--format", "csv", "--methods", "wcss,silhouette-condensed"];
    args.extend_from_slice(&common);
    stdout(&run(&args));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().next().unwrap().contains("method"));

    let mut args = vec!["compare", "-i", d, "--methods", "nonsense"];
    args.extend_from_slice(&common);
    assert_eq!(run(&args).status.code(), Some(2));
}

#[test]
fn compare_selections_repeat() {
    let dir = TempDir::new().unwrap();
    let data = gen_blobs(dir.path(), "blobs.csv", &["--n-per", "50", "--seed", "6"]);
    let selected = |name: &str| {
        let out = dir.path().join(name);
        stdout(&run(&[
            "compare", "-i", data.to_str().unwrap(), "-o", out.to_str().unwrap(),
            "--trials", "1", "--no-warmup", "--k-max", "6",
        ]));
        let report: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
        let report = if report.is_array() { report[0].clone() } else { report };
        report["rows"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| (r["selected_k"].clone(), r["distance_eval_count"].clone()))
            .collect::<Vec<_>>()
    };
    assert_eq!(selected("a.json"), selected("b.json"));
}

#[test]
fn output_dir_from_environment() {
    let dir = TempDir::new().unwrap();
    let out = kselect()
        .env("KSELECT_OUTPUT_DIR", dir.path())
        .args(["gen", "--k", "2", "--n-per", "10", "--seed", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = dir.path().join("blobs_k2_d2_n20_seed1.csv");
    assert_eq!(std::fs::read_to_string(written).unwrap().lines().count(), 20);

    let out = kselect()
        .env("KSELECT_OUTPUT_DIR", dir.path())
        .args(["compare", "-i"])
        .arg(dir.path().join("blobs_k2_d2_n20_seed1.csv"))
        .args(["--trials", "1", "--no-warmup", "--k-max", "4", "--methods", "wcss"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("compare_report.json").exists());
}

#[test]
fn bench_runs_each_size() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("bench.csv");
    stdout(&run(&[
        "bench", "--sizes", "60,120", "--methods", "wcss,silhouette", "--format", "csv",
        "-o", report.to_str().unwrap(), "--trials", "1", "--no-warmup", "--k-max", "5",
    ]));
    // header plus two methods at two sizes
    assert_eq!(std::fs::read_to_string(&report).unwrap().lines().count(), 5);
    assert_eq!(run(&["bench", "--sizes", "2"]).status.code(), Some(2));
}
