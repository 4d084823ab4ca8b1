//! End-to-end tests of the `homolab` binary: exit codes, reproducible
//! outputs, manifest digests, and the documented flag semantics.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn homolab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homolab"))
        .args(args)
        .current_dir(dir)
        .env_remove("HOMOLAB_SEED")
        .output()
        .expect("binary runs")
}

fn assert_code(output: &Output, expected: i32) {
    assert_eq!(
        output.status.code(),
        Some(expected),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn generate_writes_graph_and_verifiable_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = homolab(
        &[
            "generate", "--n", "120", "--m", "3", "--h", "0.8", "--rho", "0.4", "--seed", "9",
            "--out", "g.json",
        ],
        dir.path(),
    );
    assert_code(&out, 0);

    let graph_bytes = fs::read(dir.path().join("g.json")).unwrap();
    let graph: serde_json::Value = serde_json::from_slice(&graph_bytes).unwrap();
    assert_eq!(graph["n"], 120);
    assert_eq!(graph["edges"].as_array().unwrap().len(), 3 + 117 * 3);

    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("g.json.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["h"], 0.8);
    assert_eq!(manifest["seeds"][0], 9);
    assert!(manifest["library_version"].is_string());
    let digest = manifest["outputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest, homolab::io::sha256_hex(&graph_bytes));

    // Same seed, byte-identical output.
    let rerun = homolab(
        &[
            "generate", "--n", "120", "--m", "3", "--h", "0.8", "--rho", "0.4", "--seed", "9",
            "--out", "g2.json",
        ],
        dir.path(),
    );
    assert_code(&rerun, 0);
    assert_eq!(graph_bytes, fs::read(dir.path().join("g2.json")).unwrap());

    // Identical invocation: manifests agree on everything but the timestamp.
    let strip_time = |path: &Path| -> serde_json::Value {
        let mut v: serde_json::Value =
            serde_json::from_slice(&fs::read(path).unwrap()).unwrap();
        v["timestamp_utc"] = serde_json::Value::Null;
        v["command"] = serde_json::Value::Null;
        v
    };
    let again = homolab(
        &[
            "generate", "--n", "120", "--m", "3", "--h", "0.8", "--rho", "0.4", "--seed", "9",
            "--out", "g2.json",
        ],
        dir.path(),
    );
    assert_code(&again, 0);
    assert_eq!(
        strip_time(&dir.path().join("g.json.manifest.json"))["config"],
        strip_time(&dir.path().join("g2.json.manifest.json"))["config"]
    );
    assert_eq!(
        strip_time(&dir.path().join("g.json.manifest.json"))["outputs"][0]["sha256"],
        strip_time(&dir.path().join("g2.json.manifest.json"))["outputs"][0]["sha256"]
    );
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cfg.json"),
        r#"{"n": 60, "m": 2, "h": 0.5, "rho": 0.1, "seed": 3}"#,
    )
    .unwrap();
    let out = homolab(
        &[
            "generate", "--config", "cfg.json", "--h", "0.9", "--out", "g.json",
        ],
        dir.path(),
    );
    assert_code(&out, 0);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("g.json.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["h"], 0.9, "flag must win over the file");
    assert_eq!(manifest["config"]["rho"], 0.1);
}

#[test]
fn missing_rho_defaults_to_zero_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let out = homolab(
        &["generate", "--n", "50", "--m", "2", "--h", "0.5", "--out", "g.json"],
        dir.path(),
    );
    assert_code(&out, 0);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("warning") && stderr.contains("rho"), "{stderr}");
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("g.json.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["rho"], 0.0);
}

#[test]
fn seed_env_var_is_the_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_homolab"))
        .args(["generate", "--n", "50", "--m", "2", "--h", "0.5", "--rho", "0", "--out", "g.json"])
        .current_dir(dir.path())
        .env("HOMOLAB_SEED", "12345")
        .output()
        .unwrap();
    assert_code(&out, 0);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("g.json.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seeds"][0], 12345);
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = homolab(
        &["generate", "--n", "50", "--m", "2", "--h", "1.5", "--rho", "0", "--out", "g.json"],
        dir.path(),
    );
    assert_code(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("h"));

    // Unknown keys in a config file are strict-mode validation errors.
    fs::write(dir.path().join("cfg.json"), r#"{"n": 50, "m": 2, "h": 0.5, "bogus": 1}"#).unwrap();
    let out = homolab(
        &["generate", "--config", "cfg.json", "--out", "g.json"],
        dir.path(),
    );
    assert_code(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn degenerate_math_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = homolab(
        &[
            "theorem", "--kind", "homophilous", "--h", "0.25", "--d", "2", "--p", "0.3",
            "--alpha", "0.1",
        ],
        dir.path(),
    );
    assert_code(&out, 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn io_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = homolab(&["metrics", "--graph", "missing.json"], dir.path());
    assert_code(&out, 4);
    // Malformed JSON is a parse failure, not a validation problem.
    fs::write(dir.path().join("bad.json"), "{not json").unwrap();
    let out = homolab(&["metrics", "--graph", "bad.json"], dir.path());
    assert_code(&out, 4);
}

#[test]
fn theorem_reports_a_tiny_residual() {
    let dir = tempfile::tempdir().unwrap();
    let out = homolab(
        &[
            "theorem", "--kind", "concat", "--h", "0.9", "--d", "4", "--p", "0.3", "--alpha",
            "-0.4",
        ],
        dir.path(),
    );
    assert_code(&out, 0);
    let check: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(check["residual"].as_f64().unwrap() < 1e-8);
    let b = check["coefficient"].as_f64().unwrap();
    assert!((b - 12.8 / 11.24).abs() < 1e-9);
}

#[test]
fn coeff_grid_is_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "coeff-grid", "--out", "grid.csv", "--d-values", "1,5", "--h-step", "0.05",
    ];
    assert_code(&homolab(&args, dir.path()), 0);
    let first = fs::read(dir.path().join("grid.csv")).unwrap();
    let text = String::from_utf8_lossy(&first);
    assert!(text.starts_with("d,h,b1,bprime1,diff,flag\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 21);
    assert!(text.contains("degenerate_b1"));

    let rerun_args = [
        "coeff-grid", "--out", "grid2.csv", "--d-values", "1,5", "--h-step", "0.05",
    ];
    assert_code(&homolab(&rerun_args, dir.path()), 0);
    assert_eq!(first, fs::read(dir.path().join("grid2.csv")).unwrap());
}

#[test]
fn evaluate_reports_binned_f1() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &homolab(
            &[
                "generate", "--n", "400", "--m", "4", "--h", "0.9", "--rho", "0.7",
                "--epsilon", "0.8", "--seed", "2", "--out", "g.json",
            ],
            dir.path(),
        ),
        0,
    );
    let out = homolab(
        &[
            "evaluate", "--graph", "g.json", "--kind", "homophilous", "--seed", "11",
        ],
        dir.path(),
    );
    assert_code(&out, 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["model"], "homophilous");
    let bins = report["bins"].as_array().unwrap();
    assert_eq!(bins.len(), 4);
    let total: u64 = bins.iter().map(|b| b["count"].as_u64().unwrap()).sum();
    assert_eq!(total, 100, "test split rides the 50-25-25 default");
}

#[test]
fn sweep_writes_sorted_csv_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let spec = serde_json::json!({
        "configs": [{
            "n": 200, "m": 3, "class_probs": [0.5, 0.5], "h": 0.9,
            "rho": 0.5, "epsilon": 0.5, "delta": 5, "seed": 40
        }],
        "kinds": ["homophilous", "baseline"],
        "seeds": 2
    });
    fs::write(dir.path().join("sweep.json"), spec.to_string()).unwrap();
    let out = homolab(
        &["sweep", "--config", "sweep.json", "--out", "results.csv"],
        dir.path(),
    );
    assert_code(&out, 0);
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert!(csv.starts_with("h,rho,kind,bin_lo,bin_hi,f1_mean,f1_std,n_nodes,flag\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 4);
    assert!(!csv.contains("NaN"));
    assert!(dir.path().join("results.csv.manifest.json").exists());

    // Byte-stable rerun.
    assert_code(
        &homolab(&["sweep", "--config", "sweep.json", "--out", "again.csv"], dir.path()),
        0,
    );
    assert_eq!(csv, fs::read_to_string(dir.path().join("again.csv")).unwrap());
}

#[test]
fn graph_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &homolab(
            &[
                "generate", "--n", "80", "--m", "2", "--h", "0.3", "--rho", "0.2", "--seed",
                "5", "--out", "g.json",
            ],
            dir.path(),
        ),
        0,
    );
    let bytes = fs::read(dir.path().join("g.json")).unwrap();
    let graph = homolab::Graph::from_json(std::str::from_utf8(&bytes).unwrap()).unwrap();
    assert_eq!(graph.to_canonical_json().as_bytes(), &bytes[..]);

    let out = homolab(&["metrics", "--graph", "g.json"], dir.path());
    assert_code(&out, 0);
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let global = summary["global_ratio"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&global));
    assert_eq!(
        summary["per_node_ratio"].as_array().unwrap().len(),
        80,
        "one entry per node"
    );
}
