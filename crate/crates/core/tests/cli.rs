use spectraldiff::io::{read_manifest, verify_manifest};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const LAPLACIAN: &str =
    r#"{"domain":{"lower":0,"upper":1,"dim":1},"coefficients":{"kind":"builtin","name":"constant","params":{"a":1.0}}}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spectraldiff"));
    c.env("SPECTRALDIFF_THREADS", "1");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn schema_check(dir: &Path) {
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../schemas/manifest.schema.json")).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    let msgs: Vec<String> = match compiled.validate(&m) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| e.to_string()).collect(),
    };
    assert!(msgs.is_empty(), "manifest invalid: {msgs:?}");
}

#[test]
fn eig_fd_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(tmp.path(), "spec.json", LAPLACIAN);
    let out = tmp.path().join("out");
    let o = run(&["eig-fd", "--spec", spec.to_str().unwrap(), "--n-gr", "31", "--k", "3", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("eigenvalues.csv"));
    assert_eq!(header, ["k", "lambda", "residual"]);
    let h = 1.0 / 32.0;
    for (i, row) in rows.iter().enumerate() {
        let l: f64 = row[1].parse().unwrap();
        let exact = 4.0 / (h * h) * ((i + 1) as f64 * PI * h / 2.0).sin().powi(2);
        assert!((l - exact).abs() / exact < 1e-10);
    }
    let (header, rows) = read_csv(&out.join("eigenvector_2.csv"));
    assert_eq!(header, ["index", "x1", "value"]);
    assert_eq!(rows.len(), 31);
    // second mode is odd about the midpoint
    let v: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!((v[0] + v[30]).abs() < 1e-8);
    assert!(!out.join("eigenvector_4.csv").exists());
    schema_check(&out);
    verify_manifest(&out, &read_manifest(&out).unwrap()).unwrap();
}

#[test]
fn eig_fd_zero_k_and_bad_input() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(tmp.path(), "spec.json", LAPLACIAN);
    let out = tmp.path().join("out");
    let o = run(&["eig-fd", "--spec", spec.to_str().unwrap(), "--n-gr", "7", "--k", "0", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(out.join("eigenvalues.csv")).unwrap(), "k,lambda,residual\n");
    assert!(!out.join("eigenvector_1.csv").exists());
    let bad = write(tmp.path(), "bad.json", "{\"domain\":");
    let o = run(&["eig-fd", "--spec", bad.to_str().unwrap(), "--n-gr", "7", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["eig-fd", "--spec", "/nonexistent.json", "--n-gr", "7", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eig_qsim_fixed_grid_batch_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(tmp.path(), "spec.json", LAPLACIAN);
    let cfg = write(
        tmp.path(),
        "cfg.json",
        r#"{"eps":1.0,"delta":0.1,"gamma":0.5,"sampling":{"mode":"bernoulli"},"seed":5}"#,
    );
    let mut hashes = Vec::new();
    for rep in 0..2 {
        let out = tmp.path().join(format!("out{rep}"));
        let o = run(&[
            "eig-qsim", "--spec", spec.to_str().unwrap(), "--config", cfg.to_str().unwrap(), "--n-gr", "7",
            "--batch-seeds", "8", "--out-dir", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let est: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("estimate.json")).unwrap()).unwrap();
        assert_eq!(est["runs"], 8);
        assert_eq!(est["n_gr"], 7);
        assert!(est["success_rate"].as_f64().unwrap() >= 0.75);
        let (_, rows) = read_csv(&out.join("batch.csv"));
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0][0], "5");
        let m = read_manifest(&out).unwrap();
        assert_eq!(m.seed, Some(5));
        assert!(m.ledger.unwrap().entry_oracle_calls > 0);
        schema_check(&out);
        hashes.push(m.outputs.iter().map(|f| f.sha256.clone()).collect::<Vec<_>>());
    }
    assert_eq!(hashes[0], hashes[1]);
}

#[test]
fn eig_qsim_end_to_end_and_diagonal_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    // constant potential 3 on top of the Laplacian shifts every eigenvalue by 3
    let spec = write(
        tmp.path(),
        "spec.json",
        r#"{"domain":{"lower":0,"upper":1,"dim":1},"coefficients":{"kind":"builtin","name":"constant","params":{"a":1.0,"a0":3.0}}}"#,
    );
    let cfg = write(tmp.path(), "cfg.json", r#"{"eps":2.0,"delta":0.1,"gamma":0.6,"C1":8.2,"D1":0.0}"#);
    let out = tmp.path().join("out");
    let o = run(&[
        "eig-qsim", "--spec", spec.to_str().unwrap(), "--config", cfg.to_str().unwrap(), "--trial", "sine",
        "--out-dir", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let est: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("estimate.json")).unwrap()).unwrap();
    assert_eq!(est["mode"], "end_to_end");
    // n_gr = ceil(sqrt(2 C1 / eps))
    assert_eq!(est["n_gr"], 3);
    let lambda = est["lambda_hat"].as_f64().unwrap();
    assert!((lambda - (PI * PI + 3.0)).abs() <= 2.0, "{lambda}");
    let ledger: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("ledger.json")).unwrap()).unwrap();
    assert!(ledger["levels"].as_array().unwrap().len() >= 1);
}

#[test]
fn well_overlap_command() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(&["well-overlap", "--variant", "hilltop", "--steps", "196", "--n-max", "4", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("overlap.csv"));
    assert_eq!(header, ["r", "n", "overlap_sq"]);
    assert_eq!(rows.len(), 196 * 4);
    for row in rows.iter().filter(|r| r[1] == "2" || r[1] == "4") {
        assert!(row[2].parse::<f64>().unwrap() <= 1e-10);
    }
    let (_, arg) = read_csv(&out.join("argmax.csv"));
    let r1: f64 = arg[0][1].parse().unwrap();
    assert!((r1 - 0.52).abs() <= 0.02, "{r1}");
    let o = run(&["well-overlap", "--variant", "inflection", "--r-min=-1", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    schema_check(&out);
}

#[test]
fn complexity_sweep_needs_three_eps() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(tmp.path(), "spec.json", LAPLACIAN);
    let cfg = write(tmp.path(), "cfg.json", r#"{"eps":1.0,"delta":0.1,"gamma":0.5}"#);
    let out = tmp.path().join("out");
    let o = run(&[
        "complexity-sweep", "--spec", spec.to_str().unwrap(), "--config", cfg.to_str().unwrap(), "--eps-list", "0.5",
        "--out-dir", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "complexity-sweep", "--spec", spec.to_str().unwrap(), "--config", cfg.to_str().unwrap(), "--eps-list",
        "8,4,2", "--n-gr", "7", "--out-dir", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("sweep.csv"));
    assert_eq!(header[0], "kind");
    assert_eq!(rows.len(), 6);
    let slopes: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("slopes.json")).unwrap()).unwrap();
    assert!(slopes["fixed_matrix_slope"].as_f64().unwrap() > 0.0);
    schema_check(&out);
}

#[test]
fn hybrid_root_find_failure_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    // with beta this large the stochastic window lies beyond the grid edge
    let model = write(
        tmp.path(),
        "model.json",
        r#"{"kind":"hybrid","V0":1e-15,"M_GeV":1e16,"phi_c_over_M":1.4142,"beta":1e30}"#,
    );
    let out = tmp.path().join("out");
    let o = run(&["hybrid", "--model", model.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["hybrid", "--scale", "2", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_env_is_validated() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = bin()
        .env("SPECTRALDIFF_THREADS", "many")
        .args(["well-overlap", "--variant", "hilltop", "--out-dir", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
