use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn tomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tomo"))
        .args(args)
        .output()
        .expect("tomo runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn diag_state(dir: &Path, d: f64) -> PathBuf {
    write(
        dir,
        &format!("diag_{d}.json"),
        &format!(r#"{{"modes":1,"mean_q":[0],"mean_p":[0],"sigma":[[{d},0],[0,{d}]]}}"#),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&tomo(&["validate", s(&diag_state(dir.path(), 0.5))])), 0);

    let out = tomo(&["validate", s(&diag_state(dir.path(), 0.4))]);
    assert_eq!(code(&out), 2);
    let det = stdout_json(&out)["report"]["per_mode_det"][0].as_f64().unwrap();
    assert!((det - 0.16).abs() < 1e-12);

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"modes":1,"mean_q":[0],"mean_p":[0],"sigma":[[1,0,0],[0,1,0],[0,0,1]]}"#,
    );
    let out = tomo(&["validate", s(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("sigma must be 2N×2N"), "{}", stderr(&out));

    let typo = write(dir.path(), "typo.json", r#"{"modes":1,"mean_q":[0],"mean_p":[0],"sigmaa":[[1]]}"#);
    let out = tomo(&["validate", s(&typo)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("sigmaa"), "{}", stderr(&out));
}

#[test]
fn tomogram_rows() {
    let dir = TempDir::new().unwrap();
    let vac = diag_state(dir.path(), 0.5);
    let out = tomo(&["tomogram", s(&vac), "--n", "0..3", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "n,re_alpha,im_alpha,omega\n0,0,0,1\n1,0,0,0\n2,0,0,0\n3,0,0,0\n"
    );

    let out = tomo(&["tomogram", s(&vac), "--n", "1", "--alpha", "1,0", "--format", "csv"]);
    assert!(String::from_utf8(out.stdout).unwrap().ends_with("1,1,0,0.367879441171\n"));

    let out = tomo(&["tomogram", s(&vac), "--n", "65"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("65"));
}

#[test]
fn tomogram_with_quadrature_oracle() {
    let dir = TempDir::new().unwrap();
    let thermal = diag_state(dir.path(), 1.5);
    let csv = dir.path().join("thermal.csv");
    let out = tomo(&[
        "tomogram", s(&thermal), "--n", "0..6", "--alpha", "0,0;0.5,0.3", "--format", "csv",
        "--oracle", "quadrature", "-o", s(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,re_alpha,im_alpha,omega,omega_oracle,abs_delta");
    for line in lines {
        let delta: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(delta <= 1e-6, "{line}");
    }
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("thermal.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["manifest"]["command"], "tomogram");
    assert_eq!(manifest["manifest"]["parameters"]["quadrature"]["spacing"], 0.05);
}

#[test]
fn reconstruct_defaults_and_rejection() {
    let dir = TempDir::new().unwrap();
    let vac = diag_state(dir.path(), 0.5);
    let out_path = dir.path().join("rho.json");
    let out = tomo(&["reconstruct", s(&vac), "-o", s(&out_path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(doc["rho"][0][0][0].as_f64().unwrap() >= 0.99);
    assert_eq!(doc["manifest"]["parameters"]["config"]["cutoff"], 12);
    assert!(doc["frobenius_vs_reference"].as_f64().unwrap() <= 1e-2);

    let coherent = write(
        dir.path(),
        "coherent.json",
        r#"{"modes":1,"mean_q":[0.7071067811865476],"mean_p":[0],"sigma":[[0.5,0],[0,0.5]]}"#,
    );
    let out = tomo(&["reconstruct", s(&coherent)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout_json(&out)["frobenius_vs_reference"].as_f64().unwrap() <= 1e-2);

    let out = tomo(&["reconstruct", s(&vac), "--s", "-1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn reconstruct_from_tomogram_table() {
    let dir = TempDir::new().unwrap();
    let vac = diag_state(dir.path(), 0.5);
    let csv = dir.path().join("grid.csv");
    let out = tomo(&[
        "tomogram", s(&vac), "--n", "0..20", "--alpha", "polar:40:40:4", "--format", "csv", "-o", s(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = tomo(&["reconstruct", "--tomogram-csv", s(&csv)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = stdout_json(&out);
    assert!(doc["rho"][0][0][0].as_f64().unwrap() >= 0.99);
    assert!(doc.get("frobenius_vs_reference").is_none());
}

#[test]
fn positivity_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = tomo(&["positivity", s(&diag_state(dir.path(), 0.4))]);
    assert_eq!(code(&out), 3);
    let doc = stdout_json(&out);
    let first = &doc["report"]["negative_witnesses"][0];
    assert_eq!(first["n"], serde_json::json!([1]));
    assert_eq!(first["alpha"], serde_json::json!([[0.0, 0.0]]));
    assert!((first["omega"].as_f64().unwrap() + 0.1 / 0.81).abs() < 1e-5);

    assert_eq!(code(&tomo(&["positivity", s(&diag_state(dir.path(), 0.5))])), 0);
}

#[test]
fn oracle_compare_and_p0() {
    let dir = TempDir::new().unwrap();
    let st = write(
        dir.path(),
        "sq.json",
        r#"{"modes":1,"mean_q":[0.3],"mean_p":[-0.2],"sigma":[[0.8,0.2],[0.2,0.7]]}"#,
    );
    let out = tomo(&["oracle-compare", s(&st), "--n", "0..6", "--alpha", "0,0;-1,0"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = stdout_json(&out);
    assert_eq!(doc["within_tolerance"], true);
    assert!(doc["max_abs_delta_fock"].as_f64().unwrap() <= 1e-6);

    let out = tomo(&["p0", s(&diag_state(dir.path(), 0.5)), "--alpha", "1,0"]);
    assert_eq!(code(&out), 0);
    let p0 = stdout_json(&out)["kernels"][0]["p0"].as_f64().unwrap();
    assert!((p0 - (-1f64).exp()).abs() < 1e-11);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let st = diag_state(dir.path(), 0.7);
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = tomo(&["tomogram", s(&st), "--n", "0..8", "--alpha", "grid:1:3", "-o", s(&p)]);
        assert_eq!(code(&out), 0);
        fs::read(p).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
    let rec = |name: &str| {
        let p = dir.path().join(name);
        assert_eq!(code(&tomo(&["reconstruct", s(&st), "-o", s(&p)])), 0);
        fs::read(p).unwrap()
    };
    assert_eq!(rec("r1.json"), rec("r2.json"));
}

#[test]
fn thread_variable_is_checked() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_tomo"))
        .env("TOMO_THREADS", "zero")
        .args(["validate", s(&diag_state(dir.path(), 0.5))])
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("TOMO_THREADS"));
}
