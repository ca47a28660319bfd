use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn minlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("c.toml");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn list_probes_names_every_kind() {
    let out = minlab(&["list-probes"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for kind in [
        "orbit",
        "density",
        "fibers",
        "witness",
        "almost11",
        "slope",
        "equivariance",
        "tiling",
        "product",
    ] {
        assert!(text.lines().any(|l| l.starts_with(kind)), "{kind} missing");
    }
}

#[test]
fn validate_exit_codes() {
    let ok = minlab(&["validate", config("klein.toml").to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = minlab(&["validate", config("even-harmonic.toml").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    let msg = String::from_utf8(bad.stderr).unwrap();
    assert!(msg.contains("equivariance requires odd harmonics"), "{msg}");
    assert!(msg.contains("line 4"), "{msg}");
    let missing = minlab(&["validate", "/nonexistent/config.toml"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn run_passes_and_writes_the_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bundle");
    let r = minlab(&[
        "run",
        config("odometer-blowup.toml").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stdout));
    let csv = std::fs::read_to_string(out.join("02-fibers.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "index,diameter,formula");
    for row in &rows[1..] {
        let f: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(f[1], 2.0 * 0.5f64.powi(f[0].abs() as i32));
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["probes"].as_array().unwrap().len(), 4);
}

#[test]
fn assertion_failure_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[system]\nkind = \"rotation\"\n[[probe]]\nkind = \"density\"\nn = 50\neps = 1e-5\n[[probe]]\nkind = \"tiling\"\n[output]\nseed = 1\n",
    );
    let out = tmp.path().join("o");
    let r = minlab(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(1));
    assert!(out.join("02-tiling.json").exists());
}

#[test]
fn config_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[system]\nkind = \"odometer-suspension\"\n[blowup]\nmode = \"two-sided\"\nn = 4\n[[probe]]\nkind = \"witness\"\n[output]\nseed = 1\n",
    );
    let r = minlab(&["run", &cfg]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8(r.stderr).unwrap().contains("backward-only"));
    let unknown = write_config(
        tmp.path(),
        "[system]\nkind = \"rotation\"\nbeta = 1\n[output]\nseed = 1\n",
    );
    assert_eq!(minlab(&["validate", &unknown]).status.code(), Some(2));
}
