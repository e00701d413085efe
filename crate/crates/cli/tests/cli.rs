use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mpvlasov"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn dump_writes_tables_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["dump", "--quiet", "--seed", "7", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let dump = fs::read_to_string(out.join("dump.csv")).unwrap();
    assert!(dump.starts_with("key,value\n"));
    assert!(dump.contains("\nseed,7\n"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["subcommand"], "dump");
    assert_eq!(manifest["outputs"][0], "dump.csv");
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "instances = 5\n");
    let mut bodies = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let status = bin()
            .args(["verify-algebra", "--quiet", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        bodies.push(fs::read(out.join("algebra.csv")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn config_errors_exit_two_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    for text in ["Nq = 63\n", "bogus = 1\n", "dt = -1\n", "Nq = 64\nNq = 32\n", "no equals sign\n"] {
        let cfg = write_config(dir.path(), text);
        let out = dir.path().join("never");
        let result = bin()
            .args(["dump", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(result.status.code(), Some(2), "{text}");
        assert!(!result.stderr.is_empty());
        assert!(!out.exists(), "{text}");
    }
    let missing = bin()
        .args(["dump", "--config", "/nonexistent/run.cfg", "--out"])
        .arg(dir.path().join("never"))
        .status()
        .unwrap();
    assert_eq!(missing.code(), Some(2));
}

#[test]
fn violations_exit_one_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    // a coarse p-grid leaves the one-form intertwining above its tolerance
    let cfg = write_config(dir.path(), "Np = 32\n");
    let out = dir.path().join("out");
    let status = bin()
        .args(["check-intertwine", "--quiet", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "violation");
    assert!(!manifest["violations"].as_array().unwrap().is_empty());
    assert!(out.join("intertwine.csv").exists());
}

#[test]
fn runtime_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // CFL number 0.5·8/(1·Δq) far above the semi-Lagrangian limit
    let cfg = write_config(dir.path(), "Nq = 64\ndt = 0.5\nt_end = 1\n");
    let out = dir.path().join("out");
    let status = bin()
        .args(["run-vlasov", "--quiet", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "error");
    assert!(manifest["error"].is_string());
}

#[test]
fn unknown_subcommand_is_rejected() {
    let status = bin().arg("simulate").output().unwrap();
    assert_ne!(status.status.code(), Some(0));
}
