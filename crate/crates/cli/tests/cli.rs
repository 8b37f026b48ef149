use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn magspec(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magspec"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("MAGSPEC_CONFIG")
        .env_remove("MAGSPEC_WORKERS")
        .env_remove("MAGSPEC_QUICK")
        .env_remove("MAGSPEC_OUT")
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().clone();
    assert_eq!(
        header.iter().take(4).collect::<Vec<_>>(),
        ["config_hash", "version", "schema", "op_id"]
    );
    r.records().map(|x| x.unwrap()).collect()
}

#[test]
fn perturb_table_matches_ladder_formula() {
    let dir = TempDir::new().unwrap();
    let out = magspec(&["perturb"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = read_csv(&dir.path().join("perturb.csv"));
    assert_eq!(rows.len(), 16);
    for r in &rows {
        let nu: f64 = r[4].parse().unwrap();
        let ell: f64 = r[5].parse().unwrap();
        let value: f64 = r[7].parse().unwrap();
        assert_eq!(&r[9], "true");
        assert_eq!(value, 0.5 * (nu - 1.0) * ell * (ell + 1.0));
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("perturb.json")).unwrap())
            .unwrap();
    assert_eq!(summary["rows"], 16);
    assert_eq!(summary["config_hash"].as_str().unwrap(), &rows[0][0]);
}

#[test]
fn csv_is_independent_of_worker_count() {
    let runs: Vec<String> = ["1", "3"]
        .iter()
        .map(|w| {
            let dir = TempDir::new().unwrap();
            let out = magspec(&["--workers", w, "--quick", "verify"], dir.path());
            assert_eq!(
                out.status.code(),
                Some(0),
                "{}",
                String::from_utf8_lossy(&out.stderr)
            );
            std::fs::read_to_string(dir.path().join("verify.csv")).unwrap()
        })
        .collect();
    assert!(runs[0].lines().count() > 1);
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "no_such_key = 1\n").unwrap();
    let out = magspec(&["--config", cfg.to_str().unwrap(), "perturb"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("perturb.csv").exists());
}

#[test]
fn zero_workers_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = magspec(&["--workers", "0", "perturb"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_changes_hash() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, "[perturb]\nnu = [3]\nell = [0, 1]\n").unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(magspec(&["perturb"], &a).status.code(), Some(0));
    let out = magspec(&["--config", cfg.to_str().unwrap(), "perturb"], &b);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let ra = read_csv(&a.join("perturb.csv"));
    let rb = read_csv(&b.join("perturb.csv"));
    assert_eq!(rb.len(), 2);
    assert_ne!(&ra[0][0], &rb[0][0]);
}
