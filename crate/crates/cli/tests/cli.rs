//! End-to-end contract tests of the command-line tool: exit codes,
//! deterministic artifacts, environment overrides, and the golden fill
//! output.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_horolab")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("horolab_cli_{}", tag));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.conf");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn verify_suite_passes_and_writes_reports() {
    let dir = tmp_dir("verify");
    let cfg = write_config(
        &dir,
        &format!(
            "n = 3\nseed = 9\nout_dir = {}\nsamples.iwasawa = 100\n",
            dir.display()
        ),
    );
    let out = Command::new(bin())
        .args(["verify", "--suite", "iwasawa", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("iwasawa.csv").exists());
    assert!(dir.join("iwasawa.json").exists());
    let csv = std::fs::read_to_string(dir.join("iwasawa.csv")).unwrap();
    assert!(csv.starts_with("suite,check_id,n,seed,measured,bound,pass\n"));
}

#[test]
fn identical_config_and_seed_give_byte_identical_reports() {
    let dir_a = tmp_dir("det_a");
    let dir_b = tmp_dir("det_b");
    for dir in [&dir_a, &dir_b] {
        let cfg = write_config(
            dir,
            &format!(
                "n = 3\nseed = 33\nout_dir = {}\nsamples.compare = 60\n",
                dir.display()
            ),
        );
        let out = Command::new(bin())
            .args(["verify", "--suite", "compare", "--config"])
            .arg(&cfg)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir_a.join("compare.csv")).unwrap();
    let b = std::fs::read(dir_b.join("compare.csv")).unwrap();
    assert_eq!(a, b);
    let aj = std::fs::read(dir_a.join("compare.json")).unwrap();
    let bj = std::fs::read(dir_b.join("compare.json")).unwrap();
    assert_eq!(aj, bj);
}

#[test]
fn rejects_invalid_center_with_exit_two() {
    let dir = tmp_dir("badtau");
    let cfg = write_config(&dir, "n = 3\ntau = 1 1 -2\n");
    let out = Command::new(bin())
        .args(["verify", "--suite", "busemann", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rejects_malformed_sphere_with_exit_four() {
    let dir = tmp_dir("badsphere");
    let input = dir.join("bad.json");
    std::fs::write(&input, "{\"schema\": \"nope\"}").unwrap();
    let out = Command::new(bin())
        .args(["fill", "--input"])
        .arg(&input)
        .arg("--output")
        .arg(dir.join("out.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(!dir.join("out.json").exists(), "no partial files on failure");
}

#[test]
fn env_seed_override_changes_artifacts() {
    let dir = tmp_dir("envseed");
    let cfg = write_config(
        &dir,
        &format!(
            "n = 3\nseed = 1\nout_dir = {}\nsamples.iwasawa = 50\n",
            dir.display()
        ),
    );
    let run = |seed: &str| {
        let out = Command::new(bin())
            .env("HOROLAB_SEED", seed)
            .args(["verify", "--suite", "iwasawa", "--config"])
            .arg(&cfg)
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read_to_string(dir.join("iwasawa.csv")).unwrap()
    };
    let a = run("5");
    let b = run("6");
    assert_ne!(a, b);
    assert!(a.contains(",5,"));
    assert!(b.contains(",6,"));
}

#[test]
fn fill_matches_golden_output_byte_for_byte() {
    let dir = tmp_dir("goldfill");
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let cfg = write_config(
        &dir,
        &format!("n = 3\nseed = 42\nout_dir = {}\n", dir.display()),
    );
    let output = dir.join("path.json");
    let out = Command::new(bin())
        .args(["fill", "--input"])
        .arg(fixtures.join("sphere_m0_sl3.json"))
        .arg("--output")
        .arg(&output)
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let got = std::fs::read(&output).unwrap();
    let golden = std::fs::read(fixtures.join("golden_path_m0_sl3.json")).unwrap();
    assert_eq!(got, golden, "filled path deviates from the golden fixture");
}

#[test]
fn calibrate_writes_lockfile_consumed_by_verify() {
    let dir = tmp_dir("calib");
    let cfg = write_config(
        &dir,
        &format!(
            "n = 3\nseed = 4\nout_dir = {}\nsamples.iwasawa = 50\n",
            dir.display()
        ),
    );
    let out = Command::new(bin())
        .args(["verify", "--suite", "iwasawa", "--calibrate", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("calibration.lock.json").exists());
    let out = Command::new(bin())
        .args(["verify", "--suite", "iwasawa", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("using calibration lockfile"));
}
