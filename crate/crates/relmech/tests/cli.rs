use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn relmech(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relmech")).args(args).env_remove("RELMECH_OUT").output().unwrap()
}

fn run_into(cfg: &str, dir: &Path) -> Output {
    relmech(&["run", fixture(cfg).to_str().unwrap(), "--out", dir.to_str().unwrap()])
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_into("gyration.cfg", dir.path()).status.code(), Some(0));
    assert_eq!(run_into("failing.cfg", dir.path()).status.code(), Some(2));
    let bad = run_into("bad_range.cfg", dir.path());
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("`c` = -1"));
    assert_eq!(run_into("does_not_exist.cfg", dir.path()).status.code(), Some(1));
    assert_eq!(relmech(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(relmech(&[]).status.code(), Some(1));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("x.cfg");
    fs::write(&cfg, "scenario = orbit\norbit.mass = 1\n").unwrap();
    let out = relmech(&["check", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2: unknown key `orbit.mass`"));
}

#[test]
fn check_validates_without_running() {
    let dir = tempfile::tempdir().unwrap();
    let out = relmech(&["check", fixture("mercury.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok: scenario = orbit\n");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn golden_mercury_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into("mercury.cfg", dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert_eq!(text, fs::read_to_string(fixture("mercury.report.txt")).unwrap());
    assert_eq!(String::from_utf8_lossy(&out.stdout), text);
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv, fs::read_to_string(fixture("mercury.report.csv")).unwrap());
    let orbit = fs::read_to_string(dir.path().join("orbit.csv")).unwrap();
    assert!(orbit.starts_with("s,t,x1,x2,x3,x4,u1,u2,u3,u4,norm_residual,r,phi,epsilon,h_angmom,orbit_index\n"));
    assert_eq!(orbit.lines().count(), 1 + 2021);
}

#[test]
fn runs_are_byte_identical() {
    for cfg in ["identity.cfg", "gyration.cfg", "sweep.cfg"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_into(cfg, a.path());
        run_into(cfg, b.path());
        let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(names.len() >= 2, "{cfg}");
        for n in names {
            assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{cfg} {n:?}");
        }
    }
}

#[test]
fn seed_flag_reaches_the_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = relmech(&["run", fixture("identity.cfg").to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--seed", "99"]);
    assert_eq!(out.status.code(), Some(0));
    let seeded = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    run_into("identity.cfg", dir.path());
    assert_ne!(seeded, fs::read_to_string(dir.path().join("report.csv")).unwrap());
}

#[test]
fn relmech_out_overrides_the_flag() {
    let (env_dir, flag_dir) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let out = Command::new(env!("CARGO_BIN_EXE_relmech"))
        .args(["run", fixture("gyration.cfg").to_str().unwrap(), "--out", flag_dir.path().to_str().unwrap()])
        .env("RELMECH_OUT", env_dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(env_dir.path().join("worldline.csv").exists());
    assert_eq!(fs::read_dir(flag_dir.path()).unwrap().count(), 0);
}

#[test]
fn residual_sweep_writes_a_thousand_rows() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_into("sweep.cfg", dir.path()).status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("residuals.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("eq_tag,x1,x2,x3,x4,h,r1,r2,r3,r4"));
    assert_eq!(lines.count(), 1000);
}

#[test]
fn help_config_lists_keys() {
    let out = relmech(&["--help-config"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for key in ["scenario", "orbit.GM", "integrator.method", "sweep.residual", "chart"] {
        assert!(text.contains(key), "{key}");
    }
}

#[test]
fn precession_command() {
    let out = relmech(&["precession", "--GM", "1.32712440018e20", "--a", "5.7909e10", "--e", "0.20563"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let value = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(key)).unwrap();
        line.split('=').nth(1).unwrap().trim().parse().unwrap()
    };
    assert!((value("shift_per_rev_rad") - 6.69e-7).abs() < 0.005e-7);
    assert!((value("arcsec_per_century") / 57.3 - 1.0).abs() < 0.01);

    let out = relmech(&["precession", "--GM", "1", "--a", "10", "--e", "0.3", "--c", "10", "--revs", "5.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("precession_relative_deviation"));

    assert_eq!(relmech(&["precession", "--GM", "1", "--a", "10", "--e", "1.5"]).status.code(), Some(1));
}
