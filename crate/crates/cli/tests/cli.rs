use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn goy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_goy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: PathBuf) -> String {
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

/// State at t = 100 with a 50-snapshot window.
fn seed(dir: &TempDir) -> PathBuf {
    let out = dir.path().join("seed");
    let o = goy(&["simulate", "--out", path_str(&out), "--t-end", "100", "--window", "50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("checkpoint.ckpt")
}

#[test]
fn simulate_writes_all_outputs() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sim");
    let args = ["simulate", "--out", path_str(&out), "--t-end", "60", "--set", "stats_from=30"];
    let o = goy(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["energy.csv", "dissipation.csv", "spectrum.csv", "flux.csv", "tau0.txt", "config.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let energy = read(out.join("energy.csv"));
    let mut lines = energy.lines();
    assert_eq!(lines.next(), Some("t,energy"));
    assert_eq!(energy.lines().count(), 601);
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(first.iter().all(|v| v.contains('e')));
    assert!(!energy.contains('\r'));

    let spectrum = read(out.join("spectrum.csv"));
    assert_eq!(spectrum.lines().next(), Some("shell_index,k,value"));
    assert_eq!(spectrum.lines().count(), 23);
    let tau = read(out.join("tau0.txt"));
    assert_eq!(tau.lines().count(), 2);
    assert!(read(out.join("config.txt")).contains("stats_from = 30"));

    let again = dir.path().join("sim2");
    let o = goy(&["simulate", "--out", path_str(&again), "--t-end", "60", "--set", "stats_from=30"]);
    assert!(o.status.success());
    for f in ["energy.csv", "dissipation.csv", "spectrum.csv", "flux.csv", "tau0.txt"] {
        assert_eq!(read(out.join(f)), read(again.join(f)), "{f}");
    }
}

#[test]
fn zero_horizon_gives_empty_outputs() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("empty");
    let o = goy(&["simulate", "--out", path_str(&out), "--t-end", "0"]);
    assert!(o.status.success());
    assert_eq!(read(out.join("energy.csv")), "t,energy\n");
    assert_eq!(read(out.join("spectrum.csv")), "shell_index,k,value\n");
    assert_eq!(read(out.join("tau0.txt")), "tau0\n");
}

#[test]
fn malformed_config_leaves_nothing() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.cfg");
    for text in ["window = 10\nthis line has no separator\n", "windw = 10\n", "window = many\n", "snapshot_dt = 0.1\nupdate_interval = 0.25\n"] {
        std::fs::write(&cfg, text).unwrap();
        let out = dir.path().join("never");
        let o = goy(&["simulate", "--config", path_str(&cfg), "--out", path_str(&out)]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(!out.exists(), "{text}");
        let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
        assert_eq!(err["error"], "config");
    }
}

#[test]
fn config_file_and_flags_compose() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# short run\nt_end = 5\nwindow = 20\nintegrator.rtol = 1e-7\n").unwrap();
    let out = dir.path().join("o");
    let o = goy(&["simulate", "--config", path_str(&cfg), "--t-end", "3", "--out", path_str(&out)]);
    assert!(o.status.success());
    let echo = read(out.join("config.txt"));
    assert!(echo.contains("\nt_end = 3.0\n"));
    assert!(echo.contains("window = 20\n"));
    assert!(echo.contains("integrator.rtol = 1e-7\n"));
    assert_eq!(read(out.join("energy.csv")).lines().count(), 31);
}

#[test]
fn train_log_and_resume() {
    let dir = TempDir::new().unwrap();
    let ckpt = seed(&dir);
    let full = dir.path().join("full");
    // the window is still young at t = 100; keep theta non-negative
    let common = ["--window", "50", "--guard", "clamp", "--seed-trajectory", path_str(&ckpt)];
    let o = goy(&[&["train", "--out", path_str(&full), "--t-end", "102"][..], &common[..]].concat());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let log = read(full.join("train.jsonl"));
    assert_eq!(log.lines().count(), 20);
    let first: serde_json::Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    for key in ["t", "theta_before", "theta_after", "loss", "grad", "fwd_steps", "bwd_steps", "guard_flag", "error"] {
        assert!(first.get(key).is_some(), "{key}");
    }

    let head = dir.path().join("head");
    let o = goy(&[&["train", "--out", path_str(&head), "--t-end", "101"][..], &common[..]].concat());
    assert!(o.status.success());
    let tail = dir.path().join("tail");
    let o = goy(&[
        "train",
        "--out",
        path_str(&tail),
        "--t-end",
        "102",
        "--window",
        "50",
        "--guard",
        "clamp",
        "--resume",
        path_str(&head.join("checkpoint.ckpt")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let joined = read(head.join("train.jsonl")) + &read(tail.join("train.jsonl"));
    assert_eq!(joined, log);
}

#[test]
fn resume_with_other_settings_is_rejected() {
    let dir = TempDir::new().unwrap();
    let ckpt = seed(&dir);
    let out = dir.path().join("r");
    let o = goy(&["train", "--out", path_str(&out), "--resume", path_str(&ckpt), "--lr", "3e-9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corrupted_checkpoint_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let ckpt = seed(&dir);
    let text = read(ckpt.clone()).replacen("\"t\":", "\"t\": ", 1);
    std::fs::write(&ckpt, text).unwrap();
    let out = dir.path().join("x");
    let o = goy(&["ablate", "--out", path_str(&out), "--seed-trajectory", path_str(&ckpt)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("checksum"));
    assert!(!out.exists());
}

#[test]
fn adversarial_learning_rate_fails_with_solver_error() {
    let dir = TempDir::new().unwrap();
    let ckpt = seed(&dir);
    let out = dir.path().join("adv");
    let o = goy(&[
        "train",
        "--out",
        path_str(&out),
        "--window",
        "50",
        "--seed-trajectory",
        path_str(&ckpt),
        "--guard",
        "none",
        "--lr",
        "1e-6",
        "--t-end",
        "120",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "solver");
    let log = read(out.join("train.jsonl"));
    let last: serde_json::Value = serde_json::from_str(log.lines().last().unwrap()).unwrap();
    assert_eq!(last["error"], err["kind"]);
}

#[test]
fn ablate_continues_seed() {
    let dir = TempDir::new().unwrap();
    let ckpt = seed(&dir);
    let out = dir.path().join("abl");
    let o = goy(&["ablate", "--out", path_str(&out), "--resume", path_str(&ckpt), "--t-end", "103"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let energy = read(out.join("energy.csv"));
    assert_eq!(energy.lines().count(), 31);
    let t0: f64 = energy.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((t0 - 100.1).abs() < 1e-9);
}

#[test]
fn gradcheck_passes_and_detects_loose_tolerance() {
    let dir = TempDir::new().unwrap();
    let ckpt = seed(&dir);
    let out = dir.path().join("gc");
    let o = goy(&["gradcheck", "--out", path_str(&out), "--seed-trajectory", path_str(&ckpt), "--states", "4"]);
    assert!(o.status.success(), "{}\n{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(out.join("gradcheck.csv")).lines().count(), 5);

    let loose = dir.path().join("gc2");
    let o = goy(&[
        "gradcheck",
        "--out",
        path_str(&loose),
        "--seed-trajectory",
        path_str(&ckpt),
        "--states",
        "4",
        "--set",
        "integrator.rtol=1e-2",
        "--set",
        "integrator.atol=1e-6",
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn train_without_window_source_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t");
    let o = goy(&["train", "--out", path_str(&out), "--set", "spin_up_t=0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}
