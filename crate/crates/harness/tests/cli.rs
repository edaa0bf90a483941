use std::process::Command;

use spikes_harness::config::{preset, BoxGrid};
use spikes_harness::output::COLUMNS;

fn spikes() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spikes"))
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("spikes-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn small_config() -> std::path::PathBuf {
    let mut cfg = preset("fig6").unwrap();
    cfg.gammas = vec![1e4];
    cfg.n_realizations = 100;
    cfg.b_grid = Some(BoxGrid { t0: 0.0, t1: 0.05, a: 0.01, b: vec![0.5] });
    let path = tmp("small.json");
    std::fs::write(&path, cfg.to_json()).unwrap();
    path
}

#[test]
fn run_writes_the_csv() {
    let out = tmp("run.csv");
    let status = spikes().args(["run", "--config"]).arg(small_config()).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
    assert_eq!(lines.count(), 1);
}

#[test]
fn bad_config_exits_with_code_two() {
    let path = tmp("bad.json");
    std::fs::write(&path, r#"{"model": {"kind": "thermal"}, "gammas": [1e4]}"#).unwrap();
    let out = spikes().args(["run", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config"));

    let out = spikes().args(["run", "--preset", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = spikes().args(["run", "--config"]).arg(tmp("missing.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_reports_each_criterion() {
    let out = spikes().args(["verify", "--only", "5,6"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("PASS criterion  5")));
    assert!(text.lines().any(|l| l.starts_with("PASS criterion  6")));
}

#[test]
fn dump_gives_a_consistent_event_log() {
    let out = spikes().args(["dump", "--config"]).arg(small_config()).args(["--grid", "50"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["model"], "thermal");
    let clicks = v["clicks"].as_array().unwrap();
    let times: Vec<f64> = clicks.iter().map(|c| c["time"].as_f64().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[0] < w[1]));
    assert!(!times.is_empty(), "gamma = 1e4 over t = 0.05 clicks");
    for c in clicks {
        assert_eq!(c["post_state"].as_f64().unwrap(), 0.0, "the thermal click resets to 0");
    }
    let xs = v["path_x"].as_array().unwrap();
    assert_eq!(xs.len(), 50);
    assert!(xs.iter().all(|x| (0.0..=1.0).contains(&x.as_f64().unwrap())));
}

#[test]
fn sample_limit_gives_alternating_jumps() {
    let out = spikes().args(["sample-limit", "--t-end", "50", "--seed", "3"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let jumps: Vec<f64> = v["jump_times"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(!jumps.is_empty() && jumps.windows(2).all(|w| w[0] < w[1]));
    for s in v["spikes"].as_array().unwrap() {
        let t = s["time"].as_f64().unwrap();
        let h = s["height"].as_f64().unwrap();
        let at_one = jumps.iter().filter(|&&j| j <= t).count() % 2 == 1;
        if at_one {
            assert_eq!(s["side"], "far");
            assert!(h <= 0.99);
        } else {
            assert_eq!(s["side"], "spiking");
            assert!(h >= 0.01);
        }
    }
}

#[test]
fn preset_list() {
    let out = spikes().arg("presets").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "fig5") && text.lines().any(|l| l == "sweep-alpha"));
}
