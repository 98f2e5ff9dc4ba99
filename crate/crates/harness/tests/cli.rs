use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn skitter(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skitter"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

const SCENARIO: &str = r#"
ambient_c = 25.0

[arena]
width_m = 4.8
height_m = 6.6

[[sources]]
kind = "human"
x = 2.4
y = 4.0
radius_m = 0.25
surface_temp_c = 33.0

[mission]
budget_s = 240.0
start_x_m = 2.4
start_y_m = 1.0
"#;

#[test]
fn explore_artifacts_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("spec.toml"),
        "duration_s = 120.0\ncheckpoint_s = 60.0\ntrials = 1\n",
    );
    for out in ["a", "b"] {
        let o = skitter(
            dir.path(),
            &["explore", "--config", "spec.toml", "--out", out],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let stdout = String::from_utf8_lossy(&o.stdout);
        assert!(stdout.contains("levy"), "{stdout}");
        assert!(stdout.contains("wrote"), "{stdout}");
    }
    for name in ["summary.json", "coverage.svg", "trajectories.svg", "config.toml"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    assert!(dir.path().join("a/trials/trial_000.json").exists());
}

#[test]
fn mission_subcommand_runs_a_scenario() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("scenario.toml"), SCENARIO);
    let o = skitter(
        dir.path(),
        &["mission", "--config", "scenario.toml", "--seed", "7", "--out", "m"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("outcome"), "{stdout}");
    let artifact: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m/mission.json")).unwrap())
            .unwrap();
    assert_eq!(artifact["kind"], "full_mission");
    assert_eq!(artifact["seed"], 7);
    assert!(dir.path().join("m/trajectory.svg").exists());
}

#[test]
fn render_then_detect_finds_the_source() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("scenario.toml"), SCENARIO);
    let o = skitter(
        dir.path(),
        &[
            "render-ir",
            "--config",
            "scenario.toml",
            "--x",
            "2.4",
            "--y",
            "3.0",
            "--yaw",
            "90",
            "--out",
            "r",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("r/frame.pgm").exists());

    let o = skitter(dir.path(), &["blob-detect", "--input", "r/frame.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let parsed: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&o.stdout)).unwrap();
    let blob = &parsed["blob"];
    assert!(blob.is_object(), "expected a detection, got {parsed}");
    let (u, v) = (blob["u"].as_u64().unwrap(), blob["v"].as_u64().unwrap());
    assert!((1..=32).contains(&u) && (1..=32).contains(&v));
}

#[test]
fn thermal_nav_smoke() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("spec.toml"), "budget_s = 240.0\n");
    let o = skitter(
        dir.path(),
        &[
            "thermal-nav",
            "--config",
            "spec.toml",
            "--nav",
            "tracking",
            "--trials",
            "2",
            "--out",
            "t",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("success"));
    assert!(dir.path().join("t/summary.json").exists());
    assert!(dir.path().join("t/trajectories.svg").exists());
}

#[test]
fn plot_redraws_from_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("spec.toml"),
        "duration_s = 60.0\ncheckpoint_s = 30.0\ntrials = 1\n",
    );
    let o = skitter(
        dir.path(),
        &["explore", "--config", "spec.toml", "--out", "e"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = skitter(
        dir.path(),
        &["plot", "--summary", "e/summary.json", "--out", "p"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(dir.path().join("e/coverage.svg")).unwrap(),
        fs::read(dir.path().join("p/coverage.svg")).unwrap()
    );
}

#[test]
fn replay_without_reference_reports_no_error_columns() {
    use skitter_core::imu::{synth_gait, write_samples_csv, PathSample, GAIN_SEED};
    use skitter_core::rng::rng_from_seed;

    let dir = tempfile::tempdir().unwrap();
    let path: Vec<PathSample> = (0..500)
        .map(|k| PathSample {
            t_s: k as f64 * 0.01,
            x: 0.0,
            y: 0.0,
            z: 0.0,
            yaw_deg: 0.0,
            pitch_deg: 0.0,
            speed_mps: 0.05,
        })
        .collect();
    let samples = synth_gait(&path, 6.0, GAIN_SEED, &mut rng_from_seed(5));
    let mut buf = Vec::new();
    write_samples_csv(&samples, &mut buf).unwrap();
    fs::write(dir.path().join("samples.csv"), buf).unwrap();

    let o = skitter(
        dir.path(),
        &["imu-replay", "--input", "samples.csv", "--out", "rp"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("no reference"));
    assert!(dir.path().join("rp/positions.csv").exists());
    assert!(dir.path().join("rp/report.json").exists());
    assert!(!dir.path().join("rp/error.svg").exists());
}

#[test]
fn failures_emit_machine_readable_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = skitter(dir.path(), &["blob-detect", "--input", "missing.csv"]);
    assert!(!o.status.success());
    let err: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&o.stderr)).unwrap();
    assert!(err["error"].is_string());

    let o = skitter(dir.path(), &["mission"]);
    assert!(!o.status.success());
    let err: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&o.stderr)).unwrap();
    assert!(err["error"].as_str().unwrap().contains("--config"));
}
