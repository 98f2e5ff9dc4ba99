//! Artifact layout for study runs: each run gets its own directory holding
//! a config snapshot, per-trial records, the summary, and rendered plots,
//! so results stay diff-able and recomputable.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use skitter_core::imu::TrackMode;
use skitter_core::mission::{MissionConfig, MissionReport};
use skitter_core::world::World;

use crate::explore_study::ExploreSummary;
use crate::imu_bench::{DeadReckonSummary, ReplayReport};
use crate::svg::{self, PlotError, TrajectoryScene};
use crate::thermal_study::ThermalSummary;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config snapshot error: {0}")]
    Toml(#[from] toml::ser::Error),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error("unknown artifact kind {0:?}")]
    UnknownKind(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ArtifactError + '_ {
    move |source| ArtifactError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), ArtifactError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(path))?;
    }
    fs::write(path, bytes).map_err(io_err(path))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ArtifactError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_bytes(path, s.as_bytes())
}

pub fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<(), ArtifactError> {
    write_bytes(path, toml::to_string_pretty(value)?.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ArtifactError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}

fn write_trials<T: Serialize>(
    dir: &Path,
    trials: &[T],
    written: &mut Vec<PathBuf>,
) -> Result<(), ArtifactError> {
    for (i, t) in trials.iter().enumerate() {
        let path = dir.join("trials").join(format!("trial_{i:03}.json"));
        write_json(&path, t)?;
        written.push(path);
    }
    Ok(())
}

fn add_file(
    written: &mut Vec<PathBuf>,
    path: PathBuf,
    contents: &str,
) -> Result<(), ArtifactError> {
    write_bytes(&path, contents.as_bytes())?;
    written.push(path);
    Ok(())
}

pub fn write_explore_study(
    dir: &Path,
    summary: &ExploreSummary,
) -> Result<Vec<PathBuf>, ArtifactError> {
    let mut written = Vec::new();
    let config = dir.join("config.toml");
    write_toml(&config, &summary.spec)?;
    written.push(config);
    write_trials(dir, &summary.trials, &mut written)?;
    let path = dir.join("summary.json");
    write_json(&path, summary)?;
    written.push(path);
    add_file(&mut written, dir.join("coverage.svg"), &svg::coverage_plot(summary)?)?;
    add_file(
        &mut written,
        dir.join("trajectories.svg"),
        &svg::explore_trajectories(summary)?,
    )?;
    Ok(written)
}

pub fn write_thermal_study(
    dir: &Path,
    summary: &ThermalSummary,
) -> Result<Vec<PathBuf>, ArtifactError> {
    let mut written = Vec::new();
    let config = dir.join("config.toml");
    write_toml(&config, &summary.spec)?;
    written.push(config);
    write_trials(dir, &summary.trials, &mut written)?;
    let path = dir.join("summary.json");
    write_json(&path, summary)?;
    written.push(path);
    add_file(
        &mut written,
        dir.join("trajectories.svg"),
        &svg::thermal_trajectories(summary)?,
    )?;
    Ok(written)
}

pub fn write_imu_bench(
    dir: &Path,
    summary: &DeadReckonSummary,
) -> Result<Vec<PathBuf>, ArtifactError> {
    let mut written = Vec::new();
    let config = dir.join("config.toml");
    write_toml(&config, &summary.spec)?;
    written.push(config);
    write_trials(dir, &summary.trials, &mut written)?;
    let path = dir.join("summary.json");
    write_json(&path, summary)?;
    written.push(path);
    add_file(
        &mut written,
        dir.join("error_planar.svg"),
        &svg::bench_error_plot(summary, TrackMode::Planar)?,
    )?;
    add_file(
        &mut written,
        dir.join("error_spatial.svg"),
        &svg::bench_error_plot(summary, TrackMode::Spatial)?,
    )?;
    Ok(written)
}

/// Replay artifacts; the error plot is only rendered when a reference track
/// produced checkpoints.
pub fn write_replay(dir: &Path, report: &ReplayReport) -> Result<Vec<PathBuf>, ArtifactError> {
    let mut written = Vec::new();
    let path = dir.join("report.json");
    write_json(&path, report)?;
    written.push(path);
    if !report.errors.is_empty() {
        add_file(&mut written, dir.join("error.svg"), &svg::replay_error_plot(report)?)?;
    }
    Ok(written)
}

/// A single mission run bundled with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionArtifact {
    /// Artifact discriminator for the plot command.
    pub kind: String,
    pub seed: u64,
    pub config: MissionConfig,
    pub world: World,
    pub report: MissionReport,
}

impl MissionArtifact {
    pub fn new(seed: u64, config: MissionConfig, world: World, report: MissionReport) -> Self {
        MissionArtifact {
            kind: "full_mission".to_string(),
            seed,
            config,
            world,
            report,
        }
    }
}

fn mission_scene(artifact: &MissionArtifact) -> TrajectoryScene {
    TrajectoryScene {
        title: format!("Mission trajectory (seed {})", artifact.seed),
        width_m: artifact.world.arena.width_m,
        height_m: artifact.world.arena.height_m,
        paths: vec![artifact
            .report
            .trajectory
            .iter()
            .map(|p| [p.x_m, p.y_m])
            .collect()],
        dashed_paths: vec![artifact
            .report
            .dr_trajectory
            .iter()
            .map(|p| [p.x_m, p.y_m])
            .collect()],
        arrivals: artifact
            .report
            .arrivals
            .iter()
            .map(|a| [a.x_m, a.y_m])
            .collect(),
        markers: artifact
            .world
            .sources
            .iter()
            .map(|s| [s.x, s.y, s.radius_m])
            .collect(),
    }
}

pub fn write_mission(
    dir: &Path,
    artifact: &MissionArtifact,
) -> Result<Vec<PathBuf>, ArtifactError> {
    let mut written = Vec::new();
    let path = dir.join("mission.json");
    write_json(&path, artifact)?;
    written.push(path);
    add_file(
        &mut written,
        dir.join("trajectory.svg"),
        &svg::trajectory_plot(&mission_scene(artifact))?,
    )?;
    Ok(written)
}

/// Re-render the plots for a stored summary, dispatching on its `kind`.
pub fn emit_plots(summary_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, ArtifactError> {
    let value: serde_json::Value = read_json(summary_path)?;
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .unwrap_or("")
        .to_string();
    let mut written = Vec::new();
    match kind.as_str() {
        "exploration" => {
            let summary: ExploreSummary = serde_json::from_value(value)?;
            add_file(&mut written, out_dir.join("coverage.svg"), &svg::coverage_plot(&summary)?)?;
            add_file(
                &mut written,
                out_dir.join("trajectories.svg"),
                &svg::explore_trajectories(&summary)?,
            )?;
        }
        "thermal_nav" => {
            let summary: ThermalSummary = serde_json::from_value(value)?;
            add_file(
                &mut written,
                out_dir.join("trajectories.svg"),
                &svg::thermal_trajectories(&summary)?,
            )?;
        }
        "imu_bench" => {
            let summary: DeadReckonSummary = serde_json::from_value(value)?;
            add_file(
                &mut written,
                out_dir.join("error_planar.svg"),
                &svg::bench_error_plot(&summary, TrackMode::Planar)?,
            )?;
            add_file(
                &mut written,
                out_dir.join("error_spatial.svg"),
                &svg::bench_error_plot(&summary, TrackMode::Spatial)?,
            )?;
        }
        "imu_replay" => {
            let report: ReplayReport = serde_json::from_value(value)?;
            add_file(&mut written, out_dir.join("error.svg"), &svg::replay_error_plot(&report)?)?;
        }
        "full_mission" => {
            let artifact: MissionArtifact = serde_json::from_value(value)?;
            add_file(
                &mut written,
                out_dir.join("trajectory.svg"),
                &svg::trajectory_plot(&mission_scene(&artifact))?,
            )?;
        }
        other => return Err(ArtifactError::UnknownKind(other.to_string())),
    }
    Ok(written)
}
