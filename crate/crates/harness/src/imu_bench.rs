//! Dead-reckoning benchmark on synthetic meandering walks, and the
//! file-based replay evaluation for recorded IMU tracks.

use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use skitter_core::imu::{
    calibrate_gain, error_series, read_samples_csv_path, read_track_csv_path, synth_gait,
    write_track_csv, CalibrationMode, DeadReckonState, ErrorPoint, ImuError, ImuSample,
    PathSample, SpeedEstimator, TrackMode, TrackPoint, GAIN_SEED, IMU_RATE_HZ,
};
use skitter_core::num::SampleScalar;
use skitter_core::rng::rng_from_seed;
use skitter_core::SimRng;

use crate::stats;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid bench spec: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Imu(#[from] ImuError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeadReckonSpec {
    pub trials: usize,
    pub base_seed: u64,
    /// Length of the benchmark walk, seconds.
    pub duration_s: f64,
    pub speed_mps: f64,
    pub gait_freq_hz: f64,
    /// The walk resamples its turn rate from N(0, sd) at this interval.
    pub turn_sd_deg_s: f64,
    pub turn_hold_s: f64,
    /// Straight-line segment used to calibrate the speed gain, seconds.
    pub calib_duration_s: f64,
    /// Incline of the walking plane for the spatial benchmark, degrees.
    pub slope_deg: f64,
    /// True gain is drawn per trial from this range so calibration from the
    /// seed value is actually exercised.
    pub gain_true_range: [f64; 2],
    /// Error checkpoint spacing, seconds.
    pub checkpoint_s: f64,
}

impl Default for DeadReckonSpec {
    fn default() -> Self {
        DeadReckonSpec {
            trials: 20,
            base_seed: 1,
            duration_s: 300.0,
            speed_mps: 0.05,
            gait_freq_hz: 6.0,
            turn_sd_deg_s: 10.0,
            turn_hold_s: 2.0,
            calib_duration_s: 60.0,
            slope_deg: 7.9,
            gain_true_range: [2.4, 4.6],
            checkpoint_s: 1.0,
        }
    }
}

impl DeadReckonSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.trials == 0 {
            return Err(BenchError::BadSpec("trials must be >= 1".into()));
        }
        for (name, v) in [
            ("duration_s", self.duration_s),
            ("speed_mps", self.speed_mps),
            ("gait_freq_hz", self.gait_freq_hz),
            ("turn_hold_s", self.turn_hold_s),
            ("calib_duration_s", self.calib_duration_s),
            ("checkpoint_s", self.checkpoint_s),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(BenchError::BadSpec(format!("{name} must be positive")));
            }
        }
        if !(self.turn_sd_deg_s >= 0.0) || !(self.slope_deg >= 0.0) {
            return Err(BenchError::BadSpec("rates must be nonnegative".into()));
        }
        let [lo, hi] = self.gain_true_range;
        if !(lo > 0.0 && hi >= lo) {
            return Err(BenchError::BadSpec("bad gain_true_range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTrial {
    pub mode: TrackMode,
    pub seed: u64,
    pub gain_true: f64,
    pub gain_calibrated: f64,
    pub traveled_m: f64,
    pub final_error_m: f64,
    pub final_error_pct: f64,
    pub errors: Vec<ErrorPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeStats {
    pub trials: usize,
    pub mean_final_error_m: f64,
    pub max_final_error_m: f64,
    pub mean_final_error_pct: f64,
    pub max_final_error_pct: f64,
    pub mean_traveled_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeadReckonSummary {
    /// Artifact discriminator for the plot command.
    pub kind: String,
    pub spec: DeadReckonSpec,
    pub planar: ModeStats,
    pub spatial: ModeStats,
    pub trials: Vec<BenchTrial>,
}

/// Build the reference walk at the IMU rate: constant speed, turn rate held
/// for `turn_hold_s` between Gaussian resamples. On the inclined plane the
/// body pitch follows the heading's uphill component (+y is uphill).
fn wander_path(spec: &DeadReckonSpec, slope_deg: f64, start_yaw_deg: f64, rng: &mut SimRng) -> Vec<PathSample> {
    let dt = 1.0 / IMU_RATE_HZ;
    let n = (spec.duration_s * IMU_RATE_HZ).round() as usize;
    let hold = (spec.turn_hold_s * IMU_RATE_HZ).round().max(1.0) as usize;
    let tan_slope = slope_deg.to_radians().tan();

    let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
    let mut yaw = start_yaw_deg;
    let mut omega = 0.0;
    let mut path = Vec::with_capacity(n);
    for k in 0..n {
        if k % hold == 0 {
            omega = f64::normal(rng, 0.0, spec.turn_sd_deg_s);
        }
        let pitch = (tan_slope * yaw.to_radians().sin()).atan().to_degrees();
        path.push(PathSample {
            t_s: k as f64 * dt,
            x,
            y,
            z,
            yaw_deg: yaw,
            pitch_deg: pitch,
            speed_mps: spec.speed_mps,
        });
        let (pc, ps) = (pitch.to_radians().cos(), pitch.to_radians().sin());
        x += spec.speed_mps * pc * yaw.to_radians().cos() * dt;
        y += spec.speed_mps * pc * yaw.to_radians().sin() * dt;
        z += spec.speed_mps * ps * dt;
        yaw += omega * dt;
    }
    path
}

/// Integrate IMU samples into a full-rate track from `origin`. Returns one
/// point per sample; the first sample only primes the estimator window.
pub fn dead_reckon_track(
    samples: &[ImuSample],
    gain: f64,
    mode: TrackMode,
    origin: [f64; 3],
) -> Vec<(TrackPoint, f64)> {
    let mut est = SpeedEstimator::new(gain);
    let mut state = DeadReckonState::at(origin[0], origin[1], origin[2]);
    let mut track = Vec::with_capacity(samples.len());
    let mut last_t: Option<f64> = None;
    for s in samples {
        let v = est.push(*s);
        if let Some(lt) = last_t {
            state.integrate(v, &s.orientation, s.t_s - lt, mode);
        }
        last_t = Some(s.t_s);
        track.push((
            TrackPoint {
                t_s: s.t_s,
                x: state.x,
                y: state.y,
                z: state.z,
            },
            state.traveled_m,
        ));
    }
    track
}

fn measured_distance(samples: &[ImuSample], gain: f64, mode: TrackMode) -> f64 {
    dead_reckon_track(samples, gain, mode, [0.0; 3])
        .last()
        .map_or(0.0, |(_, traveled)| *traveled)
}

/// One seeded benchmark trial: calibrate the gain on a straight segment,
/// then dead-reckon a fresh meandering walk and score it against the truth.
pub fn run_bench_trial(spec: &DeadReckonSpec, mode: TrackMode, seed: u64) -> BenchTrial {
    let mut rng = rng_from_seed(seed);
    let [lo, hi] = spec.gain_true_range;
    let gain_true = if hi > lo { rng.gen_range(lo..hi) } else { lo };

    let calib_path = wander_path(
        &DeadReckonSpec {
            duration_s: spec.calib_duration_s,
            turn_sd_deg_s: 0.0,
            ..spec.clone()
        },
        0.0,
        0.0,
        &mut rng,
    );
    let calib_samples = synth_gait(&calib_path, spec.gait_freq_hz, gain_true, &mut rng);
    let measured = measured_distance(&calib_samples, GAIN_SEED, TrackMode::Planar);
    let actual = spec.speed_mps * spec.calib_duration_s;
    let gain = calibrate_gain(measured, actual, GAIN_SEED, CalibrationMode::InverseRatio)
        .expect("positive distances");

    let slope = match mode {
        TrackMode::Planar => 0.0,
        TrackMode::Spatial => spec.slope_deg,
    };
    // The spatial walk starts facing uphill so the incline is actually felt.
    let start_yaw = match mode {
        TrackMode::Planar => 0.0,
        TrackMode::Spatial => 90.0,
    };
    let path = wander_path(spec, slope, start_yaw, &mut rng);
    let samples = synth_gait(&path, spec.gait_freq_hz, gain_true, &mut rng);
    let estimated = dead_reckon_track(&samples, gain, mode, [0.0; 3]);
    let est_points: Vec<TrackPoint> = estimated.iter().map(|(p, _)| *p).collect();

    let stride = (spec.checkpoint_s * IMU_RATE_HZ).round().max(1.0) as usize;
    let mut reference: Vec<TrackPoint> = path
        .iter()
        .step_by(stride)
        .map(|p| TrackPoint {
            t_s: p.t_s,
            x: p.x,
            y: p.y,
            z: p.z,
        })
        .collect();
    if path.len() % stride != 1 {
        let p = path.last().expect("nonempty path");
        reference.push(TrackPoint {
            t_s: p.t_s,
            x: p.x,
            y: p.y,
            z: p.z,
        });
    }

    let errors = error_series(&est_points, &reference, 0.5 / IMU_RATE_HZ);
    let last = errors.last().expect("checkpoints exist");
    BenchTrial {
        mode,
        seed,
        gain_true,
        gain_calibrated: gain,
        traveled_m: last.traveled_m,
        final_error_m: last.error_m,
        final_error_pct: last.error_pct,
        errors,
    }
}

fn mode_stats(trials: &[BenchTrial], mode: TrackMode) -> ModeStats {
    let mine: Vec<&BenchTrial> = trials.iter().filter(|t| t.mode == mode).collect();
    let errs: Vec<f64> = mine.iter().map(|t| t.final_error_m).collect();
    let pcts: Vec<f64> = mine.iter().map(|t| t.final_error_pct).collect();
    let traveled: Vec<f64> = mine.iter().map(|t| t.traveled_m).collect();
    ModeStats {
        trials: mine.len(),
        mean_final_error_m: stats::mean(&errs).unwrap_or(0.0),
        max_final_error_m: errs.iter().cloned().fold(0.0, f64::max),
        mean_final_error_pct: stats::mean(&pcts).unwrap_or(0.0),
        max_final_error_pct: pcts.iter().cloned().fold(0.0, f64::max),
        mean_traveled_m: stats::mean(&traveled).unwrap_or(0.0),
    }
}

/// Aggregate per-trial records; pure so results can be re-derived from the
/// stored records at any time.
pub fn summarize(spec: &DeadReckonSpec, trials: &[BenchTrial]) -> DeadReckonSummary {
    DeadReckonSummary {
        kind: "imu_bench".to_string(),
        spec: spec.clone(),
        planar: mode_stats(trials, TrackMode::Planar),
        spatial: mode_stats(trials, TrackMode::Spatial),
        trials: trials.to_vec(),
    }
}

/// Run the planar and spatial benches for `spec.trials` seeds each, in
/// parallel, merging in job order for reproducibility.
pub fn run_dead_reckon_bench(spec: &DeadReckonSpec) -> Result<DeadReckonSummary, BenchError> {
    spec.validate()?;
    let jobs: Vec<(TrackMode, u64)> = [TrackMode::Planar, TrackMode::Spatial]
        .iter()
        .enumerate()
        .flat_map(|(g, &m)| {
            let base = spec.base_seed + (g * spec.trials) as u64;
            (0..spec.trials).map(move |i| (m, base + i as u64))
        })
        .collect();
    let trials: Vec<BenchTrial> = jobs
        .par_iter()
        .map(|&(mode, seed)| run_bench_trial(spec, mode, seed))
        .collect();
    let summary = summarize(spec, &trials);
    // Aggregates must be recomputable from the stored per-trial records.
    let stored: Vec<BenchTrial> =
        serde_json::from_str(&serde_json::to_string(&trials).expect("serializable"))
            .expect("round trip");
    let recomputed = summarize(spec, &stored);
    assert_eq!(
        serde_json::to_string(&summary).expect("serializable"),
        serde_json::to_string(&recomputed).expect("serializable"),
        "summary must be recomputable from per-trial records"
    );
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    /// Artifact discriminator for the plot command.
    pub kind: String,
    pub gain: f64,
    pub mode: TrackMode,
    pub sample_count: usize,
    pub reference_count: usize,
    /// Dead-reckoned odometer distance, meters.
    pub traveled_m: f64,
    pub final_error_m: Option<f64>,
    pub final_error_pct: Option<f64>,
    pub errors: Vec<ErrorPoint>,
}

/// Replay a recorded IMU CSV through the estimator and integrator, write the
/// dead-reckoned track to `<out_dir>/positions.csv`, and score it against an
/// optional reference track. Reference rows with blank coordinates (tracking
/// dropouts) are skipped by the reader.
pub fn run_imu_replay(
    input: &Path,
    reference: Option<&Path>,
    gain: f64,
    mode: TrackMode,
    out_dir: &Path,
) -> Result<ReplayReport, BenchError> {
    if !(gain > 0.0) || !gain.is_finite() {
        return Err(BenchError::BadSpec("gain must be positive".into()));
    }
    let samples: Vec<ImuSample> = read_samples_csv_path(input)?;
    if samples.is_empty() {
        return Err(BenchError::BadSpec(format!(
            "no samples in {}",
            input.display()
        )));
    }
    let track = dead_reckon_track(&samples, gain, mode, [0.0; 3]);
    fs::create_dir_all(out_dir)?;
    let mut out = fs::File::create(out_dir.join("positions.csv"))?;
    write_track_csv(&track, &mut out)?;

    let (errors, reference_count) = match reference {
        Some(path) => {
            let reference: Vec<TrackPoint> = read_track_csv_path(path)?;
            let est_points: Vec<TrackPoint> = track.iter().map(|(p, _)| *p).collect();
            (
                error_series(&est_points, &reference, 0.5 / IMU_RATE_HZ),
                reference.len(),
            )
        }
        None => (Vec::new(), 0),
    };
    let last = errors.last();
    Ok(ReplayReport {
        kind: "imu_replay".to_string(),
        gain,
        mode,
        sample_count: samples.len(),
        reference_count,
        traveled_m: track.last().map_or(0.0, |(_, d)| *d),
        final_error_m: last.map(|e| e.error_m),
        final_error_pct: last.map(|e| e.error_pct),
        errors,
    })
}
