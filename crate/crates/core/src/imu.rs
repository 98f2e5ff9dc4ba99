//! Gait-adaptive dead reckoning: body-shake acceleration synthesis, speed
//! estimation from windowed acceleration variance, heading integration, and
//! gain calibration against a reference distance.
//!
//! Speed follows `V = K * Var(acc)` where `Var` is the sum of the three
//! per-axis sample variances over a trailing 0.5 s window. The synthesizer
//! inverts that contract: it emits an oscillation at the gait frequency
//! whose windowed variance equals `v / K`, so estimation round-trips.

use std::collections::VecDeque;
use std::io::{Read, Write as IoWrite};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angles::deg_to_rad;
use crate::num::{cst, SampleScalar, Scalar};

/// Starting gain before any calibration, m/s per (m/s^2)^2.
pub const GAIN_SEED: f64 = 3.5;
/// Default variance window, seconds.
pub const SPEED_WINDOW_S: f64 = 0.5;
/// Nominal IMU sample rate, Hz.
pub const IMU_RATE_HZ: f64 = 100.0;
/// Default white-noise floor per acceleration axis, m/s^2.
pub const ACC_NOISE_SD: f64 = 0.005;

#[derive(Debug, Error)]
pub enum ImuError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("distances must be positive, got measured {measured} / actual {actual}")]
    NonPositiveDistance { measured: f64, actual: f64 },
}

/// Unit quaternion, scalar-first, mapping body frame to world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quat<T: Scalar = f64> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Quat<T> {
    pub fn identity() -> Self {
        Quat {
            w: T::one(),
            x: T::zero(),
            y: T::zero(),
            z: T::zero(),
        }
    }

    /// World-from-body rotation for a heading `yaw_deg` (about +z) and an
    /// upward pitch `pitch_deg` (nose up positive).
    pub fn from_yaw_pitch(yaw_deg: T, pitch_deg: T) -> Self {
        let half_yaw = deg_to_rad(yaw_deg) / cst(2.0);
        let half_pitch = deg_to_rad(-pitch_deg) / cst(2.0);
        let qz = Quat {
            w: half_yaw.cos(),
            x: T::zero(),
            y: T::zero(),
            z: half_yaw.sin(),
        };
        let qy = Quat {
            w: half_pitch.cos(),
            x: T::zero(),
            y: half_pitch.sin(),
            z: T::zero(),
        };
        qz.mul(&qy)
    }

    pub fn mul(&self, rhs: &Quat<T>) -> Quat<T> {
        Quat {
            w: self.w * rhs.w - self.x * rhs.x - self.y * rhs.y - self.z * rhs.z,
            x: self.w * rhs.x + self.x * rhs.w + self.y * rhs.z - self.z * rhs.y,
            y: self.w * rhs.y - self.x * rhs.z + self.y * rhs.w + self.z * rhs.x,
            z: self.w * rhs.z + self.x * rhs.y - self.y * rhs.x + self.z * rhs.w,
        }
    }

    pub fn norm(&self) -> T {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(&self) -> Quat<T> {
        let n = self.norm();
        Quat {
            w: self.w / n,
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        }
    }

    /// Rotate a vector from body to world frame. Assumes unit norm.
    pub fn rotate(&self, v: [T; 3]) -> [T; 3] {
        let u = [self.x, self.y, self.z];
        let two: T = cst(2.0);
        let cross = |a: [T; 3], b: [T; 3]| {
            [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ]
        };
        let uv = cross(u, v);
        let uuv = cross(u, uv);
        [
            v[0] + two * (self.w * uv[0] + uuv[0]),
            v[1] + two * (self.w * uv[1] + uuv[1]),
            v[2] + two * (self.w * uv[2] + uuv[2]),
        ]
    }

    /// Body-forward axis expressed in the world frame.
    pub fn forward(&self) -> [T; 3] {
        self.rotate([T::one(), T::zero(), T::zero()])
    }
}

/// One gravity-subtracted IMU reading with its fused orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuSample<T: Scalar = f64> {
    pub t_s: T,
    pub acc: [T; 3],
    pub orientation: Quat<T>,
}

fn window_variance_sum<T: Scalar>(samples: &VecDeque<ImuSample<T>>) -> T {
    let n = samples.len();
    debug_assert!(n >= 2);
    let count = cst::<T>(n as f64);
    let mut mean = [T::zero(); 3];
    for s in samples {
        for a in 0..3 {
            mean[a] += s.acc[a];
        }
    }
    for m in &mut mean {
        *m /= count;
    }
    let mut sum_sq = T::zero();
    for s in samples {
        for a in 0..3 {
            let d = s.acc[a] - mean[a];
            sum_sq += d * d;
        }
    }
    sum_sq / (count - T::one())
}

/// Converts windowed acceleration variance into linear speed.
#[derive(Debug, Clone)]
pub struct SpeedEstimator<T: Scalar = f64> {
    pub gain: T,
    pub window_s: T,
    buf: VecDeque<ImuSample<T>>,
}

impl<T: Scalar> SpeedEstimator<T> {
    pub fn new(gain: T) -> Self {
        SpeedEstimator {
            gain,
            window_s: cst(SPEED_WINDOW_S),
            buf: VecDeque::new(),
        }
    }

    pub fn with_window(gain: T, window_s: T) -> Self {
        SpeedEstimator {
            gain,
            window_s,
            buf: VecDeque::new(),
        }
    }

    /// True once the window holds enough samples for a variance.
    pub fn warmed_up(&self) -> bool {
        self.buf.len() >= 2
    }

    /// Current speed estimate from the trailing window, m/s.
    pub fn speed(&self) -> T {
        if !self.warmed_up() {
            return T::zero();
        }
        (self.gain * window_variance_sum(&self.buf)).max(T::zero())
    }

    /// Feed one sample and return the updated speed estimate.
    pub fn push(&mut self, sample: ImuSample<T>) -> T {
        if let Some(last) = self.buf.back() {
            debug_assert!(sample.t_s > last.t_s, "samples must be time-ordered");
        }
        let cutoff = sample.t_s - self.window_s;
        while self.buf.front().map_or(false, |s| s.t_s <= cutoff) {
            self.buf.pop_front();
        }
        self.buf.push_back(sample);
        self.speed()
    }

    pub fn reset(&mut self) {
        self.buf.clear();
    }
}

/// Whether integration moves in the plane only or also along z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackMode {
    Planar,
    Spatial,
}

/// Integrated position plus odometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeadReckonState<T: Scalar = f64> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub traveled_m: T,
    /// Count of orientation inputs whose norm strayed beyond 1e-3 from unit.
    pub renorm_flags: usize,
}

impl<T: Scalar> DeadReckonState<T> {
    pub fn at(x: T, y: T, z: T) -> Self {
        DeadReckonState {
            x,
            y,
            z,
            traveled_m: T::zero(),
            renorm_flags: 0,
        }
    }

    /// Advance by one step: velocity is the speed along the orientation's
    /// forward axis. Planar mode uses the forward vector's x and y
    /// components as they are and leaves z untouched.
    pub fn integrate(&mut self, speed_mps: T, orientation: &Quat<T>, dt_s: T, mode: TrackMode) {
        debug_assert!(dt_s > T::zero());
        let speed = speed_mps.max(T::zero());
        let mut q = *orientation;
        if (q.norm() - T::one()).abs() > cst(1e-3) {
            self.renorm_flags += 1;
        }
        q = q.normalized();
        let f = q.forward();
        self.x += speed * f[0] * dt_s;
        self.y += speed * f[1] * dt_s;
        if mode == TrackMode::Spatial {
            self.z += speed * f[2] * dt_s;
        }
        self.traveled_m += speed * dt_s;
    }
}

/// One pose of a reference walk, sampled at the IMU rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample<T: Scalar = f64> {
    pub t_s: T,
    pub x: T,
    pub y: T,
    pub z: T,
    pub yaw_deg: T,
    pub pitch_deg: T,
    pub speed_mps: T,
}

/// Streaming gait-acceleration synthesizer. Emits a quadrature oscillation
/// at the gait frequency scaled so the estimator's windowed variance equals
/// `speed / gain_true`, plus white noise on all axes.
#[derive(Debug, Clone)]
pub struct GaitSynth<T: Scalar = f64> {
    pub gain_true: T,
    pub gait_freq_hz: T,
    pub noise_sd: T,
    pub window_s: T,
    pub rate_hz: T,
    phase_rad: T,
    last_t: Option<T>,
}

impl<T: Scalar> GaitSynth<T> {
    pub fn new(gain_true: T, gait_freq_hz: T) -> Self {
        GaitSynth {
            gain_true,
            gait_freq_hz,
            noise_sd: cst(ACC_NOISE_SD),
            window_s: cst(SPEED_WINDOW_S),
            rate_hz: cst(IMU_RATE_HZ),
            phase_rad: T::zero(),
            last_t: None,
        }
    }

    fn amplitude(&self, speed: T) -> T
    where
        T: SampleScalar,
    {
        // Over any n consecutive samples the quadrature pair contributes
        // n - n*m^2 to the summed squared deviations, where m is the
        // magnitude of the complex mean of e^{i*phase}; m depends only on
        // the sample spacing, not on where the window starts. White noise
        // adds its own variance on each of the three axes. Solve for A so
        // the windowed total equals speed / gain.
        let n = (self.window_s * self.rate_hz).round();
        let half_step = cst::<T>(std::f64::consts::PI) * self.gait_freq_hz / self.rate_hz;
        let m = (n * half_step).sin() / (n * half_step.sin());
        let pair = (T::one() - m * m).max(cst(1.0e-12));
        let noise_var = cst::<T>(3.0) * self.noise_sd * self.noise_sd;
        let target = (speed / self.gain_true - noise_var).max(T::zero());
        (target * (n - T::one()) / (n * pair)).sqrt()
    }

    /// Emit the sample for time `t_s` given the true instantaneous state.
    pub fn sample<R: Rng + ?Sized>(
        &mut self,
        t_s: T,
        speed_mps: T,
        yaw_deg: T,
        pitch_deg: T,
        rng: &mut R,
    ) -> ImuSample<T>
    where
        T: SampleScalar,
    {
        if let Some(last) = self.last_t {
            let dt = t_s - last;
            debug_assert!(dt > T::zero());
            self.phase_rad += cst::<T>(std::f64::consts::TAU) * self.gait_freq_hz * dt;
        }
        self.last_t = Some(t_s);
        let a = self.amplitude(speed_mps.max(T::zero()));
        let acc = [
            a * self.phase_rad.sin() + T::normal(rng, T::zero(), self.noise_sd),
            T::normal(rng, T::zero(), self.noise_sd),
            a * self.phase_rad.cos() + T::normal(rng, T::zero(), self.noise_sd),
        ];
        ImuSample {
            t_s,
            acc,
            orientation: Quat::from_yaw_pitch(yaw_deg, pitch_deg),
        }
    }
}

/// Render a whole reference walk into IMU samples.
pub fn synth_gait<T: SampleScalar, R: Rng + ?Sized>(
    path: &[PathSample<T>],
    gait_freq_hz: T,
    gain_true: T,
    rng: &mut R,
) -> Vec<ImuSample<T>> {
    let mut synth = GaitSynth::new(gain_true, gait_freq_hz);
    path.iter()
        .map(|p| synth.sample(p.t_s, p.speed_mps, p.yaw_deg, p.pitch_deg, rng))
        .collect()
}

/// How a calibration ratio adjusts the gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMode {
    /// Scale by measured / actual.
    DirectRatio,
    /// Scale by actual / measured, shrinking the gain when the estimator
    /// overshoots. The default.
    InverseRatio,
}

impl Default for CalibrationMode {
    fn default() -> Self {
        CalibrationMode::InverseRatio
    }
}

/// Adjust the speed gain from a measured-vs-reference distance pair.
pub fn calibrate_gain<T: Scalar>(
    measured_m: T,
    actual_m: T,
    gain_current: T,
    mode: CalibrationMode,
) -> Result<T, ImuError> {
    if measured_m <= T::zero() || actual_m <= T::zero() {
        return Err(ImuError::NonPositiveDistance {
            measured: measured_m.to_f64().unwrap_or(f64::NAN),
            actual: actual_m.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(match mode {
        CalibrationMode::DirectRatio => gain_current * measured_m / actual_m,
        CalibrationMode::InverseRatio => gain_current * actual_m / measured_m,
    })
}

/// A timestamped track point for error evaluation and replay output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint<T: Scalar = f64> {
    pub t_s: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

/// Position error against the reference at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorPoint<T: Scalar = f64> {
    pub t_s: T,
    pub traveled_m: T,
    pub error_m: T,
    pub error_pct: T,
}

/// Per-checkpoint Euclidean error of `estimated` against `reference`.
/// Reference points with no estimated sample within `tol_s` are skipped, so
/// gaps in either track are tolerated.
pub fn error_series<T: Scalar>(
    estimated: &[TrackPoint<T>],
    reference: &[TrackPoint<T>],
    tol_s: T,
) -> Vec<ErrorPoint<T>> {
    let mut out = Vec::new();
    let mut traveled = T::zero();
    let mut prev: Option<&TrackPoint<T>> = None;
    for r in reference {
        if let Some(p) = prev {
            let (dx, dy, dz) = (r.x - p.x, r.y - p.y, r.z - p.z);
            traveled += (dx * dx + dy * dy + dz * dz).sqrt();
        }
        prev = Some(r);
        let idx = estimated.partition_point(|e| e.t_s < r.t_s);
        let candidates = [idx.checked_sub(1), Some(idx)];
        let nearest = candidates
            .iter()
            .flatten()
            .filter_map(|&i| estimated.get(i))
            .min_by(|a, b| {
                let da = (a.t_s - r.t_s).abs();
                let db = (b.t_s - r.t_s).abs();
                da.partial_cmp(&db).expect("finite timestamps")
            });
        let e = match nearest {
            Some(e) if (e.t_s - r.t_s).abs() <= tol_s => e,
            _ => continue,
        };
        let (dx, dy, dz) = (e.x - r.x, e.y - r.y, e.z - r.z);
        let error = (dx * dx + dy * dy + dz * dz).sqrt();
        let pct = if traveled > T::zero() {
            error / traveled * cst(100.0)
        } else {
            T::zero()
        };
        out.push(ErrorPoint {
            t_s: r.t_s,
            traveled_m: traveled,
            error_m: error,
            error_pct: pct,
        });
    }
    out
}

const SAMPLE_HEADER: &str = "t,ax,ay,az,qw,qx,qy,qz";

/// Write IMU samples as CSV with columns `t,ax,ay,az,qw,qx,qy,qz`.
pub fn write_samples_csv<T: Scalar, W: IoWrite>(
    samples: &[ImuSample<T>],
    mut out: W,
) -> Result<(), ImuError> {
    writeln!(out, "{SAMPLE_HEADER}")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.t_s,
            s.acc[0],
            s.acc[1],
            s.acc[2],
            s.orientation.w,
            s.orientation.x,
            s.orientation.y,
            s.orientation.z
        )?;
    }
    Ok(())
}

fn parse_field<T: Scalar>(field: &str, line: u64) -> Result<T, ImuError> {
    let v: f64 = field.trim().parse().map_err(|e| ImuError::Parse {
        line,
        msg: format!("bad value {field:?}: {e}"),
    })?;
    Ok(cst(v))
}

/// Read IMU samples from the CSV layout written by [`write_samples_csv`].
pub fn read_samples_csv<T: Scalar, R: Read>(input: R) -> Result<Vec<ImuSample<T>>, ImuError> {
    let mut samples = Vec::new();
    let mut lines = std::io::BufReader::new(input);
    let mut buf = String::new();
    let mut line_no: u64 = 0;
    use std::io::BufRead;
    loop {
        buf.clear();
        if lines.read_line(&mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = buf.trim();
        if line.is_empty() {
            continue;
        }
        if line_no == 1 {
            if line != SAMPLE_HEADER {
                return Err(ImuError::Parse {
                    line: 1,
                    msg: format!("expected header {SAMPLE_HEADER:?}, got {line:?}"),
                });
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(ImuError::Parse {
                line: line_no,
                msg: format!("expected 8 columns, got {}", fields.len()),
            });
        }
        let f = |i: usize| parse_field::<T>(fields[i], line_no);
        samples.push(ImuSample {
            t_s: f(0)?,
            acc: [f(1)?, f(2)?, f(3)?],
            orientation: Quat {
                w: f(4)?,
                x: f(5)?,
                y: f(6)?,
                z: f(7)?,
            },
        });
    }
    Ok(samples)
}

/// Write a track as CSV with columns `t,x,y,z,traveled`.
pub fn write_track_csv<T: Scalar, W: IoWrite>(
    track: &[(TrackPoint<T>, T)],
    mut out: W,
) -> Result<(), ImuError> {
    writeln!(out, "t,x,y,z,traveled")?;
    for (p, traveled) in track {
        writeln!(out, "{},{},{},{},{}", p.t_s, p.x, p.y, p.z, traveled)?;
    }
    Ok(())
}

/// Read a track CSV with columns `t,x,y,z` (extra columns ignored).
pub fn read_track_csv<T: Scalar, R: Read>(input: R) -> Result<Vec<TrackPoint<T>>, ImuError> {
    let mut points = Vec::new();
    let reader = std::io::BufReader::new(input);
    use std::io::BufRead;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx as u64 + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if line_no == 1 {
            if !trimmed.starts_with("t,x,y,z") {
                return Err(ImuError::Parse {
                    line: 1,
                    msg: format!("expected header starting with \"t,x,y,z\", got {trimmed:?}"),
                });
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() < 4 {
            return Err(ImuError::Parse {
                line: line_no,
                msg: format!("expected at least 4 columns, got {}", fields.len()),
            });
        }
        // A row with blank coordinates is a tracking gap, not an error.
        if fields.iter().take(4).any(|f| f.trim().is_empty()) {
            continue;
        }
        points.push(TrackPoint {
            t_s: parse_field(fields[0], line_no)?,
            x: parse_field(fields[1], line_no)?,
            y: parse_field(fields[2], line_no)?,
            z: parse_field(fields[3], line_no)?,
        });
    }
    Ok(points)
}

pub fn read_samples_csv_path<T: Scalar, P: AsRef<Path>>(
    path: P,
) -> Result<Vec<ImuSample<T>>, ImuError> {
    read_samples_csv(std::fs::File::open(path)?)
}

pub fn read_track_csv_path<T: Scalar, P: AsRef<Path>>(
    path: P,
) -> Result<Vec<TrackPoint<T>>, ImuError> {
    read_track_csv(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn push_acc(est: &mut SpeedEstimator, t: f64, acc: [f64; 3]) -> f64 {
        est.push(ImuSample {
            t_s: t,
            acc,
            orientation: Quat::identity(),
        })
    }

    #[test]
    fn quaternion_axes_behave() {
        let q = Quat::<f64>::identity();
        let f = q.forward();
        assert!((f[0] - 1.0).abs() < 1e-15 && f[1].abs() < 1e-15 && f[2].abs() < 1e-15);

        let east_to_north = Quat::<f64>::from_yaw_pitch(90.0, 0.0).forward();
        assert!(east_to_north[0].abs() < 1e-12);
        assert!((east_to_north[1] - 1.0).abs() < 1e-12);

        let up = Quat::<f64>::from_yaw_pitch(0.0, 7.9).forward();
        assert!((up[2] - 7.9f64.to_radians().sin()).abs() < 1e-12);
        assert!((up[0] - 7.9f64.to_radians().cos()).abs() < 1e-12);
        assert!((Quat::<f64>::from_yaw_pitch(33.0, -12.0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_acceleration_means_zero_speed() {
        let mut est = SpeedEstimator::new(3.5);
        let mut v = 0.0;
        for i in 0..50 {
            v = push_acc(&mut est, i as f64 * 0.01, [0.3, -0.2, 9.1]);
        }
        // Only rounding dust from the mean subtraction survives.
        assert!(v.abs() < 1e-18, "speed {v}");
    }

    #[test]
    fn gain_times_variance_is_speed() {
        // Alternating +-d on one axis: variance = 50 d^2 / 49. Pick d so the
        // per-axis variance sum is exactly the constructed value 0.01.
        let d = (0.01f64 * 49.0 / 50.0).sqrt();
        let mut est = SpeedEstimator::new(3.5);
        let mut v = 0.0;
        for i in 0..50 {
            let s = if i % 2 == 0 { d } else { -d };
            v = push_acc(&mut est, i as f64 * 0.01, [s, 0.0, 0.0]);
        }
        assert!((v - 0.035).abs() < 1e-12, "speed {v}");
    }

    #[test]
    fn warm_up_returns_zero_and_is_flagged() {
        let mut est = SpeedEstimator::new(3.5);
        assert!(!est.warmed_up());
        let v = push_acc(&mut est, 0.0, [1.0, 2.0, 3.0]);
        assert_eq!(v, 0.0);
        assert!(!est.warmed_up());
        push_acc(&mut est, 0.01, [0.0, 0.0, 0.0]);
        assert!(est.warmed_up());
    }

    #[test]
    fn adding_a_dyadic_bias_is_bit_exact() {
        // Balanced +-0.5 samples and dyadic offsets keep every intermediate
        // exactly representable, so the two runs must agree to the bit.
        let bias = [0.25, -0.5, 1.0];
        let mut plain = SpeedEstimator::new(3.5);
        let mut biased = SpeedEstimator::new(3.5);
        let mut v0 = 0.0;
        let mut v1 = 0.0;
        for i in 0..50 {
            let s = if i % 2 == 0 { 0.5 } else { -0.5 };
            let acc = [s, -s, s];
            v0 = push_acc(&mut plain, i as f64 * 0.01, acc);
            v1 = push_acc(
                &mut biased,
                i as f64 * 0.01,
                [acc[0] + bias[0], acc[1] + bias[1], acc[2] + bias[2]],
            );
        }
        assert_eq!(v0.to_bits(), v1.to_bits());
        assert!(v0 > 0.0);
    }

    #[test]
    fn adding_any_bias_changes_nothing_measurable() {
        let mut rng = rng_from_seed(500);
        use rand::Rng;
        for _ in 0..20 {
            let bias = [
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-10.0..10.0),
            ];
            let samples: Vec<[f64; 3]> = (0..50)
                .map(|_| {
                    [
                        rng.gen_range(-0.2..0.2),
                        rng.gen_range(-0.2..0.2),
                        rng.gen_range(-0.2..0.2),
                    ]
                })
                .collect();
            let mut plain = SpeedEstimator::new(3.5);
            let mut biased = SpeedEstimator::new(3.5);
            let mut v0 = 0.0;
            let mut v1 = 0.0;
            for (i, acc) in samples.iter().enumerate() {
                v0 = push_acc(&mut plain, i as f64 * 0.01, *acc);
                v1 = push_acc(
                    &mut biased,
                    i as f64 * 0.01,
                    [acc[0] + bias[0], acc[1] + bias[1], acc[2] + bias[2]],
                );
            }
            assert!((v0 - v1).abs() <= 1e-12 * v0.max(1.0), "{v0} vs {v1}");
        }
    }

    #[test]
    fn stationary_gait_sits_at_the_noise_floor() {
        let mut synth = GaitSynth::new(3.5, 6.0);
        let mut est = SpeedEstimator::new(3.5);
        let mut rng = rng_from_seed(501);
        let mut v = 0.0;
        for i in 0..200 {
            let s = synth.sample(i as f64 * 0.01, 0.0, 0.0, 0.0, &mut rng);
            v = est.push(s);
        }
        // Noise floor: 3 sigma^2 = 7.5e-5, times gain 3.5 = 2.6e-4 m/s.
        assert!(v < 1e-3, "stationary speed estimate {v}");
    }

    #[test]
    fn constant_walk_variance_matches_the_contract() {
        for freq in [3.0, 6.0, 9.0] {
            let mut synth = GaitSynth::new(3.5, freq);
            let mut rng = rng_from_seed(502);
            let mut est = SpeedEstimator::new(1.0);
            let mut vars = Vec::new();
            for i in 0..500 {
                let s = synth.sample(i as f64 * 0.01, 0.05, 0.0, 0.0, &mut rng);
                let v = est.push(s);
                if i >= 50 {
                    vars.push(v);
                }
            }
            let mean_var = vars.iter().sum::<f64>() / vars.len() as f64;
            let target = 0.05 / 3.5;
            assert!(
                (mean_var - target).abs() / target < 0.02,
                "freq {freq}: windowed variance {mean_var} vs {target}"
            );
        }
    }

    #[test]
    fn speed_round_trips_through_the_forward_model() {
        for seed in 0..5 {
            let mut synth = GaitSynth::new(3.5, 3.0 + seed as f64);
            let mut est = SpeedEstimator::new(3.5);
            let mut rng = rng_from_seed(510 + seed);
            let mut readings = Vec::new();
            for i in 0..400 {
                let s = synth.sample(i as f64 * 0.01, 0.05, 0.0, 0.0, &mut rng);
                let v = est.push(s);
                if i >= 50 {
                    readings.push(v);
                }
            }
            let mean = readings.iter().sum::<f64>() / readings.len() as f64;
            assert!(
                (mean - 0.05).abs() / 0.05 < 0.05,
                "seed {seed}: recovered {mean}"
            );
        }
    }

    #[test]
    fn spectrum_is_dominated_by_sub_ten_hertz_content() {
        let mut synth = GaitSynth::new(3.5, 6.0);
        let mut rng = rng_from_seed(503);
        let n = 1000;
        let samples: Vec<ImuSample> = (0..n)
            .map(|i| synth.sample(i as f64 * 0.01, 0.06, 0.0, 0.0, &mut rng))
            .collect();
        let mut below = 0.0;
        let mut total = 0.0;
        for axis in 0..3 {
            let mean = samples.iter().map(|s| s.acc[axis]).sum::<f64>() / n as f64;
            let xs: Vec<f64> = samples.iter().map(|s| s.acc[axis] - mean).collect();
            for k in 1..n / 2 {
                let freq = k as f64 * 100.0 / n as f64;
                let (mut re, mut im) = (0.0, 0.0);
                for (i, &x) in xs.iter().enumerate() {
                    let ang = std::f64::consts::TAU * k as f64 * i as f64 / n as f64;
                    re += x * ang.cos();
                    im -= x * ang.sin();
                }
                let power = re * re + im * im;
                total += power;
                if freq < 10.0 {
                    below += power;
                }
            }
        }
        assert!(below / total > 0.8, "low-band fraction {}", below / total);
    }

    #[test]
    fn zero_speed_never_moves() {
        let mut state = DeadReckonState::<f64>::at(1.0, 2.0, 3.0);
        for _ in 0..1000 {
            state.integrate(0.0, &Quat::from_yaw_pitch(45.0, 5.0), 0.01, TrackMode::Spatial);
        }
        assert_eq!((state.x, state.y, state.z), (1.0, 2.0, 3.0));
        assert_eq!(state.traveled_m, 0.0);
    }

    #[test]
    fn straight_line_integration_is_exact() {
        let mut state = DeadReckonState::<f64>::at(0.0, 0.0, 0.0);
        let q = Quat::from_yaw_pitch(0.0, 0.0);
        for _ in 0..1000 {
            state.integrate(0.05, &q, 0.01, TrackMode::Planar);
        }
        assert!((state.x - 0.5).abs() < 1e-9, "x {}", state.x);
        assert!(state.y.abs() < 1e-12);
        assert!((state.traveled_m - 0.5).abs() < 1e-9);
    }

    #[test]
    fn slope_climb_accumulates_height() {
        let mut state = DeadReckonState::<f64>::at(0.0, 0.0, 0.0);
        let q = Quat::from_yaw_pitch(30.0, 7.9);
        for _ in 0..2000 {
            state.integrate(0.05, &q, 0.01, TrackMode::Spatial);
        }
        let expected_z = state.traveled_m * 7.9f64.to_radians().sin();
        assert!((state.z - expected_z).abs() < 1e-9, "z {}", state.z);
        assert!((state.traveled_m - 1.0).abs() < 1e-9);
    }

    #[test]
    fn skewed_quaternions_are_renormalized_and_flagged() {
        let q = Quat::from_yaw_pitch(10.0, 0.0);
        let scaled = Quat {
            w: q.w * 1.01,
            x: q.x * 1.01,
            y: q.y * 1.01,
            z: q.z * 1.01,
        };
        let mut a = DeadReckonState::<f64>::at(0.0, 0.0, 0.0);
        let mut b = DeadReckonState::<f64>::at(0.0, 0.0, 0.0);
        a.integrate(0.05, &q, 0.01, TrackMode::Planar);
        b.integrate(0.05, &scaled, 0.01, TrackMode::Planar);
        assert_eq!(a.renorm_flags, 0);
        assert_eq!(b.renorm_flags, 1);
        assert!((a.x - b.x).abs() < 1e-12 && (a.y - b.y).abs() < 1e-12);
    }

    #[test]
    fn calibration_modes_match_their_ratios() {
        let same = calibrate_gain(1.0, 1.0, 3.5, CalibrationMode::DirectRatio).unwrap();
        assert_eq!(same, 3.5);
        let same = calibrate_gain(1.0, 1.0, 3.5, CalibrationMode::InverseRatio).unwrap();
        assert_eq!(same, 3.5);
        let direct: f64 = calibrate_gain(1.2, 1.0, 3.5, CalibrationMode::DirectRatio).unwrap();
        assert!((direct - 4.2).abs() < 1e-12);
        let inverse: f64 = calibrate_gain(1.2, 1.0, 3.5, CalibrationMode::InverseRatio).unwrap();
        assert!((inverse - 2.9166666666666665).abs() < 1e-12);
        assert!(calibrate_gain(0.0, 1.0, 3.5, CalibrationMode::InverseRatio).is_err());
        assert!(calibrate_gain(1.0, -1.0, 3.5, CalibrationMode::InverseRatio).is_err());
    }

    fn measured_distance(samples: &[ImuSample], gain: f64) -> f64 {
        let mut est = SpeedEstimator::new(gain);
        let mut state = DeadReckonState::<f64>::at(0.0, 0.0, 0.0);
        let mut last_t = None;
        for s in samples {
            let v = est.push(*s);
            if let Some(lt) = last_t {
                state.integrate(v, &s.orientation, s.t_s - lt, TrackMode::Planar);
            }
            last_t = Some(s.t_s);
        }
        state.traveled_m
    }

    #[test]
    fn corrective_calibration_converges_in_one_pass() {
        // Gait generated with a gain of 2.8 but measured with the 3.5 seed:
        // the estimator overshoots, one corrective pass fixes it, and a
        // second pass barely moves.
        let mut rng = rng_from_seed(520);
        let path: Vec<PathSample> = (0..3000)
            .map(|i| PathSample {
                t_s: i as f64 * 0.01,
                x: 0.05 * i as f64 * 0.01,
                y: 0.0,
                z: 0.0,
                yaw_deg: 0.0,
                pitch_deg: 0.0,
                speed_mps: 0.05,
            })
            .collect();
        let samples = synth_gait(&path, 6.0, 2.8, &mut rng);
        let actual = 0.05 * 29.99;

        let measured0 = measured_distance(&samples, GAIN_SEED);
        let k1 = calibrate_gain(measured0, actual, GAIN_SEED, CalibrationMode::InverseRatio)
            .unwrap();
        assert!((k1 - 2.8).abs() / 2.8 < 0.05, "first pass gain {k1}");

        let measured1 = measured_distance(&samples, k1);
        let k2 = calibrate_gain(measured1, actual, k1, CalibrationMode::InverseRatio).unwrap();
        assert!((k2 - k1).abs() / k1 < 0.02, "second pass moved {k1} -> {k2}");
    }

    #[test]
    fn full_round_trip_recovers_the_endpoint() {
        // synth -> estimate -> integrate on a straight walk recovers the
        // endpoint within 3% of path length.
        let mut rng = rng_from_seed(530);
        let speed = 0.06;
        let steps = 20_000;
        let path: Vec<PathSample> = (0..steps)
            .map(|i| PathSample {
                t_s: i as f64 * 0.01,
                x: speed * i as f64 * 0.01,
                y: 0.0,
                z: 0.0,
                yaw_deg: 0.0,
                pitch_deg: 0.0,
                speed_mps: speed,
            })
            .collect();
        let samples = synth_gait(&path, 5.0, 3.5, &mut rng);
        let mut est = SpeedEstimator::new(3.5);
        let mut state = DeadReckonState::<f64>::at(0.0, 0.0, 0.0);
        let mut last_t = None;
        for s in &samples {
            let v = est.push(*s);
            if let Some(lt) = last_t {
                state.integrate(v, &s.orientation, s.t_s - lt, TrackMode::Planar);
            }
            last_t = Some(s.t_s);
        }
        let want = path.last().unwrap();
        let err = ((state.x - want.x).powi(2) + (state.y - want.y).powi(2)).sqrt();
        let length = speed * (steps - 1) as f64 * 0.01;
        assert!(err / length < 0.03, "endpoint error {err} over {length} m");
    }

    #[test]
    fn identical_tracks_have_zero_error() {
        let track: Vec<TrackPoint> = (0..100)
            .map(|i| TrackPoint {
                t_s: i as f64,
                x: i as f64 * 0.1,
                y: 0.0,
                z: 0.0,
            })
            .collect();
        let series = error_series(&track, &track, 0.5);
        assert_eq!(series.len(), 100);
        assert!(series.iter().all(|p| p.error_m == 0.0 && p.error_pct == 0.0));
    }

    #[test]
    fn scale_error_shows_up_as_constant_percentage() {
        let reference: Vec<TrackPoint> = (0..100)
            .map(|i| TrackPoint {
                t_s: i as f64,
                x: i as f64 * 0.1,
                y: 0.0,
                z: 0.0,
            })
            .collect();
        let estimated: Vec<TrackPoint> = reference
            .iter()
            .map(|p| TrackPoint { x: p.x * 1.05, ..*p })
            .collect();
        let series = error_series(&estimated, &reference, 0.5);
        for p in series.iter().skip(1) {
            assert!((p.error_pct - 5.0).abs() < 1e-9, "pct {}", p.error_pct);
        }
    }

    #[test]
    fn reference_gaps_are_skipped() {
        let reference: Vec<TrackPoint> = (0..10)
            .map(|i| TrackPoint {
                t_s: i as f64,
                x: i as f64,
                y: 0.0,
                z: 0.0,
            })
            .collect();
        let estimated: Vec<TrackPoint> = reference
            .iter()
            .filter(|p| p.t_s as usize % 3 != 0)
            .copied()
            .collect();
        let series = error_series(&estimated, &reference, 0.25);
        assert_eq!(series.len(), estimated.len());
    }

    #[test]
    fn sample_csv_round_trips() {
        let mut synth = GaitSynth::new(3.5, 6.0);
        let mut rng = rng_from_seed(540);
        let samples: Vec<ImuSample> = (0..20)
            .map(|i| synth.sample(i as f64 * 0.01, 0.05, 12.0, 1.0, &mut rng))
            .collect();
        let mut buf = Vec::new();
        write_samples_csv(&samples, &mut buf).unwrap();
        let back: Vec<ImuSample> = read_samples_csv(buf.as_slice()).unwrap();
        assert_eq!(samples, back);
    }

    #[test]
    fn malformed_sample_csv_reports_the_line() {
        let text = "t,ax,ay,az,qw,qx,qy,qz\n0,0,0,0,1,0,0,0\n0.01,bad,0,0,1,0,0,0\n";
        match read_samples_csv::<f64, _>(text.as_bytes()) {
            Err(ImuError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected result {other:?}"),
        }
    }

    #[test]
    fn track_csv_reads_with_and_without_traveled() {
        let with = "t,x,y,z,traveled\n0,1,2,3,0\n1,2,2,3,1\n";
        let without = "t,x,y,z\n0,1,2,3\n1,2,2,3\n";
        let a: Vec<TrackPoint> = read_track_csv(with.as_bytes()).unwrap();
        let b: Vec<TrackPoint> = read_track_csv(without.as_bytes()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert_eq!(a[1].x, 2.0);
    }

    #[test]
    fn track_csv_skips_dropout_rows() {
        let text = "t,x,y,z\n0,1,2,3\n1,,,\n\n2,3,2,3\n";
        let points: Vec<TrackPoint> = read_track_csv(text.as_bytes()).unwrap();
        assert_eq!(points.len(), 2);
        assert_eq!(points[1].t_s, 2.0);
    }
}
