//! Hot-spot detection on thermal frames and conversion of a detected image
//! column into a world-frame target position estimate.
//!
//! The detector is a small scale-space pipeline: 3x3 median, Gaussian
//! smoothing at three scales, 3x3 Laplacian, then the most negative local
//! minimum across scales (hot centers drive the Laplacian negative).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angles::{deg_to_rad, wrap_deg};
use crate::ir::{IrImage, IR_HEIGHT, IR_WIDTH};
use crate::num::{cst, Scalar};
use crate::world::Pose;

/// Default range assumed when turning a detection into a waypoint, meters.
pub const APPROACH_STEP_M: f64 = 1.5;

#[derive(Debug, Error, PartialEq)]
pub enum BlobError {
    #[error("column {u} outside [1, {IR_WIDTH}]")]
    ColumnOutOfRange { u: usize },
}

/// A detected hot spot: image position, Laplacian response, and the Gaussian
/// scale that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blob<T: Scalar = f64> {
    /// Column, 1-based from the left edge of the frame.
    pub u: usize,
    /// Row, 1-based from the top of the frame.
    pub v: usize,
    /// Raw Laplacian response at the minimum (negative for hot spots).
    pub response: T,
    /// Side length of the Gaussian kernel that found it (21, 27 or 33).
    pub scale_size: usize,
    pub sigma: T,
}

/// World-frame target estimate built from a detected column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetEstimate<T: Scalar = f64> {
    pub x_m: T,
    pub y_m: T,
    /// World bearing of the line of sight, degrees.
    pub bearing_deg: T,
    /// In-image angle of the column, degrees in [0, 90].
    pub image_angle_deg: T,
    /// Assumed range along the line of sight, meters.
    pub range_m: T,
}

/// Detector settings. The nomination threshold scales with the expected
/// pixel noise so ambient-only frames return no blob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlobConfig<T: Scalar = f64> {
    pub noise_sd_c: T,
    pub threshold_sigmas: T,
    /// Compare responses across scales multiplied by sigma^2 instead of raw.
    pub scale_normalized: bool,
}

impl<T: Scalar> Default for BlobConfig<T> {
    fn default() -> Self {
        BlobConfig {
            noise_sd_c: cst(0.3),
            threshold_sigmas: cst(3.0),
            scale_normalized: false,
        }
    }
}

fn clamp_idx(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// Convolve with an odd square kernel under replicate padding. All kernels
/// here are symmetric, so correlation and convolution coincide.
fn convolve<T: Scalar>(img: &IrImage<T>, kernel: &[Vec<T>]) -> IrImage<T> {
    let k = kernel.len();
    debug_assert!(k % 2 == 1 && kernel.iter().all(|row| row.len() == k));
    let half = (k / 2) as isize;
    let rows = img.rows();
    let mut out = IrImage::filled(img.t_s, T::zero());
    for v in 0..IR_HEIGHT as isize {
        for u in 0..IR_WIDTH as isize {
            let mut acc = T::zero();
            for (kv, krow) in kernel.iter().enumerate() {
                let sv = clamp_idx(v + kv as isize - half, IR_HEIGHT);
                for (ku, &w) in krow.iter().enumerate() {
                    let su = clamp_idx(u + ku as isize - half, IR_WIDTH);
                    acc += w * rows[sv][su];
                }
            }
            out.set(v as usize + 1, u as usize + 1, acc);
        }
    }
    out
}

/// 3x3 median filter with replicate padding.
pub fn median3<T: Scalar>(img: &IrImage<T>) -> IrImage<T> {
    let rows = img.rows();
    let mut out = IrImage::filled(img.t_s, T::zero());
    for v in 0..IR_HEIGHT as isize {
        for u in 0..IR_WIDTH as isize {
            let mut window = [T::zero(); 9];
            let mut i = 0;
            for dv in -1..=1 {
                for du in -1..=1 {
                    window[i] =
                        rows[clamp_idx(v + dv, IR_HEIGHT)][clamp_idx(u + du, IR_WIDTH)];
                    i += 1;
                }
            }
            window.sort_by(|a, b| a.partial_cmp(b).expect("finite pixels"));
            out.set(v as usize + 1, u as usize + 1, window[4]);
        }
    }
    out
}

fn sampled_gaussian<T: Scalar>(size: usize, sigma: T) -> Vec<Vec<T>> {
    let half = (size / 2) as isize;
    let two_pi: T = cst(std::f64::consts::TAU);
    let norm = T::one() / (two_pi * sigma * sigma);
    (-half..=half)
        .map(|y| {
            (-half..=half)
                .map(|x| {
                    let r2 = cst::<T>((x * x + y * y) as f64);
                    norm * (-r2 / (cst::<T>(2.0) * sigma * sigma)).exp()
                })
                .collect()
        })
        .collect()
}

/// Sampled 2D Gaussian, normalized to sum 1.
pub fn gaussian_kernel<T: Scalar>(size: usize, sigma: T) -> Vec<Vec<T>> {
    assert!(size % 2 == 1, "kernel size must be odd");
    let mut kernel = sampled_gaussian(size, sigma);
    let sum = kernel
        .iter()
        .flatten()
        .fold(T::zero(), |acc, &w| acc + w);
    for row in &mut kernel {
        for w in row {
            *w /= sum;
        }
    }
    kernel
}

/// Smooth with a normalized sampled Gaussian under replicate padding.
pub fn gaussian_smooth<T: Scalar>(img: &IrImage<T>, size: usize, sigma: T) -> IrImage<T> {
    convolve(img, &gaussian_kernel(size, sigma))
}

/// 4-neighbor Laplacian under replicate padding. Hot centers give negative
/// responses.
pub fn laplacian3<T: Scalar>(img: &IrImage<T>) -> IrImage<T> {
    let z = T::zero();
    let one = T::one();
    let kernel = vec![
        vec![z, one, z],
        vec![one, cst(-4.0), one],
        vec![z, one, z],
    ];
    convolve(img, &kernel)
}

/// L2 gain of the Laplacian-of-Gaussian filter at one scale: the factor by
/// which iid pixel noise maps to response standard deviation.
fn log_filter_gain<T: Scalar>(size: usize, sigma: T) -> T {
    let g = gaussian_kernel(size, sigma);
    let k = size + 2;
    let half_g = (size / 2) as isize;
    let half = (k / 2) as isize;
    let mut sum_sq = T::zero();
    // Full convolution of the 3x3 Laplacian with the Gaussian kernel.
    for y in -half..=half {
        for x in -half..=half {
            let mut w = T::zero();
            for (dy, dx, lw) in [
                (-1isize, 0isize, T::one()),
                (1, 0, T::one()),
                (0, -1, T::one()),
                (0, 1, T::one()),
                (0, 0, cst(-4.0)),
            ] {
                let gy = y - dy;
                let gx = x - dx;
                if gy.abs() <= half_g && gx.abs() <= half_g {
                    w += lw * g[(gy + half_g) as usize][(gx + half_g) as usize];
                }
            }
            sum_sq += w * w;
        }
    }
    sum_sq.sqrt()
}

fn is_local_min<T: Scalar>(resp: &IrImage<T>, v: usize, u: usize) -> bool {
    debug_assert!(v > 1 && v < IR_HEIGHT && u > 1 && u < IR_WIDTH);
    let center = resp.at(v, u);
    for dv in -1isize..=1 {
        for du in -1isize..=1 {
            if dv == 0 && du == 0 {
                continue;
            }
            let nv = (v as isize + dv) as usize;
            let nu = (u as isize + du) as usize;
            if resp.at(nv, nu) < center {
                return false;
            }
        }
    }
    true
}

struct ScaleBand<T: Scalar> {
    size: usize,
    sigma: T,
    kernel: Vec<Vec<T>>,
    threshold: T,
}

/// Three-scale hot-spot detector. Construct once, reuse across frames.
pub struct BlobDetector<T: Scalar = f64> {
    config: BlobConfig<T>,
    bands: Vec<ScaleBand<T>>,
}

impl<T: Scalar> BlobDetector<T> {
    pub fn new(config: BlobConfig<T>) -> Self {
        let bands = [(21usize, 3.0f64), (27, 4.0), (33, 5.0)]
            .into_iter()
            .map(|(size, s)| {
                let sigma = cst::<T>(s);
                ScaleBand {
                    size,
                    sigma,
                    kernel: gaussian_kernel(size, sigma),
                    threshold: -config.threshold_sigmas
                        * config.noise_sd_c
                        * log_filter_gain(size, sigma),
                }
            })
            .collect();
        BlobDetector { config, bands }
    }

    pub fn config(&self) -> &BlobConfig<T> {
        &self.config
    }

    /// Most negative nominated local minimum across the three scales, or
    /// `None` when nothing clears the noise threshold. Ties resolve to the
    /// smallest scale, then row-major pixel order. The one-pixel frame
    /// border is never nominated: its smoothed values are dominated by
    /// edge padding, which inflates the filtered noise there severalfold.
    pub fn detect(&self, img: &IrImage<T>) -> Option<Blob<T>> {
        let med = median3(img);
        let mut best: Option<(T, Blob<T>)> = None;
        for band in &self.bands {
            let resp = laplacian3(&convolve(&med, &band.kernel));
            for v in 2..IR_HEIGHT {
                for u in 2..IR_WIDTH {
                    let r = resp.at(v, u);
                    if r >= band.threshold || !is_local_min(&resp, v, u) {
                        continue;
                    }
                    let score = if self.config.scale_normalized {
                        band.sigma * band.sigma * r
                    } else {
                        r
                    };
                    let better = match &best {
                        None => true,
                        Some((s, _)) => score < *s,
                    };
                    if better {
                        best = Some((
                            score,
                            Blob {
                                u,
                                v,
                                response: r,
                                scale_size: band.size,
                                sigma: band.sigma,
                            },
                        ));
                    }
                }
            }
        }
        best.map(|(_, b)| b)
    }
}

impl<T: Scalar> Default for BlobDetector<T> {
    fn default() -> Self {
        BlobDetector::new(BlobConfig::default())
    }
}

/// In-image angle of a column: 0 degrees at column 1, 90 at column 32.
pub fn pixel_to_angle<T: Scalar>(u: usize) -> Result<T, BlobError> {
    if !(1..=IR_WIDTH).contains(&u) {
        return Err(BlobError::ColumnOutOfRange { u });
    }
    Ok(cst::<T>(u as f64 - 1.0) * cst::<T>(90.0) / cst::<T>(31.0))
}

/// Reflect a column across the frame's vertical midline. The renderer
/// indexes columns left-to-right while the angle map counts from the right
/// edge of the field of view; this converts between the two.
pub fn mirror_column(u: usize) -> usize {
    debug_assert!((1..=IR_WIDTH).contains(&u));
    IR_WIDTH + 1 - u
}

/// Project a detected column into a world position `range_m` out along its
/// line of sight from the agent's pose.
pub fn estimate_target<T: Scalar>(
    insect: &Pose<T>,
    image_angle_deg: T,
    range_m: T,
) -> TargetEstimate<T> {
    let bearing = wrap_deg(insect.yaw_deg - cst(45.0) + image_angle_deg);
    let r = deg_to_rad(bearing);
    TargetEstimate {
        x_m: insect.x + range_m * r.cos(),
        y_m: insect.y + range_m * r.sin(),
        bearing_deg: bearing,
        image_angle_deg,
        range_m,
    }
}
