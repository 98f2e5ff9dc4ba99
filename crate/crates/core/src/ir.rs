//! Low-resolution thermal camera model: renders 32x32 temperature images of
//! the world from the agent's pose, plus band statistics and file export.
//!
//! Image convention: column 1 is the left edge of the scene (bearing +45
//! degrees relative to heading), column 32 the right edge (-45). Row 1 looks
//! up (+45 elevation), row 32 down. Thermal sources are modeled as upright
//! disks at camera height facing the camera, so a source covers the pixels
//! whose ray falls within its angular radius `atan(r / d)`.

use std::io::{BufRead, BufReader, Write as IoWrite};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angles::{rad_to_deg, wrap_deg};
use crate::num::{cst, SampleScalar, Scalar};
use crate::world::{Pose, World};

pub const IR_WIDTH: usize = 32;
pub const IR_HEIGHT: usize = 32;
pub const IR_PIXELS: usize = IR_WIDTH * IR_HEIGHT;

#[derive(Debug, Error)]
pub enum IrError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("expected {expected} rows of {width} values, got {got}")]
    Shape {
        expected: usize,
        width: usize,
        got: usize,
    },
}

/// Intrinsics and noise model of the thermal camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraModel<T: Scalar = f64> {
    pub hfov_deg: T,
    pub vfov_deg: T,
    pub height_m: T,
    pub rate_hz: T,
    pub noise_sd_c: T,
    pub max_range_m: T,
    /// Distance at which a source still reads its full surface temperature;
    /// beyond it the reading falls off with the square of distance.
    pub atten_ref_m: T,
}

impl<T: Scalar> Default for CameraModel<T> {
    fn default() -> Self {
        CameraModel {
            hfov_deg: cst(90.0),
            vfov_deg: cst(90.0),
            height_m: cst(0.02),
            rate_hz: cst(1.0),
            noise_sd_c: cst(0.3),
            max_range_m: cst(10.0),
            atten_ref_m: cst(2.6),
        }
    }
}

impl<T: Scalar> CameraModel<T> {
    /// Angular pitch between adjacent column centers, degrees.
    pub fn column_pitch_deg(&self) -> T {
        self.hfov_deg / cst(IR_WIDTH as f64 - 1.0)
    }

    /// Angular pitch between adjacent row centers, degrees.
    pub fn row_pitch_deg(&self) -> T {
        self.vfov_deg / cst(IR_HEIGHT as f64 - 1.0)
    }

    /// Bearing of a column center relative to heading (1-based column).
    /// Column 1 maps to +hfov/2 (scene left), column 32 to -hfov/2.
    pub fn column_bearing_deg(&self, u: usize) -> T {
        debug_assert!((1..=IR_WIDTH).contains(&u));
        self.hfov_deg / cst(2.0) - cst::<T>(u as f64 - 1.0) * self.column_pitch_deg()
    }

    /// Elevation of a row center (1-based row). Row 1 maps to +vfov/2.
    pub fn row_elevation_deg(&self, v: usize) -> T {
        debug_assert!((1..=IR_HEIGHT).contains(&v));
        self.vfov_deg / cst(2.0) - cst::<T>(v as f64 - 1.0) * self.row_pitch_deg()
    }

    pub fn frame_period_s(&self) -> T {
        T::one() / self.rate_hz
    }
}

/// One thermal frame, in degrees Celsius.
#[derive(Debug, Clone, PartialEq)]
pub struct IrImage<T: Scalar = f64> {
    pub t_s: T,
    pixels: [[T; IR_WIDTH]; IR_HEIGHT],
}

impl<T: Scalar> IrImage<T> {
    pub fn filled(t_s: T, value: T) -> Self {
        IrImage {
            t_s,
            pixels: [[value; IR_WIDTH]; IR_HEIGHT],
        }
    }

    /// Pixel value with 1-based row `v` (top = 1) and column `u` (left = 1).
    pub fn at(&self, v: usize, u: usize) -> T {
        self.pixels[v - 1][u - 1]
    }

    pub fn set(&mut self, v: usize, u: usize, value: T) {
        self.pixels[v - 1][u - 1] = value;
    }

    pub fn rows(&self) -> &[[T; IR_WIDTH]; IR_HEIGHT] {
        &self.pixels
    }

    pub fn min_max(&self) -> (T, T) {
        let mut lo = self.pixels[0][0];
        let mut hi = lo;
        for row in &self.pixels {
            for &p in row {
                lo = lo.min(p);
                hi = hi.max(p);
            }
        }
        (lo, hi)
    }
}

/// Apparent temperature of a surface seen from `dist_m` away: full surface
/// temperature inside the reference distance, inverse-square falloff toward
/// ambient beyond it.
pub fn attenuated_temp<T: Scalar>(ambient_c: T, surface_c: T, ref_dist_m: T, dist_m: T) -> T {
    let ratio = ((ref_dist_m / dist_m) * (ref_dist_m / dist_m)).min(T::one());
    ambient_c + (surface_c - ambient_c) * ratio
}

/// Render one frame from `pose` at simulation time `t_s`. Gaussian read
/// noise is added to every pixel in row-major order, so a fixed RNG seed
/// reproduces the frame exactly.
pub fn render_ir<T: SampleScalar, R: Rng + ?Sized>(
    world: &World<T>,
    pose: &Pose<T>,
    cam: &CameraModel<T>,
    t_s: T,
    rng: &mut R,
) -> IrImage<T> {
    // Visible sources, nearest first so overlaps resolve to the closest one.
    let mut seen: Vec<(T, T, T, T)> = world
        .active_sources(t_s)
        .filter_map(|s| {
            let dx = s.x - pose.x;
            let dy = s.y - pose.y;
            let d = (dx * dx + dy * dy).sqrt();
            if d > cam.max_range_m {
                return None;
            }
            let bearing = wrap_deg(rad_to_deg(dy.atan2(dx)) - pose.yaw_deg);
            if bearing.abs() > cst(90.0) {
                return None;
            }
            let ang_radius = rad_to_deg((s.radius_m / d).atan());
            let temp = attenuated_temp(world.ambient_c, s.surface_temp_c, cam.atten_ref_m, d);
            Some((d, bearing, ang_radius, temp))
        })
        .collect();
    seen.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances"));

    let mut img = IrImage::filled(t_s, world.ambient_c);
    for v in 1..=IR_HEIGHT {
        let el = cam.row_elevation_deg(v);
        for u in 1..=IR_WIDTH {
            let az = cam.column_bearing_deg(u);
            let mut base = world.ambient_c;
            for &(_, bearing, ang_radius, temp) in &seen {
                let daz = az - bearing;
                if (daz * daz + el * el).sqrt() <= ang_radius {
                    base = temp;
                    break;
                }
            }
            let noisy = base + T::normal(rng, T::zero(), cam.noise_sd_c);
            img.set(v, u, noisy);
        }
    }
    img
}

/// Number of pixels whose value lies in `[lo_c, hi_c]` (inclusive).
pub fn in_band_count<T: Scalar>(img: &IrImage<T>, lo_c: T, hi_c: T) -> usize {
    img.rows()
        .iter()
        .flatten()
        .filter(|&&p| p >= lo_c && p <= hi_c)
        .count()
}

/// In-band pixels as a fraction of the whole frame.
pub fn band_fraction<T: Scalar>(img: &IrImage<T>, lo_c: T, hi_c: T) -> T {
    cst::<T>(in_band_count(img, lo_c, hi_c) as f64) / cst(IR_PIXELS as f64)
}

/// In-band count inside the square window of half-width `half` centered on
/// pixel `(cv, cu)` (1-based), clipped to the frame.
pub fn window_band_count<T: Scalar>(
    img: &IrImage<T>,
    cv: usize,
    cu: usize,
    half: usize,
    lo_c: T,
    hi_c: T,
) -> usize {
    let v0 = cv.saturating_sub(half).max(1);
    let v1 = (cv + half).min(IR_HEIGHT);
    let u0 = cu.saturating_sub(half).max(1);
    let u1 = (cu + half).min(IR_WIDTH);
    let mut n = 0;
    for v in v0..=v1 {
        for u in u0..=u1 {
            let p = img.at(v, u);
            if p >= lo_c && p <= hi_c {
                n += 1;
            }
        }
    }
    n
}

/// Write a frame as 32 lines of 32 comma-separated Celsius values.
pub fn write_csv<T: Scalar, W: IoWrite>(img: &IrImage<T>, mut out: W) -> Result<(), IrError> {
    for row in img.rows() {
        let line: Vec<String> = row.iter().map(|p| format!("{p}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_csv_path<T: Scalar, P: AsRef<Path>>(img: &IrImage<T>, path: P) -> Result<(), IrError> {
    let file = std::fs::File::create(path)?;
    write_csv(img, std::io::BufWriter::new(file))
}

/// Read a frame from the CSV layout produced by [`write_csv`]. The stored
/// frame carries no timestamp; the returned image has `t_s = 0`.
pub fn read_csv<T: Scalar, R: std::io::Read>(input: R) -> Result<IrImage<T>, IrError> {
    let mut img = IrImage::filled(T::zero(), T::zero());
    let mut rows = 0usize;
    for (idx, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if rows >= IR_HEIGHT {
            return Err(IrError::Shape {
                expected: IR_HEIGHT,
                width: IR_WIDTH,
                got: rows + 1,
            });
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != IR_WIDTH {
            return Err(IrError::Parse {
                line: idx + 1,
                msg: format!("expected {IR_WIDTH} values, got {}", fields.len()),
            });
        }
        for (u, field) in fields.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|e| IrError::Parse {
                line: idx + 1,
                msg: format!("bad value {field:?}: {e}"),
            })?;
            img.set(rows + 1, u + 1, cst(value));
        }
        rows += 1;
    }
    if rows != IR_HEIGHT {
        return Err(IrError::Shape {
            expected: IR_HEIGHT,
            width: IR_WIDTH,
            got: rows,
        });
    }
    Ok(img)
}

pub fn read_csv_path<T: Scalar, P: AsRef<Path>>(path: P) -> Result<IrImage<T>, IrError> {
    read_csv(std::fs::File::open(path)?)
}

/// Write a frame as an ASCII PGM, scaled to 0..255 over the frame's own
/// range. The Celsius range is recorded in a comment so the scaling can be
/// undone.
pub fn write_pgm<T: Scalar, W: IoWrite>(img: &IrImage<T>, mut out: W) -> Result<(), IrError> {
    let (lo, hi) = img.min_max();
    writeln!(out, "P2")?;
    writeln!(out, "# temp_range_c {lo} {hi}")?;
    writeln!(out, "{IR_WIDTH} {IR_HEIGHT}")?;
    writeln!(out, "255")?;
    let span = hi - lo;
    for row in img.rows() {
        let line: Vec<String> = row
            .iter()
            .map(|&p| {
                let g = if span > T::zero() {
                    ((p - lo) / span * cst(255.0)).round()
                } else {
                    T::zero()
                };
                format!("{:.0}", g)
            })
            .collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn write_pgm_path<T: Scalar, P: AsRef<Path>>(img: &IrImage<T>, path: P) -> Result<(), IrError> {
    let file = std::fs::File::create(path)?;
    write_pgm(img, std::io::BufWriter::new(file))
}
