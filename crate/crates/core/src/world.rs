//! Arena, agent pose, thermal sources and coverage bookkeeping.
//!
//! World frame: +x right, +y up, yaw counter-clockwise from +x in degrees.
//! The arena spans `[0, width] x [0, height]` meters.

use serde::{Deserialize, Serialize};

use crate::angles::wrap_deg;
use crate::num::{cst, Scalar};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum WorldError {
    #[error("pose ({x}, {y}) outside arena {w} x {h}")]
    OutOfBounds { x: f64, y: f64, w: f64, h: f64 },
    #[error("invalid arena dimensions {w} x {h}")]
    BadArena { w: f64, h: f64 },
    #[error("coverage cell size {0} must be positive and finite")]
    BadCellSize(f64),
}

/// Agent pose. `z`, `pitch` and `roll` stay zero on flat ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose<T: Scalar = f64> {
    pub x: T,
    pub y: T,
    pub z: T,
    /// Heading in degrees, counter-clockwise from +x, in (-180, 180].
    pub yaw_deg: T,
    /// Nose-up positive, in [-90, 90].
    pub pitch_deg: T,
    pub roll_deg: T,
}

impl<T: Scalar> Pose<T> {
    pub fn new(x: T, y: T, yaw_deg: T) -> Self {
        Pose {
            x,
            y,
            z: T::zero(),
            yaw_deg: wrap_deg(yaw_deg),
            pitch_deg: T::zero(),
            roll_deg: T::zero(),
        }
    }

    pub fn set_yaw(&mut self, yaw_deg: T) {
        self.yaw_deg = wrap_deg(yaw_deg);
    }

    pub fn turn(&mut self, delta_deg: T) {
        self.set_yaw(self.yaw_deg + delta_deg);
    }

    pub fn distance_to(&self, x: T, y: T) -> T {
        ((self.x - x).powi(2) + (self.y - y).powi(2)).sqrt()
    }
}

/// Rectangular arena. `slope_deg`, when set, tilts the whole floor so that
/// walking along +y gains height; it only matters to the inertial benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arena<T: Scalar = f64> {
    pub width_m: T,
    pub height_m: T,
    pub slope_deg: Option<T>,
}

impl<T: Scalar> Arena<T> {
    pub fn new(width_m: T, height_m: T) -> Result<Self, WorldError> {
        if !(width_m > T::zero() && height_m > T::zero())
            || !width_m.is_finite()
            || !height_m.is_finite()
        {
            return Err(WorldError::BadArena {
                w: width_m.to_f64().unwrap_or(f64::NAN),
                h: height_m.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Arena {
            width_m,
            height_m,
            slope_deg: None,
        })
    }

    pub fn contains(&self, x: T, y: T) -> bool {
        x >= T::zero() && x <= self.width_m && y >= T::zero() && y <= self.height_m
    }

    /// Shortest distance from a point inside the arena to any wall.
    pub fn distance_to_nearest_wall(&self, pose: &Pose<T>) -> T {
        debug_assert!(self.contains(pose.x, pose.y), "pose outside arena");
        let dx = pose.x.min(self.width_m - pose.x);
        let dy = pose.y.min(self.height_m - pose.y);
        dx.min(dy)
    }

    /// Clamp a point into the arena.
    pub fn clamp(&self, x: T, y: T) -> (T, T) {
        (
            x.max(T::zero()).min(self.width_m),
            y.max(T::zero()).min(self.height_m),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Human,
    Oven,
    TransientAir,
    Fixture,
}

/// A thermal source, modeled as an upright disk centered at sensor height
/// that always faces the camera. Transient sources are only active inside
/// `active_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalSource<T: Scalar = f64> {
    pub kind: SourceKind,
    pub x: T,
    pub y: T,
    pub radius_m: T,
    pub surface_temp_c: T,
    pub active_s: Option<(T, T)>,
}

impl<T: Scalar> ThermalSource<T> {
    pub fn active_at(&self, t_s: T) -> bool {
        match self.active_s {
            None => true,
            Some((a, b)) => t_s >= a && t_s <= b,
        }
    }
}

/// Static scene: arena geometry, ambient temperature and thermal sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World<T: Scalar = f64> {
    pub arena: Arena<T>,
    pub ambient_c: T,
    pub sources: Vec<ThermalSource<T>>,
}

impl<T: Scalar> World<T> {
    pub fn new(arena: Arena<T>, ambient_c: T) -> Self {
        World {
            arena,
            ambient_c,
            sources: Vec::new(),
        }
    }

    pub fn active_sources(&self, t_s: T) -> impl Iterator<Item = &ThermalSource<T>> {
        self.sources.iter().filter(move |s| s.active_at(t_s))
    }
}

/// Visited-cell grid over the arena. A cell is marked when the agent's body
/// center (optionally widened by `footprint_radius_m`) passes over it.
#[derive(Debug, Clone)]
pub struct CoverageGrid<T: Scalar = f64> {
    cell_size_m: T,
    cols: usize,
    rows: usize,
    visited: Vec<bool>,
    visited_count: usize,
    width_m: T,
    height_m: T,
    footprint_radius_m: T,
}

impl<T: Scalar> CoverageGrid<T> {
    pub const DEFAULT_CELL_SIZE_M: f64 = 0.1;

    pub fn new(arena: &Arena<T>, cell_size_m: T) -> Result<Self, WorldError> {
        if !(cell_size_m > T::zero()) || !cell_size_m.is_finite() {
            return Err(WorldError::BadCellSize(
                cell_size_m.to_f64().unwrap_or(f64::NAN),
            ));
        }
        let cols = (arena.width_m / cell_size_m).ceil().to_usize().unwrap_or(0);
        let rows = (arena.height_m / cell_size_m)
            .ceil()
            .to_usize()
            .unwrap_or(0);
        Ok(CoverageGrid {
            cell_size_m,
            cols,
            rows,
            visited: vec![false; cols * rows],
            visited_count: 0,
            width_m: arena.width_m,
            height_m: arena.height_m,
            footprint_radius_m: T::zero(),
        })
    }

    /// Widen marking to all cells overlapped by a square of this half-width
    /// around the body center. Zero (the default) marks the center cell only.
    pub fn set_footprint_radius(&mut self, radius_m: T) {
        self.footprint_radius_m = radius_m.max(T::zero());
    }

    pub fn cell_count(&self) -> usize {
        self.cols * self.rows
    }

    pub fn visited_count(&self) -> usize {
        self.visited_count
    }

    fn cell_index(&self, x: T, y: T) -> usize {
        let col = (x / self.cell_size_m)
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(self.cols - 1);
        let row = (y / self.cell_size_m)
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(self.rows - 1);
        row * self.cols + col
    }

    /// Mark the cell(s) under the agent. Errors if the pose is outside the
    /// arena the grid was built for.
    pub fn mark_coverage(&mut self, pose: &Pose<T>) -> Result<(), WorldError> {
        if pose.x < T::zero() || pose.x > self.width_m || pose.y < T::zero() || pose.y > self.height_m
        {
            return Err(WorldError::OutOfBounds {
                x: pose.x.to_f64().unwrap_or(f64::NAN),
                y: pose.y.to_f64().unwrap_or(f64::NAN),
                w: self.width_m.to_f64().unwrap_or(f64::NAN),
                h: self.height_m.to_f64().unwrap_or(f64::NAN),
            });
        }
        let r = self.footprint_radius_m;
        if r == T::zero() {
            self.mark_index(self.cell_index(pose.x, pose.y));
        } else {
            let (x0, y0) = (
                (pose.x - r).max(T::zero()),
                (pose.y - r).max(T::zero()),
            );
            let (x1, y1) = (
                (pose.x + r).min(self.width_m),
                (pose.y + r).min(self.height_m),
            );
            let c0 = self.cell_index(x0, y0) % self.cols;
            let c1 = self.cell_index(x1, y0) % self.cols;
            let r0 = self.cell_index(x0, y0) / self.cols;
            let r1 = self.cell_index(x0, y1) / self.cols;
            for row in r0..=r1 {
                for col in c0..=c1 {
                    self.mark_index(row * self.cols + col);
                }
            }
        }
        Ok(())
    }

    fn mark_index(&mut self, idx: usize) {
        if !self.visited[idx] {
            self.visited[idx] = true;
            self.visited_count += 1;
        }
    }

    /// Fraction of cells visited so far, in [0, 1]. Never decreases.
    pub fn coverage_fraction(&self) -> T {
        if self.visited.is_empty() {
            return T::zero();
        }
        cst::<T>(self.visited_count as f64 / self.visited.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arena(w: f64, h: f64) -> Arena {
        Arena::new(w, h).unwrap()
    }

    #[test]
    fn six_square_meters_at_ten_centimeters_is_600_cells() {
        let g = CoverageGrid::new(&arena(2.0, 3.0), 0.1).unwrap();
        assert_eq!(g.cell_count(), 600);
    }

    #[test]
    fn coverage_fraction_matches_exact_ratio() {
        let mut g = CoverageGrid::new(&arena(2.0, 3.0), 0.1).unwrap();
        // Visit 366 distinct cells (the first 366 in row-major order).
        let mut marked = 0;
        'outer: for row in 0..30 {
            for col in 0..20 {
                let pose = Pose::new(col as f64 * 0.1 + 0.05, row as f64 * 0.1 + 0.05, 0.0);
                g.mark_coverage(&pose).unwrap();
                marked += 1;
                if marked == 366 {
                    break 'outer;
                }
            }
        }
        assert_eq!(g.visited_count(), 366);
        assert_eq!(g.coverage_fraction(), 0.61);
    }

    #[test]
    fn mark_outside_arena_errors() {
        let mut g = CoverageGrid::new(&arena(2.0, 3.0), 0.1).unwrap();
        let err = g.mark_coverage(&Pose::new(2.5, 1.0, 0.0)).unwrap_err();
        assert!(matches!(err, WorldError::OutOfBounds { .. }));
    }

    #[test]
    fn remarking_same_cell_does_not_grow_fraction() {
        let mut g = CoverageGrid::new(&arena(1.0, 1.0), 0.1).unwrap();
        let pose = Pose::new(0.55, 0.55, 0.0);
        g.mark_coverage(&pose).unwrap();
        let once = g.coverage_fraction();
        g.mark_coverage(&pose).unwrap();
        assert_eq!(g.coverage_fraction(), once);
    }

    #[test]
    fn coverage_is_monotone_under_random_marks() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut g = CoverageGrid::new(&arena(5.0, 5.0), 0.1).unwrap();
        let mut last = 0.0;
        for _ in 0..10_000 {
            let pose = Pose::new(rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0), 0.0);
            g.mark_coverage(&pose).unwrap();
            let f = g.coverage_fraction();
            assert!(f >= last);
            last = f;
        }
    }

    #[test]
    fn footprint_marks_neighboring_cells() {
        let mut g = CoverageGrid::new(&arena(1.0, 1.0), 0.1).unwrap();
        g.set_footprint_radius(0.05);
        // Centered on a cell boundary: square footprint spans four cells.
        g.mark_coverage(&Pose::new(0.5, 0.5, 0.0)).unwrap();
        assert_eq!(g.visited_count(), 4);
    }

    #[test]
    fn wall_distance_center_and_corner() {
        let a = arena(20.0, 20.0);
        assert_eq!(a.distance_to_nearest_wall(&Pose::new(10.0, 10.0, 0.0)), 10.0);
        let d = a.distance_to_nearest_wall(&Pose::new(0.1, 0.1, 0.0));
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn transient_sources_respect_their_interval() {
        let s = ThermalSource {
            kind: SourceKind::TransientAir,
            x: 1.0,
            y: 1.0,
            radius_m: 0.45,
            surface_temp_c: 33.0,
            active_s: Some((10.5, 11.4)),
        };
        assert!(!s.active_at(10.0));
        assert!(s.active_at(11.0));
        assert!(!s.active_at(11.5));
    }

    #[test]
    fn degenerate_arena_rejected() {
        assert!(Arena::new(0.0, 5.0).is_err());
        assert!(Arena::new(5.0, -1.0).is_err());
    }
}
