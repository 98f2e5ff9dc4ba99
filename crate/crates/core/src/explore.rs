//! Exploration strategies: how the agent picks its next destination while
//! searching. Directions are always uniform on [0, 360); the strategies
//! differ only in their step-length law.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::angles::deg_to_rad;
use crate::distrib::BoundedPareto;
use crate::num::{cst, SampleScalar, Scalar};
use crate::world::{Arena, Pose};

/// Margin kept from the walls when clipping destinations, meters.
pub const WALL_MARGIN_M: f64 = 0.10;
/// Length of the interim destination issued to move off a wall, meters.
pub const WALL_ESCAPE_M: f64 = 0.5;

/// Step-length law for destination sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy<T: Scalar = f64> {
    FixedLength { step_m: T },
    LevyWalk { min_step_m: T, max_step_m: T, mu: T },
    UniformDistribution { min_m: T, max_m: T },
    BrownianWalk { step_m: T },
}

impl<T: Scalar> Strategy<T> {
    pub fn fixed_length() -> Self {
        Strategy::FixedLength { step_m: cst(0.5) }
    }

    pub fn levy_walk() -> Self {
        Strategy::LevyWalk {
            min_step_m: cst(0.5),
            max_step_m: cst(30.0),
            mu: cst(2.0),
        }
    }

    pub fn uniform() -> Self {
        Strategy::UniformDistribution {
            min_m: cst(0.5),
            max_m: cst(20.0),
        }
    }

    pub fn brownian() -> Self {
        Strategy::BrownianWalk { step_m: cst(30.0) }
    }
}

/// A destination handed to the go-to-point controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Destination<T: Scalar = f64> {
    pub x: T,
    pub y: T,
}

/// One Levy step length: bounded Pareto with exponent `mu`, support
/// [min_step, max_step].
pub fn levy_step<T: SampleScalar, R: Rng + ?Sized>(
    rng: &mut R,
    min_step_m: T,
    max_step_m: T,
    mu: T,
) -> T {
    BoundedPareto::new(min_step_m, max_step_m, mu)
        .expect("levy parameters validated upstream")
        .sample(rng)
}

fn sample_distance<T: SampleScalar, R: Rng + ?Sized>(strategy: &Strategy<T>, rng: &mut R) -> T {
    match *strategy {
        Strategy::FixedLength { step_m } => step_m,
        Strategy::LevyWalk {
            min_step_m,
            max_step_m,
            mu,
        } => levy_step(rng, min_step_m, max_step_m, mu),
        Strategy::UniformDistribution { min_m, max_m } => T::uniform(rng, min_m, max_m),
        Strategy::BrownianWalk { step_m } => step_m,
    }
}

/// Clip the ray from `(x, y)` along `(dx, dy)` (unit) of length `dist` to the
/// arena inset by the wall margin. Falls back to clamping the endpoint when
/// the ray never enters the inset box.
fn clip_ray<T: Scalar>(arena: &Arena<T>, x: T, y: T, dx: T, dy: T, dist: T) -> (T, T) {
    let margin = cst::<T>(WALL_MARGIN_M);
    let (lo_x, lo_y) = (margin, margin);
    let (hi_x, hi_y) = (arena.width_m - margin, arena.height_m - margin);

    let mut t_enter = T::zero();
    let mut t_exit = dist;
    let mut ok = true;
    for (p, d, lo, hi) in [(x, dx, lo_x, hi_x), (y, dy, lo_y, hi_y)] {
        if d.abs() < cst(1e-12) {
            if p < lo || p > hi {
                ok = false;
            }
            continue;
        }
        let (mut t0, mut t1) = ((lo - p) / d, (hi - p) / d);
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        t_enter = t_enter.max(t0);
        t_exit = t_exit.min(t1);
    }

    if ok && t_exit >= t_enter {
        let t = t_exit.max(T::zero()).min(dist);
        (x + dx * t, y + dy * t)
    } else {
        let ex = (x + dx * dist).max(lo_x).min(hi_x);
        let ey = (y + dy * dist).max(lo_y).min(hi_y);
        (ex, ey)
    }
}

/// Draw the next destination: uniform direction, strategy-specific distance,
/// ray-clipped to the arena inset by 10 cm.
pub fn next_destination<T: SampleScalar, R: Rng + ?Sized>(
    strategy: &Strategy<T>,
    pose: &Pose<T>,
    arena: &Arena<T>,
    rng: &mut R,
) -> Destination<T> {
    let dir_deg = T::uniform(rng, T::zero(), cst(360.0));
    let dist = sample_distance(strategy, rng);
    let r = deg_to_rad(dir_deg);
    let (x, y) = clip_ray(arena, pose.x, pose.y, r.cos(), r.sin(), dist);
    Destination { x, y }
}

/// Interim destination 0.5 m along the inward wall normal when the agent is
/// strictly closer than 10 cm to a wall; `None` otherwise. At corners the
/// normals of both near walls combine.
pub fn wall_redirect<T: Scalar>(pose: &Pose<T>, arena: &Arena<T>) -> Option<Destination<T>> {
    let margin = cst::<T>(WALL_MARGIN_M);
    let mut nx = T::zero();
    let mut ny = T::zero();
    if pose.x < margin {
        nx += T::one();
    }
    if arena.width_m - pose.x < margin {
        nx -= T::one();
    }
    if pose.y < margin {
        ny += T::one();
    }
    if arena.height_m - pose.y < margin {
        ny -= T::one();
    }
    if nx == T::zero() && ny == T::zero() {
        return None;
    }
    let norm = (nx * nx + ny * ny).sqrt();
    let escape = cst::<T>(WALL_ESCAPE_M);
    let (x, y) = arena.clamp(pose.x + nx / norm * escape, pose.y + ny / norm * escape);
    Some(Destination { x, y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn arena() -> Arena {
        Arena::new(20.0, 20.0).unwrap()
    }

    fn center() -> Pose {
        Pose::new(10.0, 10.0, 0.0)
    }

    #[test]
    fn fixed_length_destinations_are_half_a_meter_out() {
        let mut rng = rng_from_seed(41);
        let s = Strategy::fixed_length();
        for _ in 0..1000 {
            let d = next_destination(&s, &center(), &arena(), &mut rng);
            let dist = center().distance_to(d.x, d.y);
            assert!((dist - 0.5).abs() < 1e-9, "distance {dist}");
        }
    }

    #[test]
    fn uniform_distances_cover_their_range_with_mean_10_25() {
        let mut rng = rng_from_seed(42);
        let s = Strategy::uniform();
        // Sample the raw law (huge arena so clipping never bites).
        let big = Arena::new(1000.0, 1000.0).unwrap();
        let pose = Pose::<f64>::new(500.0, 500.0, 0.0);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let d = next_destination(&s, &pose, &big, &mut rng);
            let dist = pose.distance_to(d.x, d.y);
            assert!((0.5..=20.0).contains(&dist));
            sum += dist;
        }
        let mean = sum / n as f64;
        assert!((mean - 10.25).abs() < 0.1, "mean {mean}");
    }

    #[test]
    fn brownian_steps_are_30_m_before_clipping() {
        let mut rng = rng_from_seed(43);
        let s = Strategy::brownian();
        let big = Arena::new(1000.0, 1000.0).unwrap();
        let pose = Pose::<f64>::new(500.0, 500.0, 0.0);
        for _ in 0..100 {
            let d = next_destination(&s, &pose, &big, &mut rng);
            let dist = pose.distance_to(d.x, d.y);
            assert!((dist - 30.0).abs() < 1e-9);
        }
    }

    #[test]
    fn levy_steps_respect_minimum() {
        let mut rng = rng_from_seed(44);
        for _ in 0..1_000_000 {
            let l: f64 = levy_step(&mut rng, 0.5, 30.0, 2.0);
            assert!(l >= 0.5);
        }
    }

    #[test]
    fn levy_tail_slope_matches_one_minus_mu() {
        // Log-log regression of the empirical survival function over the
        // lower tail (upper truncation bends the far tail; the analytic
        // slope there is within 0.1 of 1 - mu for l <= 2.5).
        let mut rng = rng_from_seed(45);
        let n = 1_000_000usize;
        let mut samples: Vec<f64> = (0..n).map(|_| levy_step(&mut rng, 0.5, 30.0, 2.0)).collect();
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let grid: Vec<f64> = (0..12).map(|i| 0.5 * (5.0f64).powf(i as f64 / 11.0)).collect();
        let mut pts = Vec::new();
        for &l in &grid {
            let above = samples.len() - samples.partition_point(|&x| x <= l);
            let s = above as f64 / n as f64;
            if s > 0.0 {
                pts.push((l.ln(), s.ln()));
            }
        }
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        assert!(
            (slope - (-1.0)).abs() < 0.15,
            "survival log-log slope {slope}"
        );
    }

    #[test]
    fn levy_median_below_mean() {
        let mut rng = rng_from_seed(46);
        let n = 200_000;
        let mut xs: Vec<f64> = (0..n).map(|_| levy_step(&mut rng, 0.5, 30.0, 2.0)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = xs[n / 2];
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!(median < mean, "median {median} mean {mean}");
    }

    #[test]
    fn directions_are_uniform_by_chi_square() {
        let mut rng = rng_from_seed(47);
        let s = Strategy::brownian();
        let big = Arena::new(10_000.0, 10_000.0).unwrap();
        let pose = Pose::<f64>::new(5000.0, 5000.0, 0.0);
        let n = 100_000;
        let mut bins = [0usize; 36];
        for _ in 0..n {
            let d = next_destination(&s, &pose, &big, &mut rng);
            let ang = (d.y - pose.y).atan2(d.x - pose.x).to_degrees().rem_euclid(360.0);
            bins[(ang / 10.0) as usize % 36] += 1;
        }
        let expected = n as f64 / 36.0;
        let chi2: f64 = bins
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 0.99 quantile of chi-square with 35 degrees of freedom.
        assert!(chi2 < 57.342, "chi-square statistic {chi2}");
    }

    #[test]
    fn clipped_destinations_stay_inside_the_arena() {
        let mut rng = rng_from_seed(48);
        let a = arena();
        let strategies = [
            Strategy::fixed_length(),
            Strategy::levy_walk(),
            Strategy::uniform(),
            Strategy::brownian(),
        ];
        for i in 0..1_000_000 {
            use rand::Rng;
            let pose = Pose::<f64>::new(rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0), 0.0);
            let s = &strategies[i % 4];
            let d = next_destination(s, &pose, &a, &mut rng);
            assert!(
                a.contains(d.x, d.y),
                "destination ({}, {}) left the arena",
                d.x,
                d.y
            );
        }
    }

    #[test]
    fn wall_redirect_pushes_inward() {
        let a = arena();
        let d = wall_redirect(&Pose::new(0.05, 10.0, 0.0), &a).unwrap();
        assert!(d.x > 0.05, "must move away from the left wall");
        assert!((d.x - 0.55).abs() < 1e-12);
        assert_eq!(d.y, 10.0);
    }

    #[test]
    fn wall_redirect_only_strictly_inside_margin() {
        let a = arena();
        assert!(wall_redirect(&Pose::new(0.10, 10.0, 0.0), &a).is_none());
        assert!(wall_redirect(&Pose::new(10.0, 10.0, 0.0), &a).is_none());
        assert!(wall_redirect(&Pose::new(0.099, 10.0, 0.0), &a).is_some());
    }

    #[test]
    fn wall_redirect_combines_corner_normals() {
        let a = arena();
        let d = wall_redirect(&Pose::new(0.05, 0.05, 0.0), &a).unwrap();
        assert!(d.x > 0.05 && d.y > 0.05);
        let dx = d.x - 0.05;
        let dy = d.y - 0.05;
        assert!((dx.hypot(dy) - 0.5).abs() < 1e-12);
        assert!((dx - dy).abs() < 1e-12, "diagonal escape expected");
    }
}
