//! Angle helpers. All public angles in the simulator are degrees; yaw is
//! measured counter-clockwise from +x and normalized to (-180, 180].

use crate::num::{cst, Scalar};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AngleError {
    #[error("angle must be finite, got {0}")]
    NonFinite(f64),
}

/// Wrap an angle in degrees to (-180, 180]. Assumes finite input.
#[inline]
pub fn wrap_deg<T: Scalar>(deg: T) -> T {
    let full = cst::<T>(360.0);
    let half = cst::<T>(180.0);
    let mut r = deg % full;
    if r > half {
        r -= full;
    } else if r <= -half {
        r += full;
    }
    r
}

/// Normalize an angle in degrees to (-180, 180], rejecting non-finite input.
pub fn normalize_angle<T: Scalar>(deg: T) -> Result<T, AngleError> {
    if !deg.is_finite() {
        return Err(AngleError::NonFinite(deg.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(wrap_deg(deg))
}

#[inline]
pub fn deg_to_rad<T: Scalar>(deg: T) -> T {
    deg * cst::<T>(std::f64::consts::PI / 180.0)
}

#[inline]
pub fn rad_to_deg<T: Scalar>(rad: T) -> T {
    rad * cst::<T>(180.0 / std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn wraps_into_half_open_range() {
        assert_eq!(normalize_angle(270.0).unwrap(), -90.0);
        assert_eq!(normalize_angle(-181.0).unwrap(), 179.0);
        assert_eq!(normalize_angle(180.0).unwrap(), 180.0);
        assert_eq!(normalize_angle(-180.0).unwrap(), 180.0);
        assert_eq!(normalize_angle(540.0).unwrap(), 180.0);
        assert_eq!(normalize_angle(0.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(normalize_angle(f64::NAN).is_err());
        assert!(normalize_angle(f64::INFINITY).is_err());
        assert!(normalize_angle(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn idempotent_over_many_random_angles() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1_000_000 {
            let a: f64 = rng.gen_range(-1.0e6..1.0e6);
            let once = normalize_angle(a).unwrap();
            let twice = normalize_angle(once).unwrap();
            assert!(once > -180.0 && once <= 180.0, "out of range: {once}");
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn wrap_works_for_f32_too() {
        assert_eq!(wrap_deg(270.0f32), -90.0f32);
    }
}
