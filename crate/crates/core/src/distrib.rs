//! Samplers not provided by `rand_distr`: the von Mises circular
//! distribution and the bounded (truncated) Pareto distribution.

use rand::Rng;

use crate::angles::{rad_to_deg, wrap_deg};
use crate::num::{cst, SampleScalar, Scalar};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DistribError {
    #[error("concentration kappa must be >= 0, got {0}")]
    BadKappa(f64),
    #[error("bounded pareto needs 0 < min < max and exponent > 1, got min={min} max={max} mu={mu}")]
    BadPareto { min: f64, max: f64, mu: f64 },
}

/// Von Mises distribution on the circle, parameterized in degrees.
///
/// Sampling uses the Best-Fisher (1979) wrapped-Cauchy rejection scheme;
/// kappa = 0 degenerates to the uniform distribution on (-180, 180].
#[derive(Debug, Clone, Copy)]
pub struct VonMises<T: Scalar = f64> {
    mean_deg: T,
    kappa: T,
}

impl<T: SampleScalar> VonMises<T> {
    pub fn new(mean_deg: T, kappa: T) -> Result<Self, DistribError> {
        if !(kappa >= T::zero()) || !kappa.is_finite() {
            return Err(DistribError::BadKappa(kappa.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(VonMises { mean_deg, kappa })
    }

    /// Draw an angle in degrees, wrapped to (-180, 180].
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let half = cst::<T>(180.0);
        if self.kappa == T::zero() {
            let u = T::uniform(rng, -half, half);
            return wrap_deg(self.mean_deg + u);
        }

        let kappa = self.kappa;
        let one = T::one();
        let two = cst::<T>(2.0);
        let four = cst::<T>(4.0);
        let pi = cst::<T>(std::f64::consts::PI);

        let tau = one + (one + four * kappa * kappa).sqrt();
        let rho = (tau - (two * tau).sqrt()) / (two * kappa);
        let r = (one + rho * rho) / (two * rho);

        let f = loop {
            let u1 = T::open01(rng);
            let z = (pi * u1).cos();
            let f = (one + r * z) / (r + z);
            let c = kappa * (r - f);
            let u2 = T::open01(rng);
            if c * (two - c) - u2 > T::zero() || (c / u2).ln() + one - c >= T::zero() {
                break f;
            }
        };

        let u3 = T::open01(rng);
        let sign = if u3 > cst::<T>(0.5) { one } else { -one };
        // Rounding can push f just past [-1, 1] for extreme kappa.
        let dev = rad_to_deg(f.max(-one).min(one).acos());
        wrap_deg(self.mean_deg + sign * dev)
    }
}

/// Pareto distribution p(l) ~ l^-mu truncated to [min, max], sampled by
/// inverting its CDF. Requires mu > 1.
#[derive(Debug, Clone, Copy)]
pub struct BoundedPareto<T: Scalar = f64> {
    min: T,
    max: T,
    mu: T,
}

impl<T: SampleScalar> BoundedPareto<T> {
    pub fn new(min: T, max: T, mu: T) -> Result<Self, DistribError> {
        if !(min > T::zero() && max > min && mu > T::one())
            || !min.is_finite()
            || !max.is_finite()
            || !mu.is_finite()
        {
            return Err(DistribError::BadPareto {
                min: min.to_f64().unwrap_or(f64::NAN),
                max: max.to_f64().unwrap_or(f64::NAN),
                mu: mu.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(BoundedPareto { min, max, mu })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let a = self.mu - T::one();
        let ratio = (self.min / self.max).powf(a);
        let u = T::open01(rng);
        let l = self.min / (T::one() - u * (T::one() - ratio)).powf(T::one() / a);
        // Guard against rounding at the tail end.
        l.max(self.min).min(self.max)
    }

    /// Exact survival function P(L > l), used by tests as an oracle.
    pub fn survival(&self, l: T) -> T {
        let a = self.mu - T::one();
        let ratio = (self.min / self.max).powf(a);
        (((self.min / l).powf(a) - ratio) / (T::one() - ratio))
            .max(T::zero())
            .min(T::one())
    }
}
