//! Scalar abstraction for the numeric kernels.

use rand::distributions::uniform::SampleUniform;
use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal, Open01, StandardNormal};

/// Floating-point scalar the math kernels are generic over.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::NumAssignOps
    + std::fmt::Debug
    + std::fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand cast from an `f64` literal into the generic scalar.
#[inline]
pub fn cst<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("literal representable in scalar type")
}

/// Scalars that can be drawn from the random distributions the simulator
/// uses. Implemented concretely for `f32`/`f64` so downstream generic code
/// needs no `rand_distr` bound soup.
pub trait SampleScalar: Scalar + SampleUniform {
    /// Draw from N(mean, sd). `sd == 0` returns `mean` exactly.
    fn normal<R: Rng + ?Sized>(rng: &mut R, mean: Self, sd: Self) -> Self;
    /// Draw from a log-normal with the given underlying normal parameters.
    fn lognormal<R: Rng + ?Sized>(rng: &mut R, mu: Self, sigma: Self) -> Self;
    /// Draw from the open interval (0, 1).
    fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self;
    /// Draw uniformly from [lo, hi).
    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self;
}

macro_rules! impl_sample_scalar {
    ($t:ty) => {
        impl SampleScalar for $t {
            fn normal<R: Rng + ?Sized>(rng: &mut R, mean: Self, sd: Self) -> Self {
                if sd == 0.0 {
                    return mean;
                }
                Normal::new(mean, sd).expect("finite normal params").sample(rng)
            }

            fn lognormal<R: Rng + ?Sized>(rng: &mut R, mu: Self, sigma: Self) -> Self {
                LogNormal::new(mu, sigma)
                    .expect("finite log-normal params")
                    .sample(rng)
            }

            fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
                Open01.sample(rng)
            }

            fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
                if lo == hi {
                    return lo;
                }
                rng.gen_range(lo..hi)
            }
        }
    };
}

impl_sample_scalar!(f32);
impl_sample_scalar!(f64);

// Keep the StandardNormal bound alive for the macro body above; `rand_distr`
// routes `Normal::sample` through it.
#[allow(dead_code)]
fn _assert_standard_normal<T>()
where
    StandardNormal: Distribution<T>,
{
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn zero_sd_normal_is_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let v: f64 = SampleScalar::normal(&mut rng, 8.4, 0.0);
        assert_eq!(v, 8.4);
    }

    #[test]
    fn cst_round_trips_common_literals() {
        assert_eq!(cst::<f64>(0.175), 0.175);
        assert_eq!(cst::<f32>(0.5), 0.5f32);
    }
}
