//! Seeded randomness. Every stochastic component draws from a `SimRng`
//! created from an explicit 64-bit seed, so identical seeds reproduce runs
//! bit for bit. ChaCha8 is used as the fixed, portable generator.

use rand::SeedableRng;

pub type SimRng = rand_chacha::ChaCha8Rng;

/// Generator for a run with the given seed.
pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Per-trial generator: trial `index` of a batch uses `base_seed + index`.
pub fn trial_rng(base_seed: u64, index: u64) -> SimRng {
    rng_from_seed(base_seed.wrapping_add(index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_seed_same_stream() {
        let mut a = rng_from_seed(42);
        let mut b = rng_from_seed(42);
        for _ in 0..1000 {
            assert_eq!(a.gen::<u64>(), b.gen::<u64>());
        }
    }

    #[test]
    fn trial_seeds_are_offset() {
        let mut direct = rng_from_seed(107);
        let mut derived = trial_rng(100, 7);
        assert_eq!(direct.gen::<u64>(), derived.gen::<u64>());
    }
}
