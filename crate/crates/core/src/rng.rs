//! Seeded uniform variate generation.
//!
//! Every stochastic routine in the crate draws open-interval uniforms from a
//! counter-based ChaCha stream and maps them through quantile functions, so
//! a (seed, draw index) pair fully determines every sampled score no matter
//! how work is scheduled across threads.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Uniform stream backing all inverse-transform sampling.
pub struct UniformStream {
    rng: ChaCha8Rng,
}

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        UniformStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Next uniform draw strictly inside (0, 1).
    ///
    /// Uses 52 random bits centered on lattice midpoints: the extremes are
    /// 2^-53 and 1 - 2^-53, both exactly representable, so quantile
    /// functions never see 0 or 1.
    pub fn next_open01(&mut self) -> f64 {
        ((self.rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / 4503599627370496.0)
    }

    /// Fill `out` with open-interval uniforms.
    pub fn fill_open01(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.next_open01();
        }
    }
}

/// SplitMix64 finalizer; full-period bijective mixer on u64.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_is_deterministic_per_seed() {
        let mut a = UniformStream::new(7);
        let mut b = UniformStream::new(7);
        for _ in 0..1000 {
            assert_eq!(a.next_open01().to_bits(), b.next_open01().to_bits());
        }
        let mut c = UniformStream::new(8);
        let first: Vec<f64> = (0..8).map(|_| UniformStream::new(7).next_open01()).collect();
        assert!(first.iter().all(|&x| x == first[0]));
        assert_ne!(UniformStream::new(7).next_open01(), c.next_open01());
    }

    #[test]
    fn draws_stay_strictly_inside_unit_interval() {
        let mut s = UniformStream::new(123);
        let mut lo = 1.0f64;
        let mut hi = 0.0f64;
        for _ in 0..200_000 {
            let u = s.next_open01();
            assert!(u > 0.0 && u < 1.0);
            lo = lo.min(u);
            hi = hi.max(u);
        }
        // The mean of 2e5 draws should be near 0.5; crude sanity check.
        assert!(lo < 0.01 && hi > 0.99);
    }

    #[test]
    fn mix64_changes_on_any_input_change() {
        assert_ne!(mix64(0), mix64(1));
        assert_ne!(mix64(u64::MAX), mix64(u64::MAX - 1));
        // Bijective mixers cannot collide on distinct inputs mapped from a
        // small dense range.
        let mut seen = std::collections::HashSet::new();
        for i in 0..10_000u64 {
            assert!(seen.insert(mix64(i)));
        }
    }
}
