//! Seeded randomness.
//!
//! Every random stream is a SplitMix64 generator. Sub-streams are derived
//! from a parent seed and an index with [`derive`], so the content produced
//! for index `i` never depends on how many other indices were generated or
//! in which order.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of sub-stream `index` of `seed`: the first SplitMix64 output for
/// state `seed + (index + 1) * gamma`.
pub fn derive(seed: u64, index: u64) -> u64 {
    let state = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    SplitMix64::seed_from_u64(state).next_u64()
}

pub fn stream(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Uniform integer in `0..bound` by rejection sampling.
pub fn below(rng: &mut impl RngCore, bound: u64) -> u64 {
    assert!(bound > 0);
    let zone = u64::MAX - (u64::MAX % bound + 1) % bound;
    loop {
        let x = rng.next_u64();
        if x <= zone {
            return x % bound;
        }
    }
}

/// Uniform float in `[0, 1)` from the top 53 bits.
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform `d`-subset of `pool`, returned sorted (partial Fisher-Yates).
pub fn sample_subset(rng: &mut impl RngCore, pool: &[usize], d: usize) -> Vec<usize> {
    assert!(d <= pool.len());
    let mut v = pool.to_vec();
    for j in 0..d {
        let r = j + below(rng, (v.len() - j) as u64) as usize;
        v.swap(j, r);
    }
    v.truncate(d);
    v.sort_unstable();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_is_stable_and_spreads() {
        assert_eq!(derive(7, 3), derive(7, 3));
        assert_ne!(derive(7, 3), derive(7, 4));
        assert_ne!(derive(7, 3), derive(8, 3));
    }

    #[test]
    fn below_in_range() {
        let mut r = stream(1);
        for b in [1u64, 2, 3, 7, 1000] {
            for _ in 0..200 {
                assert!(below(&mut r, b) < b);
            }
        }
    }

    #[test]
    fn subset_properties() {
        let mut r = stream(5);
        let pool: Vec<usize> = (0..10).collect();
        for d in 0..=10 {
            let s = sample_subset(&mut r, &pool, d);
            assert_eq!(s.len(), d);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
