//! Seeded randomness shared by the generators, the permutation streamer and
//! the Monte-Carlo verifiers.
//!
//! The generator is xoshiro256** whose 256-bit state is expanded from a
//! 64-bit seed with SplitMix64 (the reference seeding procedure). On top of
//! the raw `u64` stream everything else is defined here explicitly, so that a
//! port to another language reproduces identical streams:
//!
//! * `uniform01`: `(x >> 11) * 2^-53`, a double in `[0, 1)`.
//! * `below(n)`: Lemire's multiply-shift with rejection, unbiased in `[0, n)`.
//! * `shuffle`: Fisher–Yates from the last position down, swapping `i` with
//!   `below(i + 1)`.
//! * `derive_seed(base, i)`: one SplitMix64 output of `base + (i + 1) * GOLDEN`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

pub type Rng = Xoshiro256StarStar;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn seeded(seed: u64) -> Rng {
    Xoshiro256StarStar::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent child seed for run `index` of a batch seeded with `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

pub fn uniform01(rng: &mut Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform real in `[lo, hi)`.
pub fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform01(rng)
}

/// Unbiased integer in `[0, bound)`. `bound` must be positive.
pub fn below(rng: &mut Rng, bound: u64) -> u64 {
    assert!(bound > 0, "below() needs a positive bound");
    let mut m = (rng.next_u64() as u128) * (bound as u128);
    let mut low = m as u64;
    if low < bound {
        let threshold = bound.wrapping_neg() % bound;
        while low < threshold {
            m = (rng.next_u64() as u128) * (bound as u128);
            low = m as u64;
        }
    }
    (m >> 64) as u64
}

pub fn shuffle<T>(rng: &mut Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = below(rng, i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

/// Moves a uniform random `size`-sample (in sampling order) to the front of
/// `pool` (partial Fisher–Yates).
pub fn partial_shuffle<T>(rng: &mut Rng, pool: &mut [T], size: usize) {
    assert!(size <= pool.len());
    let n = pool.len();
    for i in 0..size {
        let j = i + below(rng, (n - i) as u64) as usize;
        pool.swap(i, j);
    }
}

/// Random `size`-subset of `0..n` in sampling order.
pub fn sample_indices(rng: &mut Rng, n: usize, size: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    partial_shuffle(rng, &mut pool, size);
    pool.truncate(size);
    pool
}
