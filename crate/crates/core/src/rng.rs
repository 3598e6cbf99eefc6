//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by a
//! 64-bit seed and addressed by a (domain, index) pair. ChaCha is a
//! counter-mode generator, so stream `k` can be opened directly without
//! advancing streams `0..k`; scheduling of parallel work therefore has no
//! effect on the numbers drawn.
//!
//! Key: `ChaCha8Rng::seed_from_u64(seed)`. Stream id: `domain << 48 | index`.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

const INDEX_BITS: u32 = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    /// Subsample draw and ordering for one decomposition iteration.
    Iteration = 1,
    /// Row resampling for one bootstrap replicate.
    Bootstrap = 2,
    /// One row of a synthetic dataset.
    SynthRow = 3,
}

/// Opens stream `index` of `domain` under `seed`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> Stream {
    debug_assert!(index < (1u64 << INDEX_BITS));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << INDEX_BITS) | index);
    rng
}

/// Derives an independent seed for nested work (e.g. the inner iterations of
/// bootstrap replicate `index`).
pub fn child_seed(seed: u64, domain: Domain, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ ((domain as u64) << INDEX_BITS)) ^ index)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Uniform draw on the open interval (0, 1) with 53 bits of resolution.
pub fn open_unit(rng: &mut Stream) -> f64 {
    let bits = rng.random::<u64>() >> 11;
    (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
