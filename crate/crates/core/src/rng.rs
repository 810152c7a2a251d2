//! Seeded randomness.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] seeded from a
//! `u64`. Independent streams (one per instance, per campaign cell, per
//! light-cone pair, ...) are obtained with [`derive_seed`], which folds a list
//! of coordinates into the base seed with the SplitMix64 finalizer. The
//! derivation is platform independent, so a seed printed in a CSV row is
//! enough to replay that row.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives a child seed from `base` and a path of coordinates.
///
/// `derive_seed(s, &[a, b])` differs from `derive_seed(s, &[b, a])` and from
/// `derive_seed(s, &[a])`.
pub fn derive_seed(base: u64, coords: &[u64]) -> u64 {
    let mut h = splitmix64(base ^ 0x5851_F42D_4C95_7F2D);
    for (k, &c) in coords.iter().enumerate() {
        h = splitmix64(h ^ splitmix64(c.wrapping_add((k as u64 + 1) << 56)));
    }
    h
}

/// Stable 64-bit hash of a string, used to turn labels into seed coordinates.
pub fn label_coord(label: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
