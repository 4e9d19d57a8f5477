//! Seed derivation for reproducible batch augmentation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random generator used by every stochastic operator.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for augmented copy `copy` of window `window` under base seed `seed`.
///
/// Depends only on the triple, so the order in which copies are produced
/// (or the number of threads producing them) never changes the result.
pub fn derive_seed(seed: u64, window: u64, copy: u64) -> u64 {
    let a = mix64(seed.wrapping_add(GOLDEN));
    let b = mix64(a ^ window.wrapping_add(GOLDEN.wrapping_mul(2)));
    mix64(b ^ copy.wrapping_add(GOLDEN.wrapping_mul(3)))
}
