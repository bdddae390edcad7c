//! Seeded random number generation.
//!
//! All sampling goes through [`SeededRng`], a ChaCha stream cipher generator
//! seeded from a `u64`. The algorithm identifier is emitted in output
//! metadata so draws can be regenerated bit-for-bit.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::scalar::Real;

pub type SeededRng = ChaCha20Rng;

/// Identifier recorded alongside every sample.
pub const RNG_ALGORITHM: &str = "ChaCha20Rng/rand_chacha-0.3/seed_from_u64";

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Uniform draw on the open interval (0, 1) with 53-bit resolution.
#[inline]
pub fn open01<F: Real, R: Rng + ?Sized>(rng: &mut R) -> F {
    let u: f64 = rng.sample(Open01);
    let v = F::lit(u);
    // f32 rounding can land on an endpoint
    if v <= F::zero() {
        F::min_positive_value()
    } else if v >= F::one() {
        F::one() - F::epsilon()
    } else {
        v
    }
}
