//! Seeded sampling helpers.
//!
//! Every randomized check uses [`ChaCha8Rng`] seeded through
//! `SeedableRng::seed_from_u64`, so a seed reproduces the same samples on
//! every platform.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng;

use crate::projgeom::PencilPoint;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex number with both parts uniform in `[-r, r]`.
pub fn complex_in<R: Rng + ?Sized>(rng: &mut R, r: f64) -> Complex64 {
    Complex64::new(rng.random_range(-r..=r), rng.random_range(-r..=r))
}

/// Point whose coordinates have real and imaginary parts uniform in `[-1, 1]`.
pub fn pencil_point<R: Rng + ?Sized>(rng: &mut R) -> PencilPoint {
    PencilPoint::new([
        complex_in(rng, 1.0),
        complex_in(rng, 1.0),
        complex_in(rng, 1.0),
        complex_in(rng, 1.0),
    ])
}

/// Nonzero complex scalar with modulus in `[0.1, 10]` and uniform argument.
pub fn nonzero_scalar<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let r = 10f64.powf(rng.random_range(-1.0..=1.0));
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, theta)
}
