//! Seeded randomness for generators and probes.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{Rational, Scalar};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream from a seed and a label.
pub fn derived(seed: u64, label: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn int_in(rng: &mut SeededRng, bound: i64) -> i64 {
    rng.random_range(-bound..=bound)
}

pub fn nonzero_int(rng: &mut SeededRng, bound: i64) -> i64 {
    loop {
        let v = int_in(rng, bound);
        if v != 0 {
            return v;
        }
    }
}

pub fn rational_vec(rng: &mut SeededRng, n: usize, bound: i64) -> Vec<Rational> {
    (0..n).map(|_| Rational::from_i64(int_in(rng, bound))).collect()
}

/// Nonzero integer vector as rationals.
pub fn nonzero_rational_vec(rng: &mut SeededRng, n: usize, bound: i64) -> Vec<Rational> {
    loop {
        let v = rational_vec(rng, n, bound);
        if v.iter().any(|x| !x.is_zero()) {
            return v;
        }
    }
}

pub fn unit_f64(rng: &mut SeededRng) -> f64 {
    rng.random_range(-1.0..1.0)
}
