//! Scalar backends: exact rationals, a word-sized prime field, and floats.

use core::fmt::Debug;
use core::ops::{Add, Mul, Neg, Sub};
use core::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Unbounded-precision rational number.
pub type Rational = num_rational::BigRational;

/// Ring operations shared by every backend, enough to build the
/// coordinate matrices of the tensor maps.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// `None` only when the rational cannot be represented (prime field
    /// with the modulus dividing the denominator).
    fn from_rational(q: &Rational) -> Option<Self>;
    /// Exact zero test; floats compare against literal zero.
    fn is_zero(&self) -> bool;
    /// Magnitude used by residual checks and pivot heuristics.
    fn magnitude(&self) -> f64;

    fn from_ratio(num: i64, den: i64) -> Self {
        let q = Rational::new(BigInt::from(num), BigInt::from(den));
        Self::from_rational(&q).expect("denominator not invertible in this backend")
    }
}

/// Backends with exact division, where elimination needs no tolerance.
pub trait ExactField: Scalar {
    fn inv(&self) -> Option<Self>;

    /// Row rank; backends may override with a faster exact route.
    fn matrix_rank(m: &crate::linalg::Matrix<Self>) -> usize {
        crate::linalg::exact::rank_by_elimination(m)
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(q: &Rational) -> Option<Self> {
        Some(q.clone())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn magnitude(&self) -> f64 {
        num_traits::Float::abs(rational_to_f64(self))
    }
}

impl ExactField for Rational {
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }

    fn matrix_rank(m: &crate::linalg::Matrix<Self>) -> usize {
        crate::linalg::exact::rational_rank(m)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(q: &Rational) -> Option<Self> {
        Some(rational_to_f64(q))
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn magnitude(&self) -> f64 {
        num_traits::Float::abs(*self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_rational(q: &Rational) -> Option<Self> {
        Some(Complex64::new(rational_to_f64(q), 0.0))
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Nearest double to a rational, robust to numerators and denominators
/// beyond the f64 exponent range.
pub fn rational_to_f64(q: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = nb - db - 60;
    let scaled = if shift >= 0 {
        q.numer() / (q.denom() << (shift as usize))
    } else {
        (q.numer() << ((-shift) as usize)) / q.denom()
    };
    let mant = scaled.to_f64().unwrap_or(0.0);
    mant * num_traits::Float::powi(2.0f64, shift as i32)
}

// ---------------------------------------------------------------------------
// Prime field

/// Default modulus 2^61 - 1.
pub const DEFAULT_PRIME: u64 = (1u64 << 61) - 1;

static MODULUS: AtomicU64 = AtomicU64::new(DEFAULT_PRIME);

/// Currently active prime for [`Fp`].
pub fn prime() -> u64 {
    MODULUS.load(Ordering::Relaxed)
}

/// Install a new modulus. Rejects composites and anything below 2^31.
/// Values created under a previous modulus must not be mixed with new ones.
pub fn set_prime(p: u64) -> Result<(), crate::Error> {
    if p < (1u64 << 31) || !is_prime_u64(p) {
        return Err(crate::Error::Precondition(alloc::format!(
            "prime backend needs a prime >= 2^31, got {p}"
        )));
    }
    MODULUS.store(p, Ordering::Relaxed);
    Ok(())
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Element of Z/pZ for the process-wide prime (see [`set_prime`]).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fp(u64);

impl Fp {
    pub fn new(v: u64) -> Self {
        Fp(v % prime())
    }

    pub fn value(self) -> u64 {
        self.0
    }

    fn reduce_bigint(n: &BigInt) -> u64 {
        let p = BigInt::from(prime());
        let r = n.mod_floor(&p);
        r.to_u64().unwrap_or(0)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, o: Fp) -> Fp {
        let p = prime();
        let s = self.0 as u128 + o.0 as u128;
        Fp((s % p as u128) as u64)
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, o: Fp) -> Fp {
        let p = prime();
        Fp(if self.0 >= o.0 { self.0 - o.0 } else { p - (o.0 - self.0) })
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, o: Fp) -> Fp {
        Fp(mul_mod(self.0, o.0, prime()))
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        if self.0 == 0 {
            self
        } else {
            Fp(prime() - self.0)
        }
    }
}

impl Scalar for Fp {
    fn zero() -> Self {
        Fp(0)
    }
    fn one() -> Self {
        Fp(1)
    }
    fn from_i64(v: i64) -> Self {
        let p = prime() as i128;
        Fp((v as i128).rem_euclid(p) as u64)
    }
    fn from_rational(q: &Rational) -> Option<Self> {
        let d = Fp(Self::reduce_bigint(q.denom()));
        let n = Fp(Self::reduce_bigint(q.numer()));
        d.inv().map(|di| n * di)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn magnitude(&self) -> f64 {
        if self.0 == 0 {
            0.0
        } else {
            1.0
        }
    }
}

impl ExactField for Fp {
    fn inv(&self) -> Option<Self> {
        if self.0 == 0 {
            None
        } else {
            let p = prime();
            Some(Fp(pow_mod(self.0, p - 2, p)))
        }
    }
}

/// Absolute value helper for rationals (used by pivot heuristics).
pub fn rational_abs(q: &Rational) -> Rational {
    q.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_prime_is_prime() {
        assert!(is_prime_u64(DEFAULT_PRIME));
        assert!(!is_prime_u64(DEFAULT_PRIME - 2));
    }

    #[test]
    fn fp_inverse_roundtrip() {
        let a = Fp::from_i64(-123_456_789);
        assert_eq!(a * a.inv().unwrap(), Fp::one());
        assert_eq!(Fp::from_ratio(1, 2) * Fp::from_i64(2), Fp::one());
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = BigInt::from(3) << 2000usize;
        let q = Rational::new(big.clone(), big * BigInt::from(4));
        assert!((rational_to_f64(&q) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn set_prime_rejects_small_or_composite() {
        assert!(set_prime(97).is_err());
        assert!(set_prime(DEFAULT_PRIME - 2).is_err());
    }
}
