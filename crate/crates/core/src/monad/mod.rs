//! Instanton conditions, sample generators, the group action, and plane
//! restrictions.
//!
//! A tensor `A` is an instanton datum when
//! - (E1) `F(x)` has rank `k` for every `x != 0`,
//! - (E2) `gamma(A) = 0`, and
//! - (E3) `beta(A, h) != 0` for every `h != 0`, i.e. `rank flat(A) = 2k+2`.
//!
//! E2 and E3 are decided exactly. E1 is sampled at random rational points;
//! a failure always comes with an exact witness.

mod generate;

use alloc::string::ToString;
use alloc::vec::Vec;

use num_complex::Complex64;

pub use generate::{
    complexify, degenerate_slice_draw, generate_newton, generate_slice, slice_kernel, slice_pattern,
    NewtonStart, NEWTON_RESTARTS, SLICE_DRAWS,
};

use crate::linalg::{exact, float, Matrix};
use crate::rng::{derived, int_in, SeededRng};
use crate::scalar::{rational_to_f64, Rational, Scalar};
use crate::tensors::{act_a, beta_matrix, epsilon_at, gamma, ATensor, GammaMode, GroupElement};
use crate::Error;

/// Default number of random points for the E1 check.
pub const DEFAULT_E1_SAMPLES: usize = 200;

/// Bound on the integer coordinates of E1 sample points.
const E1_BOUND: i64 = 1000;

#[derive(Clone, Debug, PartialEq)]
pub enum E2Status {
    ExactZero,
    /// Largest `|gamma|` coefficient (float backends: relative to `|A|^2`).
    Residual(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum E1Status<T> {
    PassProbabilistic { samples: usize },
    /// `epsilon(A, f (x) b) = 0` with `f`, `b` nonzero.
    Fail { f: Vec<T>, b: Vec<T> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonadCertificate<T> {
    pub k: usize,
    pub e2: E2Status,
    pub e3_rank: usize,
    pub e1: E1Status<T>,
    /// `dim ker flat(A)`.
    pub h0_k: usize,
    /// Tolerance used by the float backend, `None` when exact.
    pub tolerance: Option<f64>,
}

impl<T> MonadCertificate<T> {
    pub fn e1_passes(&self) -> bool {
        matches!(self.e1, E1Status::PassProbabilistic { .. })
    }

    pub fn e2_passes(&self) -> bool {
        match self.e2 {
            E2Status::ExactZero => true,
            E2Status::Residual(r) => self.tolerance.is_some_and(|t| r <= t),
        }
    }

    pub fn e3_passes(&self) -> bool {
        self.e3_rank == 2 * self.k + 2
    }

    pub fn is_instanton(&self) -> bool {
        self.e1_passes() && self.e2_passes() && self.e3_passes()
    }

    /// E1 and E2 hold but E3 fails, which the theory rules out.
    pub fn is_internal_error(&self) -> bool {
        self.e1_passes() && self.e2_passes() && !self.e3_passes()
    }

    /// `(e1, e2, e3)` pass pattern.
    pub fn pattern(&self) -> (bool, bool, bool) {
        (self.e1_passes(), self.e2_passes(), self.e3_passes())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    SliceSolve { seed: u64, draw: usize },
    GaussNewton { seed: u64, iterations: usize, residual: f64 },
    File,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstantonSample<T> {
    pub a: ATensor<T>,
    pub certificate: MonadCertificate<T>,
    pub provenance: Provenance,
}

fn check_samples(e1_samples: usize) -> Result<(), Error> {
    if e1_samples == 0 {
        return Err(Error::Precondition("e1_samples must be at least 1".to_string()));
    }
    Ok(())
}

/// Exact certificate over the rationals.
pub fn certify(a: &ATensor<Rational>, e1_samples: usize, seed: u64) -> Result<MonadCertificate<Rational>, Error> {
    check_samples(e1_samples)?;
    let k = a.k();
    let g = gamma(a, GammaMode::MatrixOfForms);
    let e2 = if g.iter().all(|x| x.is_zero()) {
        E2Status::ExactZero
    } else {
        E2Status::Residual(g.iter().map(|x| x.magnitude()).fold(0.0, f64::max))
    };
    let e3_rank = beta_matrix(a).rank();
    let h0_k = a.n() - a.flat().rank();
    let mut rng = derived(seed, 0xE1);
    let mut e1 = E1Status::PassProbabilistic { samples: e1_samples };
    for _ in 0..e1_samples {
        let f = random_point(&mut rng);
        let eps = epsilon_at(a, &f);
        if eps.rank() < k {
            let b = eps.kernel_basis().swap_remove(0);
            e1 = E1Status::Fail { f, b };
            break;
        }
    }
    Ok(MonadCertificate { k, e2, e3_rank, e1, h0_k, tolerance: None })
}

fn random_point(rng: &mut SeededRng) -> Vec<Rational> {
    loop {
        let f: Vec<Rational> = (0..4).map(|_| Rational::from_i64(int_in(rng, E1_BOUND))).collect();
        if f.iter().any(|x| !x.is_zero()) {
            return f;
        }
    }
}

/// Float certificate: E2 by `|gamma| <= tol |A|^2`, ranks by SVD.
pub fn certify_float(a: &ATensor<f64>, e1_samples: usize, seed: u64, tol: f64) -> Result<MonadCertificate<f64>, Error> {
    check_samples(e1_samples)?;
    let k = a.k();
    let ac = a.map(|x| Complex64::new(*x, 0.0));
    let g = gamma(a, GammaMode::MatrixOfForms);
    let norm_a2: f64 = a.as_slice().iter().map(|x| x * x).sum();
    let res = num_traits::Float::sqrt(g.iter().map(|x| x * x).sum::<f64>()) / norm_a2.max(f64::MIN_POSITIVE);
    let e2 = E2Status::Residual(res);
    let e3_rank = float::rank(&beta_matrix(&ac), tol);
    let h0_k = a.n() - float::rank(&ac.flat(), tol);
    let mut rng = derived(seed, 0xE1);
    let mut e1 = E1Status::PassProbabilistic { samples: e1_samples };
    for _ in 0..e1_samples {
        let f: Vec<f64> = (0..4).map(|_| crate::rng::unit_f64(&mut rng)).collect();
        let fc: Vec<Complex64> = f.iter().map(|x| Complex64::new(*x, 0.0)).collect();
        let eps = epsilon_at(&ac, &fc);
        if float::rank(&eps, tol) < k {
            let (_, b) = float::smallest_singular(&eps);
            e1 = E1Status::Fail { f, b: b.iter().map(|z| z.re).collect() };
            break;
        }
    }
    Ok(MonadCertificate { k, e2, e3_rank, e1, h0_k, tolerance: Some(tol) })
}

/// `g . A`; the symplectic factor is checked exactly.
pub fn group_act(g: &GroupElement<Rational>, a: &ATensor<Rational>) -> Result<ATensor<Rational>, Error> {
    let k = a.k();
    if g.m.rows() != 4 || g.p.rows() != k || g.q.rows() != a.n() {
        return Err(Error::ShapeMismatch("group element does not match the charge".to_string()));
    }
    if !g.is_symplectic() {
        return Err(Error::Precondition("middle factor is not symplectic".to_string()));
    }
    Ok(act_a(g, a))
}

/// Echelon basis `u_1, u_2, u_3` of the plane `{x : fstar(x) = 0}`.
pub fn plane_basis(fstar: &[Rational]) -> Result<Vec<Vec<Rational>>, Error> {
    if fstar.len() != 4 || fstar.iter().all(|x| x.is_zero()) {
        return Err(Error::Precondition("plane covector must be a nonzero 4-vector".to_string()));
    }
    Ok(Matrix::from_vec(1, 4, fstar.to_vec()).kernel_basis())
}

/// The `3k x (2k+2)` restriction matrix with rows `F(u_m)`.
pub fn restriction_matrix<T: Scalar>(a: &ATensor<T>, basis: &[Vec<T>]) -> Matrix<T> {
    let k = a.k();
    let blocks: Vec<Matrix<T>> = basis.iter().map(|u| a.monad_matrix(u)).collect();
    Matrix::from_fn(basis.len() * k, a.n(), |r, l| blocks[r / k][(r % k, l)].clone())
}

/// `h0(E|_H) = dim ker M_H` for the plane `H = {fstar = 0}`.
pub fn h0_plane(a: &ATensor<Rational>, fstar: &[Rational]) -> Result<usize, Error> {
    let basis = plane_basis(fstar)?;
    let m = restriction_matrix(a, &basis);
    Ok(a.n() - m.rank())
}

/// Float version of [`h0_plane`].
pub fn h0_plane_float(a: &ATensor<Complex64>, fstar: &[Complex64], tol: f64) -> Result<usize, Error> {
    if fstar.len() != 4 || fstar.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::Precondition("plane covector must be a nonzero 4-vector".to_string()));
    }
    let basis = float::null_space(&Matrix::from_vec(1, 4, fstar.to_vec()), 1e-12);
    let m = restriction_matrix(a, &basis);
    Ok(a.n() - float::rank(&m, tol))
}

/// Rational tensor rescaled to a primitive integer tensor.
pub fn primitive(a: &ATensor<Rational>) -> ATensor<Rational> {
    ATensor::from_vec(a.k(), exact::primitive_integer(a.as_slice()))
}

pub fn to_f64(a: &ATensor<Rational>) -> ATensor<f64> {
    a.map(rational_to_f64)
}
