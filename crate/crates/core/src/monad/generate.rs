//! Sample generators: an exact linear slice and a Gauss-Newton sampler.
//!
//! The slice fixes `F(x) = [P(x) | Q(x)]` with `P` banded (`x_0` on the
//! diagonal, `x_1` on the superdiagonal). Since `J` is off-diagonal,
//! `F J F^T = P Q^T - Q P^T`, which is linear in `Q`.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{certify, certify_float, primitive, InstantonSample, Provenance, DEFAULT_E1_SAMPLES};
use crate::linalg::{float::C64, Matrix};
use crate::rng::{derived, int_in, unit_f64};
use crate::scalar::{rational_to_f64, Rational, Scalar};
use crate::tensors::{a_dim, dgamma, gamma, ATensor, GammaMode};
use crate::Error;

/// Draw budget of [`generate_slice`].
pub const SLICE_DRAWS: usize = 32;
/// Restart budget of [`generate_newton`].
pub const NEWTON_RESTARTS: usize = 16;

const NEWTON_TOL: f64 = 1e-10;
const FLOAT_TOL: f64 = 1e-8;

fn check_k(k: usize) -> Result<(), Error> {
    if (1..=5).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidCharge(k))
    }
}

/// The fixed block `P`: `a[0][j][j] = a[1][j][j+1] = 1`.
pub fn slice_pattern(k: usize) -> ATensor<Rational> {
    let mut a = ATensor::zeros(k);
    for j in 0..k {
        a.set(0, j, j, Rational::from_i64(1));
        a.set(1, j, j + 1, Rational::from_i64(1));
    }
    a
}

/// Basis of the admissible `Q` blocks, as full A-coordinate vectors.
pub fn slice_kernel(k: usize) -> Vec<Vec<Rational>> {
    let p = slice_pattern(k);
    let n = p.n();
    let d = dgamma(&p);
    let q_cols: Vec<usize> = (0..a_dim(k)).filter(|c| c % n > k).collect();
    let restricted = Matrix::from_fn(d.rows(), q_cols.len(), |r, c| d[(r, q_cols[c])].clone());
    let kernel = if restricted.rows() == 0 {
        (0..q_cols.len())
            .map(|i| (0..q_cols.len()).map(|j| Rational::from_i64((i == j) as i64)).collect())
            .collect()
    } else {
        restricted.kernel_basis()
    };
    kernel
        .into_iter()
        .map(|v| {
            let mut full = alloc::vec![Rational::from_i64(0); a_dim(k)];
            for (c, x) in q_cols.iter().zip(v) {
                full[*c] = x;
            }
            full
        })
        .collect()
}

/// A certified exact sample from the banded slice.
pub fn generate_slice(k: usize, seed: u64) -> Result<InstantonSample<Rational>, Error> {
    check_k(k)?;
    let base = slice_pattern(k);
    let kernel = slice_kernel(k);
    let mut rng = derived(seed, 0x511CE);
    for draw in 0..SLICE_DRAWS {
        let mut coords = base.as_slice().to_vec();
        for v in &kernel {
            let c = Rational::from_i64(int_in(&mut rng, 3));
            if c.is_zero() {
                continue;
            }
            for (x, y) in coords.iter_mut().zip(v) {
                if !y.is_zero() {
                    *x = x.clone() + c.clone() * y.clone();
                }
            }
        }
        let a = primitive(&ATensor::from_vec(k, coords));
        let certificate = certify(&a, DEFAULT_E1_SAMPLES, seed)?;
        if certificate.is_instanton() {
            return Ok(InstantonSample { a, certificate, provenance: Provenance::SliceSolve { seed, draw } });
        }
    }
    Err(Error::NotFound(format!("no certified slice draw for k = {k}, seed = {seed}")))
}

/// A draw with `Q = P C` for a random symmetric `C`; `F = P [I | C]` has
/// the constant kernel `{(-C v, v)}`, so certification must reject it.
pub fn degenerate_slice_draw(k: usize, seed: u64) -> ATensor<Rational> {
    let mut rng = derived(seed, 0xDE6);
    let h = k + 1;
    let mut c = Matrix::<Rational>::zeros(h, h);
    for i in 0..h {
        for j in 0..=i {
            let v = Rational::from_i64(int_in(&mut rng, 4));
            c[(i, j)] = v.clone();
            c[(j, i)] = v;
        }
    }
    let mut a = slice_pattern(k);
    for j in 0..k {
        for m in 0..h {
            a.set(0, j, h + m, c[(j, m)].clone());
            a.set(1, j, h + m, c[(j + 1, m)].clone());
        }
    }
    a
}

/// Starting point of [`generate_newton`].
#[derive(Clone, Debug)]
pub enum NewtonStart {
    Random,
    Exact(ATensor<Rational>),
    /// An existing sample plus uniform noise of the given size.
    Perturbed(ATensor<Rational>, f64),
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Gauss-Newton on `gamma(A) = 0` with minimum-norm steps.
/// Returns `(A, iterations, relative residual)`.
fn newton_solve(mut a: ATensor<f64>, max_iter: usize) -> (ATensor<f64>, usize, f64, bool) {
    let k = a.k();
    let mut iterations = 0;
    loop {
        let g = gamma(&a, GammaMode::MatrixOfForms);
        let rel = num_traits::Float::sqrt(norm2(&g)) / norm2(a.as_slice()).max(f64::MIN_POSITIVE);
        if rel <= NEWTON_TOL {
            return (a, iterations, rel, true);
        }
        if iterations == max_iter || !rel.is_finite() {
            return (a, iterations, rel, false);
        }
        let d = dgamma(&a);
        let jac = DMatrix::from_row_slice(d.rows(), d.cols(), d.data());
        let rhs = DVector::from_column_slice(&g);
        let svd = jac.svd(true, true);
        let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let Ok(step) = svd.solve(&rhs, 1e-12 * top) else {
            return (a, iterations, rel, false);
        };
        let next: Vec<f64> = a.as_slice().iter().zip(step.iter()).map(|(x, s)| x - s).collect();
        a = ATensor::from_vec(k, next);
        iterations += 1;
    }
}

/// A float sample of `{gamma = 0}` certified with float tolerances.
pub fn generate_newton(
    k: usize,
    seed: u64,
    max_iter: usize,
    start: &NewtonStart,
) -> Result<InstantonSample<f64>, Error> {
    check_k(k)?;
    let mut last = f64::INFINITY;
    let restarts = if matches!(start, NewtonStart::Exact(_)) { 1 } else { NEWTON_RESTARTS };
    for attempt in 0..restarts {
        let mut rng = derived(seed, 0x6E77 + attempt as u64);
        let init = match start {
            NewtonStart::Random => {
                ATensor::from_vec(k, (0..a_dim(k)).map(|_| unit_f64(&mut rng)).collect())
            }
            NewtonStart::Exact(a) => a.map(rational_to_f64),
            NewtonStart::Perturbed(a, scale) => {
                let base = a.map(rational_to_f64);
                let size = num_traits::Float::sqrt(norm2(base.as_slice()) / a_dim(k) as f64);
                ATensor::from_vec(
                    k,
                    base.as_slice().iter().map(|x| x + scale * size * unit_f64(&mut rng)).collect(),
                )
            }
        };
        let (a, iterations, residual, converged) = newton_solve(init, max_iter);
        last = residual;
        if !converged {
            continue;
        }
        let certificate = certify_float(&a, DEFAULT_E1_SAMPLES, seed, FLOAT_TOL)?;
        if certificate.is_instanton() {
            return Ok(InstantonSample {
                a,
                certificate,
                provenance: Provenance::GaussNewton { seed, iterations, residual },
            });
        }
    }
    Err(Error::NoConvergence { residual: last })
}

/// Complex copy of a float sample.
pub fn complexify(a: &ATensor<f64>) -> ATensor<C64> {
    a.map(|x| C64::new(*x, 0.0))
}
