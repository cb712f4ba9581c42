//! Complex floating point routines backed by nalgebra: SVD ranks and null
//! spaces, pencil determinants, common eigenvectors, and symmetric
//! congruence normal forms.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{poly, Matrix};
use crate::scalar::Scalar;
use crate::Error;

pub type C64 = Complex64;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn to_na(m: &Matrix<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)])
}

pub fn from_na(m: &DMatrix<C64>) -> Matrix<C64> {
    Matrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix<C64>) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    let svd = to_na(m).svd(false, false);
    svd.singular_values.iter().copied().collect()
}

/// Number of singular values above `tol` times the largest one.
pub fn rank(m: &Matrix<C64>, tol: f64) -> usize {
    let sv = singular_values(m);
    let Some(&top) = sv.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

/// Orthonormal basis of the numerical right kernel, with `tol` relative
/// to the largest singular value. Always returns the full dimension
/// `cols - rank`.
pub fn null_space(m: &Matrix<C64>, tol: f64) -> Vec<Vec<C64>> {
    let (sv, v) = right_singular(m);
    let top = sv.first().copied().unwrap_or(0.0);
    let n = m.cols();
    (0..n)
        .filter(|&i| top == 0.0 || sv[i] <= tol * top)
        .map(|i| v[i].clone())
        .collect()
}

/// Right singular vector of the smallest singular value, with that value.
pub fn smallest_singular(m: &Matrix<C64>) -> (f64, Vec<C64>) {
    let (sv, v) = right_singular(m);
    let n = m.cols();
    (sv[n - 1], v[n - 1].clone())
}

/// Right singular vector of the largest singular value, with that value.
pub fn largest_singular(m: &Matrix<C64>) -> (f64, Vec<C64>) {
    let (sv, v) = right_singular(m);
    (sv[0], v[0].clone())
}

/// All `cols` singular values (zero padded) with their right singular
/// vectors, descending.
fn right_singular(m: &Matrix<C64>) -> (Vec<f64>, Vec<Vec<C64>>) {
    let n = m.cols();
    let rows = m.rows().max(n);
    let padded = DMatrix::from_fn(rows, n, |r, c| if r < m.rows() { m[(r, c)] } else { c64z() });
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let vecs = (0..n).map(|i| (0..n).map(|j| vt[(i, j)].conj()).collect()).collect();
    (sv, vecs)
}

fn c64z() -> C64 {
    C64::new(0.0, 0.0)
}

/// Eigenvalues via a complex Schur decomposition.
pub fn eigenvalues(m: &Matrix<C64>) -> Result<Vec<C64>, Error> {
    assert!(m.is_square());
    if m.rows() == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::linalg::Schur::try_new(to_na(m), 1e-15, 100_000)
        .ok_or(Error::NoConvergence { residual: f64::NAN })?;
    let ev = schur.eigenvalues().ok_or(Error::NoConvergence { residual: f64::NAN })?;
    Ok(ev.iter().copied().collect())
}

pub fn determinant(m: &Matrix<C64>) -> C64 {
    if m.rows() == 0 {
        return c(1.0);
    }
    to_na(m).determinant()
}

pub fn inverse(m: &Matrix<C64>) -> Option<Matrix<C64>> {
    to_na(m).try_inverse().map(|i| from_na(&i))
}

pub fn norm(v: &[C64]) -> f64 {
    num_traits::Float::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

pub fn normalize(v: &[C64]) -> Vec<C64> {
    let n = norm(v);
    v.iter().map(|z| z / n).collect()
}

pub fn sub_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_vec(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

/// Hermitian inner product `<a, b> = sum conj(a_i) b_i`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Minimum-norm least-squares solution of `m x = b`.
pub fn least_squares(m: &Matrix<C64>, b: &[C64], tol: f64) -> Vec<C64> {
    let svd = to_na(m).svd(true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let rhs = nalgebra::DVector::from_column_slice(b);
    match svd.solve(&rhs, tol * top.max(f64::MIN_POSITIVE)) {
        Ok(x) => x.iter().copied().collect(),
        Err(_) => alloc::vec![c64z(); m.cols()],
    }
}

/// Outcome of [`pencil_roots`].
#[derive(Clone, Debug, PartialEq)]
pub enum PencilRoots {
    /// Finite roots with multiplicity; fewer than `n` when `R1` is singular.
    Roots(Vec<C64>),
    IdenticallySingular,
}

/// Roots of `det(R2 - mu R1)` by evaluation at roots of unity, inverse
/// DFT interpolation, and companion-matrix eigenvalues.
pub fn pencil_roots(r1: &Matrix<C64>, r2: &Matrix<C64>, tol: f64) -> Result<PencilRoots, Error> {
    if !r1.is_square() || r1.rows() != r2.rows() || r1.cols() != r2.cols() {
        return Err(Error::ShapeMismatch("pencil blocks must be square and of equal size".into()));
    }
    let n = r1.rows();
    let probe = C64::new(0.618_033_988_749_894_9, 0.414_213_562_373_095_1);
    if rank(&r2.sub(&r1.scale(&probe)), tol) < n {
        return Ok(PencilRoots::IdenticallySingular);
    }
    let n1 = r1.frobenius();
    let n2 = r2.frobenius();
    let radius = if n1 > 0.0 { (n2 / n1).max(1e-3) } else { 1.0 };
    let values: Vec<C64> = poly::unit_circle_nodes(n + 1)
        .into_iter()
        .map(|w| determinant(&r2.sub(&r1.scale(&(w * radius)))))
        .collect();
    let coeffs = poly::interpolate_on_circle(&values, radius);
    let roots = poly::roots(&coeffs, tol)?;
    Ok(PencilRoots::Roots(poly::merge_clusters(roots, 1e-5)))
}

/// Common eigenvector of commuting `U`, `V`: an eigenspace of `U` is
/// intersected with an eigenvector of `V` restricted to it.
pub fn common_eigenvector(
    u: &Matrix<C64>,
    v: &Matrix<C64>,
    tol: f64,
) -> Result<(Vec<C64>, C64, C64), Error> {
    if !u.is_square() || u.rows() != v.rows() || !v.is_square() {
        return Err(Error::ShapeMismatch("common eigenvector needs equal square matrices".into()));
    }
    let n = u.rows();
    let (nu, nv) = (u.frobenius(), v.frobenius());
    let comm = u.mul(v).sub(&v.mul(u)).frobenius();
    if comm > tol * (nu * nv).max(f64::MIN_POSITIVE) {
        return Err(Error::NonCommuting { norm: comm });
    }
    let scale_u = nu.max(1.0);
    let scale_v = nv.max(1.0);
    let mut best: Option<(f64, Vec<C64>, C64, C64)> = None;
    for lam in eigenvalues(u)? {
        let shifted = u.sub(&Matrix::identity(n).scale(&lam));
        let mut basis = null_space(&shifted, 1e-6);
        if basis.is_empty() {
            basis.push(smallest_singular(&shifted).1);
        }
        let q = Matrix::from_fn(n, basis.len(), |r, c| basis[c][r]);
        let qh = Matrix::from_fn(basis.len(), n, |r, c| basis[r][c].conj());
        let w = qh.mul(v).mul(&q);
        for nu_w in eigenvalues(&w)? {
            let shifted_w = w.sub(&Matrix::identity(w.rows()).scale(&nu_w));
            let y = smallest_singular(&shifted_w).1;
            let f = normalize(&q.mul_vec(&y));
            let uf = u.mul_vec(&f);
            let vf = v.mul_vec(&f);
            let eu = dot(&f, &uf);
            let ev = dot(&f, &vf);
            let res = (norm(&sub_vec(&uf, &scale_vec(&f, eu))) / scale_u)
                .max(norm(&sub_vec(&vf, &scale_vec(&f, ev))) / scale_v);
            if best.as_ref().is_none_or(|b| res < b.0) {
                best = Some((res, f, eu, ev));
            }
        }
        if best.as_ref().is_some_and(|b| b.0 <= tol) {
            break;
        }
    }
    match best {
        Some((res, f, eu, ev)) if res <= 10.0 * tol => Ok((f, eu, ev)),
        Some((res, ..)) => Err(Error::VerificationFailed(alloc::format!(
            "common eigenvector residual {res:e}"
        ))),
        None => Err(Error::NotFound("no eigenvalues".into())),
    }
}

/// Congruence normal form of a complex symmetric matrix: returns `T`
/// and `r` with `T^T M T = diag(1,..,1,0,..,0)` (`r` ones).
pub fn symmetric_congruence_normalize(m: &Matrix<C64>, tol: f64) -> Result<(Matrix<C64>, usize), Error> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch("congruence needs a square matrix".into()));
    }
    let n = m.rows();
    let scale = m.max_abs();
    for i in 0..n {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).norm() > tol * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::Precondition("matrix is not symmetric".into()));
            }
        }
    }
    let mut w = m.clone();
    let mut t = Matrix::<C64>::identity(n);
    let thresh = tol * scale;
    let mut s = 0;
    while s < n {
        let max_diag = (s..n).map(|i| w[(i, i)].norm()).fold(0.0, f64::max);
        let mut max_off = 0.0;
        let mut off = (s, s);
        for i in s..n {
            for j in s..i {
                if w[(i, j)].norm() > max_off {
                    max_off = w[(i, j)].norm();
                    off = (i, j);
                }
            }
        }
        if max_diag <= thresh && max_off <= thresh {
            break;
        }
        if max_diag < 1e-3 * max_off || max_diag <= thresh {
            // all diagonal entries negligible: col i += col j makes w_ii = 2 w_ij
            let (i, j) = off;
            add_column(&mut w, &mut t, i, j, c(1.0));
        }
        let max_diag = (s..n).map(|i| w[(i, i)].norm()).fold(0.0, f64::max);
        let p = (s..n).find(|&i| w[(i, i)].norm() >= 1e-3 * max_diag).expect("pivot exists");
        swap_congruence(&mut w, &mut t, s, p);
        let d = w[(s, s)];
        for j in s + 1..n {
            let f = w[(s, j)] / d;
            if f.norm() != 0.0 {
                add_column(&mut w, &mut t, j, s, -f);
            }
        }
        let inv = c(1.0) / d.sqrt();
        for r in 0..n {
            t[(r, s)] *= inv;
            w[(r, s)] *= inv;
        }
        for cidx in 0..n {
            w[(s, cidx)] *= inv;
        }
        s += 1;
    }
    let check = t.transpose().mul(m).mul(&t);
    let target = Matrix::from_fn(n, n, |i, j| if i == j && i < s { c(1.0) } else { c(0.0) });
    let res = check.sub(&target).max_abs();
    if res > 1e3 * tol * scale.max(1.0) {
        return Err(Error::VerificationFailed(alloc::format!("congruence residual {res:e}")));
    }
    Ok((t, s))
}

/// Congruence by the elementary column operation `col_i += f col_j`.
fn add_column(w: &mut Matrix<C64>, t: &mut Matrix<C64>, i: usize, j: usize, f: C64) {
    let n = w.rows();
    for r in 0..n {
        let v = t[(r, j)];
        t[(r, i)] += f * v;
    }
    for r in 0..n {
        let v = w[(r, j)];
        w[(r, i)] += f * v;
    }
    for cidx in 0..n {
        let v = w[(j, cidx)];
        w[(i, cidx)] += f * v;
    }
}

fn swap_congruence(w: &mut Matrix<C64>, t: &mut Matrix<C64>, a: usize, b: usize) {
    if a == b {
        return;
    }
    let n = w.rows();
    for r in 0..n {
        let tmp = t[(r, a)];
        t[(r, a)] = t[(r, b)];
        t[(r, b)] = tmp;
        let tmp = w[(r, a)];
        w[(r, a)] = w[(r, b)];
        w[(r, b)] = tmp;
    }
    for cidx in 0..n {
        let tmp = w[(a, cidx)];
        w[(a, cidx)] = w[(b, cidx)];
        w[(b, cidx)] = tmp;
    }
}

/// Lift an exact or real matrix into the complex backend.
pub fn complexify<T: Scalar>(m: &Matrix<T>, conv: impl Fn(&T) -> f64) -> Matrix<C64> {
    m.map(|x| c(conv(x)))
}
