use alloc::vec::Vec;

use super::{
    a_dim, omega, omega_basis, omega_unit, pair_index, s_dim, sym_index, sym_of, ATensor,
    CTensor, STensor,
};
use crate::linalg::{float, Matrix};
use crate::scalar::{ExactField, Scalar};
use num_complex::Complex64;

/// How [`gamma`] is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaMode {
    /// Half the sum over all index tuples of the defining formula.
    Coefficient,
    /// Quadric entries of the skew matrix of forms `F(x) J F(x)^T`.
    MatrixOfForms,
}

/// Ratio between the two [`GammaMode`]s: coefficient = c * matrix-of-forms.
pub const GAMMA_MODE_CONSTANT: i64 = 1;

/// Adjointness constant: `<dgamma(A) B, S> = c <xi(A,S), B>_omega` with
/// `c = ADJOINT_NUM / ADJOINT_DEN`.
pub const ADJOINT_NUM: i64 = 1;
pub const ADJOINT_DEN: i64 = 4;

/// `gamma(A)` in `S^2 C4* (x) Lambda^2 Ck*`: entry
/// `pair_index(s,t)*10 + sym_index(p,q)` is the coefficient of the
/// monomial `f*_p f*_q (x) b*_s ^ b*_t` (`s < t`, `p <= q`).
pub fn gamma<T: Scalar>(a: &ATensor<T>, mode: GammaMode) -> Vec<T> {
    match mode {
        GammaMode::Coefficient => gamma_coefficient(a),
        GammaMode::MatrixOfForms => gamma_forms(a),
    }
}

fn gamma_coefficient<T: Scalar>(a: &ATensor<T>) -> Vec<T> {
    let k = a.k();
    let n = a.n();
    let half = T::from_ratio(1, 2);
    let mut g = alloc::vec![T::zero(); s_dim(k)];
    for i in 0..4 {
        for i2 in 0..4 {
            for j in 0..k {
                for j2 in 0..k {
                    if j == j2 {
                        continue;
                    }
                    let (s, t, sign) = if j < j2 { (j, j2, 1) } else { (j2, j, -1) };
                    let slot = pair_index(s, t, k) * 10 + sym_index(i, i2);
                    for l in 0..n {
                        let x = a.get(i, j, l);
                        if x.is_zero() {
                            continue;
                        }
                        for l2 in 0..n {
                            let w = omega_basis(k, l, l2);
                            if w == 0 {
                                continue;
                            }
                            let term = half.clone()
                                * x.clone()
                                * a.get(i2, j2, l2).clone()
                                * T::from_i64(w * sign);
                            g[slot] = g[slot].clone() + term;
                        }
                    }
                }
            }
        }
    }
    g
}

fn gamma_forms<T: Scalar>(a: &ATensor<T>) -> Vec<T> {
    let k = a.k();
    let mut g = alloc::vec![T::zero(); s_dim(k)];
    for s in 0..k {
        for t in s + 1..k {
            let base = pair_index(s, t, k) * 10;
            // G_st(x) = sum_{i,i'} x_i x_i' omega(A_{i,s}, A_{i',t})
            for i in 0..4 {
                for i2 in 0..4 {
                    let w = omega(k, a.column(i, s), a.column(i2, t));
                    let slot = base + sym_index(i, i2);
                    g[slot] = g[slot].clone() + w;
                }
            }
        }
    }
    g
}

/// Matrix of `B -> gamma(A+B) - gamma(A) - gamma(B)`.
pub fn dgamma<T: Scalar>(a: &ATensor<T>) -> Matrix<T> {
    let k = a.k();
    let n = a.n();
    let mut d = Matrix::zeros(s_dim(k), a_dim(k));
    for i0 in 0..4 {
        for j0 in 0..k {
            for l0 in 0..n {
                let col = a.idx(i0, j0, l0);
                for other in 0..k {
                    if other == j0 {
                        continue;
                    }
                    for i2 in 0..4 {
                        let w = omega_unit(k, l0, a.column(i2, other));
                        if w.is_zero() {
                            continue;
                        }
                        // j0 = s contributes +omega(h_l0, A_{i2,t}); j0 = t contributes
                        // omega(A_{i2,s}, h_l0) = -omega(h_l0, A_{i2,s})
                        let (row, val) = if j0 < other {
                            (pair_index(j0, other, k) * 10 + sym_index(i0, i2), w)
                        } else {
                            (pair_index(other, j0, k) * 10 + sym_index(i2, i0), -w)
                        };
                        let cur = core::mem::replace(&mut d[(row, col)], T::zero());
                        d[(row, col)] = cur + val;
                    }
                }
            }
        }
    }
    d
}

/// `beta(A, h_l')` as column `l'`: equals `flat(A) J`.
pub fn beta_matrix<T: Scalar>(a: &ATensor<T>) -> Matrix<T> {
    let k = a.k();
    let n = a.n();
    let half = k + 1;
    Matrix::from_fn(4 * k, n, |r, l2| {
        let (i, j) = (r / k, r % k);
        if l2 >= half {
            a.get(i, j, l2 - half).clone()
        } else {
            -a.get(i, j, l2 + half).clone()
        }
    })
}

/// `epsilon(A, f_i (x) b_j)` as column `(i, j)`: equals `flat(A)^T`.
pub fn epsilon_matrix<T: Scalar>(a: &ATensor<T>) -> Matrix<T> {
    a.flat().transpose()
}

/// The `(2k+2) x k` matrix `b -> epsilon(A, f (x) b)`.
pub fn epsilon_at<T: Scalar>(a: &ATensor<T>, f: &[T]) -> Matrix<T> {
    a.monad_matrix(f).transpose()
}

/// `xi(A, S)[p][b][l] = 4 sum_{i,j} sigma^{jb}_{ip} a[i][j][l]`.
pub fn xi<T: Scalar>(a: &ATensor<T>, s: &STensor<T>) -> CTensor<T> {
    let k = a.k();
    let n = a.n();
    let rho = rho_matrix(s);
    let mut c = alloc::vec![T::zero(); a_dim(k)];
    for l in 0..n {
        let col: Vec<T> = (0..4 * k).map(|r| a.get(r / k, r % k, l).clone()).collect();
        let img = rho.mul_vec(&col);
        for (r, v) in img.into_iter().enumerate() {
            c[r * n + l] = v;
        }
    }
    CTensor::from_vec(k, c)
}

/// Matrix of `S -> xi(A, S)` in canonical S-coordinates.
pub fn xi_matrix<T: Scalar>(a: &ATensor<T>) -> Matrix<T> {
    let k = a.k();
    let n = a.n();
    let four = T::from_i64(4);
    let mut m = Matrix::zeros(a_dim(k), s_dim(k));
    for pa in 0..k {
        for pc in pa + 1..k {
            for sym in 0..10 {
                let col = pair_index(pa, pc, k) * 10 + sym;
                let (u, v) = sym_of(sym);
                let fpairs: &[(usize, usize)] = if u == v { &[(u, u)] } else { &[(u, v), (v, u)] };
                for &(j, b, neg) in &[(pa, pc, false), (pc, pa, true)] {
                    for &(i, p) in fpairs {
                        for l in 0..n {
                            let x = a.get(i, j, l);
                            if x.is_zero() {
                                continue;
                            }
                            let val = if neg { -(four.clone() * x.clone()) } else { four.clone() * x.clone() };
                            let row = (p * k + b) * n + l;
                            let cur = core::mem::replace(&mut m[(row, col)], T::zero());
                            m[(row, col)] = cur + val;
                        }
                    }
                }
            }
        }
    }
    m
}

/// `rho(S, .)`: `C4* (x) Ck* -> C4 (x) Ck`, rows `p*k + b`, columns `i*k + j`,
/// entry `4 sigma^{jb}_{ip}`.
pub fn rho_matrix<T: Scalar>(s: &STensor<T>) -> Matrix<T> {
    let k = s.k();
    let four = T::from_i64(4);
    Matrix::from_fn(4 * k, 4 * k, |r, c| {
        let (p, b) = (r / k, r % k);
        let (i, j) = (c / k, c % k);
        four.clone() * s.sigma(j, b, i, p)
    })
}

/// `rho(S, f* (x) b*)`.
pub fn rho_apply<T: Scalar>(s: &STensor<T>, fstar: &[T], bstar: &[T]) -> Vec<T> {
    let k = s.k();
    let v: Vec<T> = (0..4 * k).map(|c| fstar[c / k].clone() * bstar[c % k].clone()).collect();
    rho_matrix(s).mul_vec(&v)
}

/// `sigma[(i*4 + l), (j*4 + p)] = sigma^{ij}_{lp}` and
/// `sigma_hat[(i*k + l), (j*k + p)] = sigma^{lp}_{ij}`.
pub fn flattenings<T: Scalar>(s: &STensor<T>) -> (Matrix<T>, Matrix<T>) {
    let k = s.k();
    let sigma = Matrix::from_fn(4 * k, 4 * k, |r, c| s.sigma(r / 4, c / 4, r % 4, c % 4));
    let sigma_hat = Matrix::from_fn(4 * k, 4 * k, |r, c| s.sigma(r % k, c % k, r / k, c / k));
    (sigma, sigma_hat)
}

/// The `k x k` skew block `sigma_hat^{ij}`.
pub fn sigma_hat_block<T: Scalar>(s: &STensor<T>, i: usize, j: usize) -> Matrix<T> {
    let k = s.k();
    Matrix::from_fn(k, k, |l, p| s.sigma(l, p, i, j))
}

/// `rk(S) = dim Im rho(S, .)`, exact.
pub fn rk_s<T: ExactField>(s: &STensor<T>) -> usize {
    rho_matrix(s).rank()
}

pub fn rk_s_float(s: &STensor<Complex64>, tol: f64) -> usize {
    float::rank(&rho_matrix(s), tol)
}

/// `kappa(C, h)[i][j] = omega(C_{ij}, h)` as a `4 x k` array.
pub fn kappa<T: Scalar>(c: &CTensor<T>, h: &[T]) -> Matrix<T> {
    let k = c.k();
    Matrix::from_fn(4, k, |i, j| omega(k, c.column(i, j), h))
}

pub fn tau0<T: Scalar>(a: &ATensor<T>, s: &STensor<T>, h: &[T]) -> Matrix<T> {
    kappa(&xi(a, s), h)
}

/// `sum c[i][j][l] omega(h_l, h_l') b[i][j][l']`, the natural pairing of
/// `C4 (x) Ck (x) C(2k+2)` with `C4* (x) Ck* (x) C(2k+2)`.
pub fn omega_pairing<T: Scalar>(c: &CTensor<T>, b: &ATensor<T>) -> T {
    let k = b.k();
    let mut acc = T::zero();
    for i in 0..4 {
        for j in 0..k {
            acc = acc + omega(k, c.column(i, j), b.column(i, j));
        }
    }
    acc
}

/// Plain coordinate dot product.
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

/// `8k - 3`, the moduli dimension at a smooth point.
pub fn moduli_expected(k: usize) -> i64 {
    8 * k as i64 - 3
}

/// `dim G = 3k^2 + 5k + 3`.
pub fn group_dim(k: usize) -> usize {
    3 * k * k + 5 * k + 3
}

/// `3k^2 + 13k`, the tangent dimension of `I` at a smooth point.
pub fn smooth_tangent_dim(k: usize) -> usize {
    3 * k * k + 13 * k
}
