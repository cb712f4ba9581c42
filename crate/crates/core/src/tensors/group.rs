//! Actions of `GL4 x GLk x Sp(2k+2)` on the tensor spaces.

use alloc::vec::Vec;

use super::{gram, pair_index, s_dim, sym_index, sym_of, sympl_dim, ATensor, CTensor, STensor};
use crate::linalg::Matrix;
use crate::rng::{int_in, SeededRng};
use crate::scalar::{Rational, Scalar};

/// `g = (M, P, Q)` acting by `F(x) -> P F(M x) Q^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement<T> {
    pub m: Matrix<T>,
    pub p: Matrix<T>,
    pub q: Matrix<T>,
}

impl<T: Scalar> GroupElement<T> {
    pub fn identity(k: usize) -> Self {
        GroupElement {
            m: Matrix::identity(4),
            p: Matrix::identity(k),
            q: Matrix::identity(sympl_dim(k)),
        }
    }

    /// `Q^T J Q = J` exactly.
    pub fn is_symplectic(&self) -> bool {
        let k = self.p.rows();
        let j = gram::<T>(k);
        self.q.transpose().mul(&j).mul(&self.q) == j
    }

    /// `Q^T J Q = J` up to `tol` in max-entry norm.
    pub fn symplectic_defect(&self) -> f64 {
        let k = self.p.rows();
        let j = gram::<T>(k);
        self.q.transpose().mul(&j).mul(&self.q).sub(&j).max_abs()
    }
}

/// `a'[i][j][l] = sum a[i'][j'][l'] M[i'][i] P[j][j'] Q[l][l']`.
pub fn act_a<T: Scalar>(g: &GroupElement<T>, a: &ATensor<T>) -> ATensor<T> {
    let k = a.k();
    let n = a.n();
    // mix the f and b factors row-wise, then h column-wise
    let flat = a.flat();
    let left = Matrix::from_fn(4 * k, 4 * k, |r, c| {
        let (i, j) = (r / k, r % k);
        let (i2, j2) = (c / k, c % k);
        g.m[(i2, i)].clone() * g.p[(j, j2)].clone()
    });
    let out = left.mul(&flat).mul(&g.q.transpose());
    debug_assert_eq!(out.cols(), n);
    ATensor::from_flat(k, &out)
}

/// `G'_{st}(x) = sum_{u,v} P[s][u] P[t][v] G_{uv}(M x)` on gamma values.
pub fn act_gamma<T: Scalar>(g: &GroupElement<T>, k: usize, gamma: &[T]) -> Vec<T> {
    let quad = |u: usize, v: usize| -> Matrix<T> {
        // symmetric Gram matrix of the quadric G_uv, extended by skewness
        if u == v {
            return Matrix::zeros(4, 4);
        }
        let (a, b, sign) = if u < v { (u, v, T::one()) } else { (v, u, -T::one()) };
        let base = pair_index(a, b, k) * 10;
        let half = T::from_ratio(1, 2);
        Matrix::from_fn(4, 4, |p, q| {
            let c = gamma[base + sym_index(p, q)].clone();
            let c = if p == q { c } else { c * half.clone() };
            c * sign.clone()
        })
    };
    let pulled: Vec<Vec<Matrix<T>>> = (0..k)
        .map(|u| (0..k).map(|v| g.m.transpose().mul(&quad(u, v)).mul(&g.m)).collect())
        .collect();
    let mut out = alloc::vec![T::zero(); s_dim(k)];
    for s in 0..k {
        for t in s + 1..k {
            let mut acc = Matrix::<T>::zeros(4, 4);
            for (u, row) in pulled.iter().enumerate() {
                for (v, mat) in row.iter().enumerate() {
                    let w = g.p[(s, u)].clone() * g.p[(t, v)].clone();
                    if !w.is_zero() {
                        acc = acc.add(&mat.scale(&w));
                    }
                }
            }
            let base = pair_index(s, t, k) * 10;
            for sym in 0..10 {
                let (p, q) = sym_of(sym);
                out[base + sym] = if p == q { acc[(p, p)].clone() } else { acc[(p, q)].clone() + acc[(q, p)].clone() };
            }
        }
    }
    out
}

/// `sigma'^{ab}_{uv} = sum C[a][i] C[b][j] N[u][l] N[v][p] sigma^{ij}_{lp}`.
pub fn act_s<T: Scalar>(c: &Matrix<T>, n: &Matrix<T>, s: &STensor<T>) -> STensor<T> {
    let k = s.k();
    let blocks: Vec<Vec<Matrix<T>>> =
        (0..k).map(|i| (0..k).map(|j| n.mul(&s.block(i, j)).mul(&n.transpose())).collect()).collect();
    let mut out = STensor::zeros(k);
    for a in 0..k {
        for b in a + 1..k {
            let mut acc = Matrix::<T>::zeros(4, 4);
            for (i, row) in blocks.iter().enumerate() {
                for (j, blk) in row.iter().enumerate() {
                    let w = c[(a, i)].clone() * c[(b, j)].clone();
                    if !w.is_zero() && i != j {
                        acc = acc.add(&blk.scale(&w));
                    }
                }
            }
            for sym in 0..10 {
                let (u, v) = sym_of(sym);
                out.set_sigma(a, b, u, v, acc[(u, v)].clone());
            }
        }
    }
    out
}

/// `c'[p][b][l] = sum F[p][p'] B[b][b'] Q[l][l'] c[p'][b'][l']`.
pub fn act_c<T: Scalar>(f: &Matrix<T>, b: &Matrix<T>, q: &Matrix<T>, c: &CTensor<T>) -> CTensor<T> {
    let k = c.k();
    let n = sympl_dim(k);
    let flat = Matrix::from_vec(4 * k, n, c.as_slice().to_vec());
    let left = Matrix::from_fn(4 * k, 4 * k, |r, col| {
        f[(r / k, col / k)].clone() * b[(r % k, col % k)].clone()
    });
    let out = left.mul(&flat).mul(&q.transpose());
    CTensor::from_vec(k, out.data().to_vec())
}

fn random_invertible(rng: &mut SeededRng, n: usize, bound: i64) -> Matrix<Rational> {
    loop {
        let m = Matrix::from_fn(n, n, |_, _| Rational::from_i64(int_in(rng, bound)));
        if m.rank() == n {
            return m;
        }
    }
}

fn random_symmetric(rng: &mut SeededRng, n: usize, bound: i64) -> Matrix<Rational> {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = Rational::from_i64(int_in(rng, bound));
            m[(i, j)] = v.clone();
            m[(j, i)] = v;
        }
    }
    m
}

/// Random symplectic matrix as a product of the generators
/// `[[I, S], [0, I]]`, `[[I, 0], [S, I]]` and `[[X, 0], [0, X^-T]]`.
pub fn random_symplectic(rng: &mut SeededRng, k: usize) -> Matrix<Rational> {
    let h = k + 1;
    let n = sympl_dim(k);
    let upper = |s: &Matrix<Rational>| {
        Matrix::from_fn(n, n, |r, c| {
            if r == c {
                Rational::from_i64(1)
            } else if r < h && c >= h {
                s[(r, c - h)].clone()
            } else {
                Rational::from_i64(0)
            }
        })
    };
    let s1 = random_symmetric(rng, h, 2);
    let s2 = random_symmetric(rng, h, 2);
    let x = random_invertible(rng, h, 2);
    let xit = x.inverse().expect("invertible").transpose();
    let lower = upper(&s2).transpose();
    let diag = Matrix::from_fn(n, n, |r, c| {
        if r < h && c < h {
            x[(r, c)].clone()
        } else if r >= h && c >= h {
            xit[(r - h, c - h)].clone()
        } else {
            Rational::from_i64(0)
        }
    });
    upper(&s1).mul(&lower).mul(&diag)
}

/// Random `(M, P, Q)` with small integer `M`, `P` and symplectic `Q`.
pub fn random_group_element(rng: &mut SeededRng, k: usize) -> GroupElement<Rational> {
    GroupElement {
        m: random_invertible(rng, 4, 3),
        p: random_invertible(rng, k, 3),
        q: random_symplectic(rng, k),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn generators_are_symplectic() {
        let mut rng = seeded(3);
        for k in 1..=5 {
            let g = random_group_element(&mut rng, k);
            assert!(g.is_symplectic());
        }
    }

    #[test]
    fn gram_is_symplectic() {
        let k = 3;
        let g = GroupElement { m: Matrix::identity(4), p: Matrix::identity(k), q: gram::<Rational>(k) };
        assert!(g.is_symplectic());
    }
}
