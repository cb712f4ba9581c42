//! Exact elimination over `ExactField` backends.
//!
//! Pivoting is deterministic (first nonzero entry in the column), so
//! echelon forms and kernel bases are reproducible.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{AffineSolution, Matrix};
use crate::scalar::{ExactField, Fp, Rational, Scalar};

/// Reduced row echelon form and the pivot columns.
pub fn rref<T: ExactField>(m: &Matrix<T>) -> (Matrix<T>, Vec<usize>) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                let tmp = a[(p, j)].clone();
                a[(p, j)] = a[(r, j)].clone();
                a[(r, j)] = tmp;
            }
        }
        let inv = a[(r, c)].inv().expect("nonzero pivot");
        for j in c..cols {
            if !a[(r, j)].is_zero() {
                a[(r, j)] = a[(r, j)].clone() * inv.clone();
            }
        }
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in c..cols {
                if a[(r, j)].is_zero() {
                    continue;
                }
                a[(i, j)] = a[(i, j)].clone() - f.clone() * a[(r, j)].clone();
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Rank by forward elimination only.
pub fn rank_by_elimination<T: ExactField>(m: &Matrix<T>) -> usize {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        if p != r {
            for j in c..cols {
                let tmp = a[(p, j)].clone();
                a[(p, j)] = a[(r, j)].clone();
                a[(r, j)] = tmp;
            }
        }
        let inv = a[(r, c)].inv().expect("nonzero pivot");
        for i in r + 1..rows {
            if a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone() * inv.clone();
            for j in c..cols {
                if a[(r, j)].is_zero() {
                    continue;
                }
                a[(i, j)] = a[(i, j)].clone() - f.clone() * a[(r, j)].clone();
            }
        }
        r += 1;
    }
    r
}

/// Rank over Q. A full-rank reduction modulo the active prime certifies
/// the rational rank (a nonzero minor mod p lifts to a nonzero minor over
/// Q); otherwise fall back to fraction-free Bareiss elimination.
pub fn rational_rank(m: &Matrix<Rational>) -> usize {
    let full = m.rows().min(m.cols());
    if full == 0 {
        return 0;
    }
    if let Some(mp) = reduce_mod_p(m) {
        if rank_by_elimination(&mp) == full {
            return full;
        }
    }
    bareiss_rank(&integer_rows(m))
}

/// Entry-wise reduction modulo the active prime; `None` if some
/// denominator vanishes mod p.
pub fn reduce_mod_p(m: &Matrix<Rational>) -> Option<Matrix<Fp>> {
    let mut data = Vec::with_capacity(m.rows() * m.cols());
    for q in m.data() {
        data.push(Fp::from_rational(q)?);
    }
    Some(Matrix::from_vec(m.rows(), m.cols(), data))
}

/// Scales each row by the lcm of its denominators.
pub fn integer_rows(m: &Matrix<Rational>) -> Vec<Vec<BigInt>> {
    (0..m.rows())
        .map(|r| {
            let row = m.row(r);
            let l = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            row.iter().map(|q| q.numer() * (&l / q.denom())).collect()
        })
        .collect()
}

/// Fraction-free Gaussian elimination on an integer matrix.
pub fn bareiss_rank(rows_in: &[Vec<BigInt>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = rows_in.to_vec();
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let (top, rest) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        let piv = pivot_row[c].clone();
        for row in rest.iter_mut() {
            let f = row[c].clone();
            for j in c..cols {
                let v = &piv * &row[j] - &f * &pivot_row[j];
                row[j] = v / &prev;
            }
        }
        prev = piv;
        r += 1;
    }
    r
}

/// Kernel basis as the reduced echelon basis of the solution space.
pub fn kernel_basis<T: ExactField>(m: &Matrix<T>) -> Vec<Vec<T>> {
    let cols = m.cols();
    let (red, pivots) = rref(m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    if free.is_empty() {
        return Vec::new();
    }
    let raw = Matrix::from_fn(free.len(), cols, |fi, c| {
        let f = free[fi];
        if c == f {
            T::one()
        } else if let Some(pr) = pivots.iter().position(|&p| p == c) {
            -red[(pr, f)].clone()
        } else {
            T::zero()
        }
    });
    let (ech, _) = rref(&raw);
    (0..free.len()).map(|i| ech.row(i).to_vec()).collect()
}

pub fn solve_affine<T: ExactField>(m: &Matrix<T>, b: &[T]) -> AffineSolution<T> {
    assert_eq!(m.rows(), b.len(), "right-hand side height");
    let aug = m.hstack(&Matrix::column_vector(b));
    let (red, pivots) = rref(&aug);
    if pivots.last() == Some(&m.cols()) {
        return AffineSolution::Inconsistent;
    }
    let mut x = alloc::vec![T::zero(); m.cols()];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = red[(r, m.cols())].clone();
    }
    AffineSolution::Solution(x)
}

pub fn inverse<T: ExactField>(m: &Matrix<T>) -> Option<Matrix<T>> {
    if !m.is_square() {
        return None;
    }
    let n = m.rows();
    let (red, pivots) = rref(&m.hstack(&Matrix::identity(n)));
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(red.block(0, n, n, n))
}

/// Rescales a rational vector to a primitive integer vector (same line).
pub fn primitive_integer(v: &[Rational]) -> Vec<Rational> {
    let l = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = v.iter().map(|q| q.numer() * (&l / q.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    ints.into_iter().map(|x| Rational::from_integer(x / &g)).collect()
}

/// Extends the given independent rows to a basis by appending standard
/// basis vectors greedily; returns the square matrix.
pub fn complete_basis<T: ExactField>(rows: &[Vec<T>], n: usize) -> Matrix<T> {
    let mut chosen: Vec<Vec<T>> = rows.to_vec();
    for e in 0..n {
        if chosen.len() == n {
            break;
        }
        let mut cand = chosen.clone();
        let mut unit = alloc::vec![T::zero(); n];
        unit[e] = T::one();
        cand.push(unit);
        let m = Matrix::from_fn(cand.len(), n, |r, c| cand[r][c].clone());
        if m.rank() == cand.len() {
            chosen = cand;
        }
    }
    Matrix::from_fn(n, n, |r, c| chosen[r][c].clone())
}

/// Rational congruence diagonalization of a symmetric matrix: returns
/// `T` and the nonzero diagonal `d` with `T^T M T = diag(d, 0, .., 0)`.
pub fn symmetric_diagonalize<T: ExactField>(m: &Matrix<T>) -> Option<(Matrix<T>, Vec<T>)> {
    if !m.is_symmetric() {
        return None;
    }
    let n = m.rows();
    let mut w = m.clone();
    let mut t = Matrix::<T>::identity(n);
    let mut d = Vec::new();
    let mut s = 0;
    while s < n {
        let pivot = (s..n).find(|&i| !w[(i, i)].is_zero());
        let p = match pivot {
            Some(p) => p,
            None => {
                let Some((i, j)) = (s..n).flat_map(|i| (s..i).map(move |j| (i, j))).find(|&(i, j)| !w[(i, j)].is_zero())
                else {
                    break;
                };
                // col_i += col_j turns w_ii into 2 w_ij
                add_column_exact(&mut w, &mut t, i, j, T::one());
                i
            }
        };
        swap_exact(&mut w, &mut t, s, p);
        let piv = w[(s, s)].clone();
        for j in s + 1..n {
            if !w[(s, j)].is_zero() {
                let f = -(w[(s, j)].clone() * piv.inv().expect("nonzero pivot"));
                add_column_exact(&mut w, &mut t, j, s, f);
            }
        }
        d.push(piv);
        s += 1;
    }
    Some((t, d))
}

fn add_column_exact<T: ExactField>(w: &mut Matrix<T>, t: &mut Matrix<T>, i: usize, j: usize, f: T) {
    let n = w.rows();
    for r in 0..n {
        let v = t[(r, j)].clone();
        t[(r, i)] = t[(r, i)].clone() + f.clone() * v;
        let v = w[(r, j)].clone();
        w[(r, i)] = w[(r, i)].clone() + f.clone() * v;
    }
    for c in 0..n {
        let v = w[(j, c)].clone();
        w[(i, c)] = w[(i, c)].clone() + f.clone() * v;
    }
}

fn swap_exact<T: ExactField>(w: &mut Matrix<T>, t: &mut Matrix<T>, a: usize, b: usize) {
    if a == b {
        return;
    }
    let n = w.rows();
    for r in 0..n {
        let tmp = t[(r, a)].clone();
        t[(r, a)] = t[(r, b)].clone();
        t[(r, b)] = tmp;
        let tmp = w[(r, a)].clone();
        w[(r, a)] = w[(r, b)].clone();
        w[(r, b)] = tmp;
    }
    for c in 0..n {
        let tmp = w[(a, c)].clone();
        w[(a, c)] = w[(b, c)].clone();
        w[(b, c)] = tmp;
    }
}
