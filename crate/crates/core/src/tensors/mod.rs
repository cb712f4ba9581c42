//! The three tensor spaces of the monad construction in fixed coordinates.
//!
//! Indices are 0-based: `i < 4` runs over `f_i`, `j < k` over `b_j`, and
//! `l < 2k+2` over `h_l`. The symplectic form is
//! `omega = sum_m h*_m ^ h*_{m+k+1}`.

mod group;
mod maps;

use alloc::vec::Vec;

pub use group::{act_a, act_c, act_gamma, act_s, random_group_element, random_symplectic, GroupElement};
pub use maps::*;

use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Dimension `2k+2` of the symplectic space.
pub fn sympl_dim(k: usize) -> usize {
    2 * k + 2
}

/// Dimension `5k(k-1)` of `S^2 C^4 (x) Lambda^2 C^k`.
pub fn s_dim(k: usize) -> usize {
    5 * k * k.saturating_sub(1)
}

/// Dimension `8k^2 + 8k` of the `A`-space.
pub fn a_dim(k: usize) -> usize {
    4 * k * sympl_dim(k)
}

/// Lexicographic index of the pair `i < j` among pairs of `0..k`.
pub fn pair_index(i: usize, j: usize, k: usize) -> usize {
    debug_assert!(i < j && j < k);
    i * (2 * k - i - 1) / 2 + (j - i - 1)
}

/// Inverse of [`pair_index`].
pub fn pair_of(index: usize, k: usize) -> (usize, usize) {
    let mut rest = index;
    for i in 0..k {
        let len = k - i - 1;
        if rest < len {
            return (i, i + 1 + rest);
        }
        rest -= len;
    }
    panic!("pair index {index} out of range for k = {k}");
}

/// Index of the unordered pair `{l, p}` among the 10 pairs of `0..4`.
pub fn sym_index(l: usize, p: usize) -> usize {
    let (a, b) = if l <= p { (l, p) } else { (p, l) };
    const OFFSET: [usize; 4] = [0, 4, 7, 9];
    OFFSET[a] + (b - a)
}

/// Inverse of [`sym_index`].
pub fn sym_of(index: usize) -> (usize, usize) {
    const PAIRS: [(usize, usize); 10] =
        [(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];
    PAIRS[index]
}

/// `omega(h_l, h_m)`.
pub fn omega_basis(k: usize, l: usize, m: usize) -> i64 {
    let half = k + 1;
    if l < half && m == l + half {
        1
    } else if l >= half && m + half == l {
        -1
    } else {
        0
    }
}

pub fn omega<T: Scalar>(k: usize, a: &[T], b: &[T]) -> T {
    let half = k + 1;
    let mut acc = T::zero();
    for m in 0..half {
        acc = acc + a[m].clone() * b[m + half].clone() - a[m + half].clone() * b[m].clone();
    }
    acc
}

/// `omega(h_l, v)`.
pub fn omega_unit<T: Scalar>(k: usize, l: usize, v: &[T]) -> T {
    let half = k + 1;
    if l < half {
        v[l + half].clone()
    } else {
        -v[l - half].clone()
    }
}

/// Gram matrix `J = [[0, I], [-I, 0]]` of omega.
pub fn gram<T: Scalar>(k: usize) -> Matrix<T> {
    let n = sympl_dim(k);
    Matrix::from_fn(n, n, |l, m| T::from_i64(omega_basis(k, l, m)))
}

/// The monad datum `A = sum a[i][j][l] f*_i (x) b*_j (x) h_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct ATensor<T> {
    k: usize,
    a: Vec<T>,
}

impl<T: Scalar> ATensor<T> {
    pub fn zeros(k: usize) -> Self {
        ATensor { k, a: alloc::vec![T::zero(); a_dim(k)] }
    }

    /// From coordinates ordered `(i*k + j)*(2k+2) + l`; panics on a length mismatch.
    pub fn from_vec(k: usize, a: Vec<T>) -> Self {
        assert_eq!(a.len(), a_dim(k), "A-tensor coordinate count");
        ATensor { k, a }
    }

    pub fn unit(k: usize, i: usize, j: usize, l: usize) -> Self {
        let mut t = Self::zeros(k);
        t.set(i, j, l, T::one());
        t
    }

    /// Rows `(i*k + j)` of `flat(A)`.
    pub fn from_flat(k: usize, flat: &Matrix<T>) -> Self {
        assert_eq!((flat.rows(), flat.cols()), (4 * k, sympl_dim(k)));
        Self::from_vec(k, flat.data().to_vec())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        sympl_dim(self.k)
    }

    pub fn idx(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.k + j) * self.n() + l
    }

    pub fn get(&self, i: usize, j: usize, l: usize) -> &T {
        &self.a[self.idx(i, j, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, l: usize, v: T) {
        let ix = self.idx(i, j, l);
        self.a[ix] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.a
    }

    /// The vector `A_{i,j} = sum_l a[i][j][l] h_l`.
    pub fn column(&self, i: usize, j: usize) -> &[T] {
        let start = self.idx(i, j, 0);
        &self.a[start..start + self.n()]
    }

    /// `flat(A)`: `4k x (2k+2)`, rows indexed by `(i, j)`.
    pub fn flat(&self) -> Matrix<T> {
        Matrix::from_vec(4 * self.k, self.n(), self.a.clone())
    }

    /// `F(x)`: the `k x (2k+2)` matrix of linear forms evaluated at `x`.
    pub fn monad_matrix(&self, x: &[T]) -> Matrix<T> {
        Matrix::from_fn(self.k, self.n(), |j, l| {
            (0..4).fold(T::zero(), |acc, i| acc + self.get(i, j, l).clone() * x[i].clone())
        })
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> ATensor<U> {
        ATensor { k: self.k, a: self.a.iter().map(f).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        ATensor { k: self.k, a: self.a.iter().zip(&other.a).map(|(x, y)| x.clone() + y.clone()).collect() }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|x| x.is_zero())
    }
}

/// `S = sum_{all i,j,l,p} sigma^{ij}_{lp} f_l f_p (x) b_i ^ b_j`, stored
/// as the blocks `i < j` with `l <= p`.
#[derive(Clone, Debug, PartialEq)]
pub struct STensor<T> {
    k: usize,
    s: Vec<T>,
}

impl<T: Scalar> STensor<T> {
    pub fn zeros(k: usize) -> Self {
        STensor { k, s: alloc::vec![T::zero(); s_dim(k)] }
    }

    /// From canonical coordinates `pair_index(i,j)*10 + sym_index(l,p)`.
    pub fn from_vec(k: usize, s: Vec<T>) -> Self {
        assert_eq!(s.len(), s_dim(k), "S-tensor coordinate count");
        STensor { k, s }
    }

    /// Builds from the `i < j` blocks in lexicographic order; each block
    /// must be symmetric.
    pub fn from_blocks(k: usize, blocks: &[Matrix<T>]) -> Option<Self> {
        if blocks.len() != k * k.saturating_sub(1) / 2 {
            return None;
        }
        let mut s = Self::zeros(k);
        for (pi, b) in blocks.iter().enumerate() {
            if b.rows() != 4 || b.cols() != 4 || !b.is_symmetric() {
                return None;
            }
            for sym in 0..10 {
                let (l, p) = sym_of(sym);
                s.s[pi * 10 + sym] = b[(l, p)].clone();
            }
        }
        Some(s)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn as_slice(&self) -> &[T] {
        &self.s
    }

    /// Extended access with `sigma^{ji} = -sigma^{ij}` and `sigma^{ii} = 0`.
    pub fn sigma(&self, i: usize, j: usize, l: usize, p: usize) -> T {
        match i.cmp(&j) {
            core::cmp::Ordering::Equal => T::zero(),
            core::cmp::Ordering::Less => self.s[pair_index(i, j, self.k) * 10 + sym_index(l, p)].clone(),
            core::cmp::Ordering::Greater => -self.s[pair_index(j, i, self.k) * 10 + sym_index(l, p)].clone(),
        }
    }

    /// Sets `sigma^{ij}_{lp}` (and the mirrored entries) for `i != j`.
    pub fn set_sigma(&mut self, i: usize, j: usize, l: usize, p: usize, v: T) {
        assert_ne!(i, j, "diagonal blocks vanish");
        if i < j {
            self.s[pair_index(i, j, self.k) * 10 + sym_index(l, p)] = v;
        } else {
            self.s[pair_index(j, i, self.k) * 10 + sym_index(l, p)] = -v;
        }
    }

    /// Adds `coeff * f_l f_p (x) b_i ^ b_j` written as a monomial.
    pub fn add_monomial(&mut self, l: usize, p: usize, i: usize, j: usize, coeff: T) {
        if i == j {
            return;
        }
        // the monomial f_l f_p b_i^b_j collects 2 (l = p) or 4 (l != p) terms of the full sum
        let weight = if l == p { T::from_ratio(1, 2) } else { T::from_ratio(1, 4) };
        let cur = self.sigma(i, j, l, p);
        self.set_sigma(i, j, l, p, cur + coeff * weight);
    }

    pub fn from_monomial(k: usize, l: usize, p: usize, i: usize, j: usize) -> Self {
        let mut s = Self::zeros(k);
        s.add_monomial(l, p, i, j, T::one());
        s
    }

    /// The symmetric `4 x 4` block `sigma^{ij}`.
    pub fn block(&self, i: usize, j: usize) -> Matrix<T> {
        Matrix::from_fn(4, 4, |l, p| self.sigma(i, j, l, p))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> STensor<U> {
        STensor { k: self.k, s: self.s.iter().map(f).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        STensor { k: self.k, s: self.s.iter().zip(&other.s).map(|(x, y)| x.clone() + y.clone()).collect() }
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.s.iter().all(|x| x.is_zero())
    }
}

/// An element of `C^4 (x) C^k (x) C^{2k+2}`, same layout as [`ATensor`].
#[derive(Clone, Debug, PartialEq)]
pub struct CTensor<T> {
    k: usize,
    c: Vec<T>,
}

impl<T: Scalar> CTensor<T> {
    pub fn zeros(k: usize) -> Self {
        CTensor { k, c: alloc::vec![T::zero(); a_dim(k)] }
    }

    pub fn from_vec(k: usize, c: Vec<T>) -> Self {
        assert_eq!(c.len(), a_dim(k), "C-tensor coordinate count");
        CTensor { k, c }
    }

    pub fn unit(k: usize, i: usize, j: usize, l: usize) -> Self {
        let mut t = Self::zeros(k);
        let n = sympl_dim(k);
        t.c[(i * k + j) * n + l] = T::one();
        t
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize, l: usize) -> &T {
        &self.c[(i * self.k + j) * sympl_dim(self.k) + l]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.c
    }

    pub fn column(&self, i: usize, j: usize) -> &[T] {
        let n = sympl_dim(self.k);
        let start = (i * self.k + j) * n;
        &self.c[start..start + n]
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }
}

/// Random `A` with integer coordinates in `[-bound, bound]`.
pub fn random_a(rng: &mut crate::rng::SeededRng, k: usize, bound: i64) -> ATensor<crate::Rational> {
    ATensor::from_vec(k, crate::rng::rational_vec(rng, a_dim(k), bound))
}

/// Random `S` with integer canonical coordinates in `[-bound, bound]`.
pub fn random_s(rng: &mut crate::rng::SeededRng, k: usize, bound: i64) -> STensor<crate::Rational> {
    STensor::from_vec(k, crate::rng::rational_vec(rng, s_dim(k), bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn index_tables_roundtrip() {
        for k in 2..=5 {
            for idx in 0..k * (k - 1) / 2 {
                let (i, j) = pair_of(idx, k);
                assert_eq!(pair_index(i, j, k), idx);
            }
        }
        for idx in 0..10 {
            let (l, p) = sym_of(idx);
            assert_eq!(sym_index(l, p), idx);
            assert_eq!(sym_index(p, l), idx);
        }
    }

    #[test]
    fn gram_is_symplectic_unit() {
        for k in 1..=5 {
            let j = gram::<Rational>(k);
            let n = sympl_dim(k);
            assert_eq!(j.transpose(), j.scale(&Rational::from_i64(-1)));
            assert_eq!(j.mul(&j), Matrix::<Rational>::identity(n).scale(&Rational::from_i64(-1)));
        }
    }

    #[test]
    fn monomial_weights() {
        let s = STensor::<Rational>::from_monomial(2, 0, 0, 0, 1);
        assert_eq!(s.sigma(0, 1, 0, 0), Rational::from_ratio(1, 2));
        assert_eq!(s.sigma(1, 0, 0, 0), Rational::from_ratio(-1, 2));
        let s = STensor::<Rational>::from_monomial(2, 0, 1, 0, 1);
        assert_eq!(s.sigma(0, 1, 1, 0), Rational::from_ratio(1, 4));
    }
}
