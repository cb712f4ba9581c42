//! Structured test instances of prescribed rank, optionally biased into
//! one branch of the case analysis.

use alloc::string::ToString;
use alloc::vec::Vec;

use super::sigma12_max_rank;
use crate::linalg::Matrix;
use crate::rng::{derived, int_in, nonzero_rational_vec, SeededRng};
use crate::scalar::{Rational, Scalar};
use crate::tensors::{act_s, rk_s, STensor};
use crate::Error;

const ATTEMPTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SCaseBias {
    /// Sums of `l^2 (x) u ^ w` terms.
    Any,
    /// `r <= 2`: quadrics in a pencil of linear forms.
    A,
    /// `q (x) u ^ w` with `q` of rank 3 (`rk = 6`, `r = 3`).
    B,
    /// `k = 5`: `sum_{l<4} f_l^2 (x) u_l ^ v_l` (`rk = 8`, `r = 4`).
    C,
    /// `k = 5`: `sum_{l<3} f_l^2 (x) beta_l` with `beta` ranks `2, 2, 4`
    /// (`rk = 8`, `r = 3`).
    D,
}

/// `S` with `rk(S) = target`.
pub fn random_s_of_rank(k: usize, target: usize, seed: u64) -> Result<STensor<Rational>, Error> {
    random_s_biased(k, target, SCaseBias::Any, seed)
}

/// `S` with `rk(S) = target` in the requested branch, moved by a random
/// rational change of both bases; ranks are verified exactly.
pub fn random_s_biased(k: usize, target: usize, bias: SCaseBias, seed: u64) -> Result<STensor<Rational>, Error> {
    if target % 2 == 1 || target > 4 * k {
        return Err(Error::Precondition(alloc::format!("rank {target} is not an even number in [0, {}]", 4 * k)));
    }
    if target == 0 {
        return Ok(STensor::zeros(k));
    }
    if k < 2 {
        return Err(Error::Precondition("nonzero S needs k >= 2".to_string()));
    }
    let want_r = match bias {
        SCaseBias::Any => None,
        SCaseBias::A => {
            if target > 2 * k - 2 {
                return Err(Error::Precondition(alloc::format!("bias A reaches rank at most {}", 2 * k - 2)));
            }
            None
        }
        SCaseBias::B => {
            if target != 6 || k < 3 {
                return Err(Error::Precondition("bias B needs rank 6 and k >= 3".to_string()));
            }
            Some(3)
        }
        SCaseBias::C | SCaseBias::D => {
            if target != 8 || k != 5 {
                return Err(Error::Precondition("biases C and D need k = 5 and rank 8".to_string()));
            }
            Some(if bias == SCaseBias::C { 4 } else { 3 })
        }
    };
    let mut rng = derived(seed, 0x5C);
    for attempt in 0..ATTEMPTS {
        let raw = match bias {
            SCaseBias::Any => any_terms(&mut rng, k, target),
            SCaseBias::A => pencil_terms(&mut rng, k, target, attempt % 2 == 1),
            SCaseBias::B => term(&quadric_of_rank(&mut rng, 3), &bivector(&mut rng, k)),
            SCaseBias::C => (0..4).fold(STensor::zeros(k), |acc, l| acc.add(&term(&square(l), &bivector(&mut rng, k)))),
            SCaseBias::D => {
                let big = (int_in(&mut rng, 1) + 1) as usize;
                (0..3).fold(STensor::zeros(k), |acc, l| {
                    let beta = if l == big { bivector(&mut rng, k).add(&bivector(&mut rng, k)) } else { bivector(&mut rng, k) };
                    acc.add(&term(&square(l), &beta))
                })
            }
        };
        let s = act_s(&invertible(&mut rng, k), &invertible(&mut rng, 4), &raw);
        if rk_s(&s) != target {
            continue;
        }
        let r = sigma12_max_rank(&s, super::SIGMA12_REPETITIONS, seed).0;
        let ok = match (bias, want_r) {
            (SCaseBias::A, _) => r <= 2,
            (_, Some(w)) => r == w,
            (_, None) => true,
        };
        if ok {
            return Ok(s);
        }
    }
    Err(Error::NotFound(alloc::format!("no S of rank {target} for k = {k} with bias {bias:?}")))
}

/// `sigma^{ij}_{lp} = omega_{ij} q_{lp}`.
fn term(q: &Matrix<Rational>, omega: &Matrix<Rational>) -> STensor<Rational> {
    let k = omega.rows();
    let mut s = STensor::zeros(k);
    for i in 0..k {
        for j in i + 1..k {
            for l in 0..4 {
                for p in l..4 {
                    s.set_sigma(i, j, l, p, omega[(i, j)].clone() * q[(l, p)].clone());
                }
            }
        }
    }
    s
}

fn square(l: usize) -> Matrix<Rational> {
    Matrix::from_fn(4, 4, |a, b| if a == l && b == l { Rational::one() } else { Rational::zero() })
}

fn outer_sym(x: &[Rational]) -> Matrix<Rational> {
    Matrix::from_fn(x.len(), x.len(), |a, b| x[a].clone() * x[b].clone())
}

/// `u ^ w` as the skew matrix `u w^T - w u^T`.
fn wedge(u: &[Rational], w: &[Rational]) -> Matrix<Rational> {
    Matrix::from_fn(u.len(), u.len(), |a, b| u[a].clone() * w[b].clone() - w[a].clone() * u[b].clone())
}

fn bivector(rng: &mut SeededRng, k: usize) -> Matrix<Rational> {
    wedge(&nonzero_rational_vec(rng, k, 4), &nonzero_rational_vec(rng, k, 4))
}

fn quadric_of_rank(rng: &mut SeededRng, rank: usize) -> Matrix<Rational> {
    (0..rank).fold(Matrix::zeros(4, 4), |acc, _| acc.add(&outer_sym(&nonzero_rational_vec(rng, 4, 4))))
}

fn invertible(rng: &mut SeededRng, n: usize) -> Matrix<Rational> {
    loop {
        let m = Matrix::from_fn(n, n, |_, _| Rational::from_i64(int_in(rng, 3)));
        if m.rank() == n {
            return m;
        }
    }
}

fn any_terms(rng: &mut SeededRng, k: usize, target: usize) -> STensor<Rational> {
    (0..target / 2).fold(STensor::zeros(k), |acc, _| {
        acc.add(&term(&outer_sym(&nonzero_rational_vec(rng, 4, 4)), &bivector(rng, k)))
    })
}

/// Quadrics in the span of two linear forms against bivectors in a
/// hyperplane of `C^k`; rank-one quadrics `l^2 (x) omega` on some draws.
/// With `round_up`, a rank `2 mod 4` target is approached by extra full
/// terms instead (one full term and one `l^2` term stay below rank 6 when
/// the hyperplane is 3-dimensional).
fn pencil_terms(rng: &mut SeededRng, k: usize, target: usize, round_up: bool) -> STensor<Rational> {
    let hyper = |rng: &mut SeededRng| -> Vec<Rational> {
        let mut v = nonzero_rational_vec(rng, k, 4);
        v[k - 1] = Rational::zero();
        if v.iter().all(|x| x.is_zero()) {
            v[0] = Rational::one();
        }
        v
    };
    if target <= k && int_in(rng, 1) == 0 {
        let l = nonzero_rational_vec(rng, 4, 4);
        let omega = (0..target / 2).fold(Matrix::zeros(k, k), |acc, _| {
            acc.add(&wedge(&nonzero_rational_vec(rng, k, 4), &nonzero_rational_vec(rng, k, 4)))
        });
        return term(&outer_sym(&l), &omega);
    }
    let l1 = nonzero_rational_vec(rng, 4, 4);
    let l2 = nonzero_rational_vec(rng, 4, 4);
    let mut s = STensor::zeros(k);
    let full = if round_up && target % 4 == 2 { target / 4 + 2 } else { target / 4 };
    for _ in 0..full {
        let (a, b) = (Rational::from_i64(int_in(rng, 3)), Rational::from_i64(int_in(rng, 3)));
        let mixed = Matrix::from_fn(4, 4, |x, y| l1[x].clone() * l2[y].clone() + l2[x].clone() * l1[y].clone());
        let q = outer_sym(&l1).scale(&a).add(&outer_sym(&l2).scale(&b)).add(&mixed);
        let omega = wedge(&hyper(rng), &hyper(rng));
        s = s.add(&term(&q, &omega));
    }
    if target % 4 == 2 && !round_up {
        let t = Rational::from_i64(int_in(rng, 3));
        let l: Vec<Rational> = l1.iter().zip(&l2).map(|(x, y)| x.clone() + t.clone() * y.clone()).collect();
        s = s.add(&term(&outer_sym(&l), &wedge(&hyper(rng), &hyper(rng))));
    }
    s
}
