//! Skew pencils and the classification of obstruction directions `S`.
//!
//! For `S` in `S2 C4 (x) L2 Ck` with `2 <= k <= 5` and `2 <= rk(S) <= 2k-2`
//! exactly one of the following is certified:
//! - `Cond1`: some `B*` has `rho(S, B*) = f (x) b != 0`;
//! - `Cond2`: `rk(S) = 6` and some `f*` has `rho(S, f* (x) b*) = 0` for all `b*`;
//! - `Cond3`: `rk(S) = 8` and `Z_S = {(f*, b*) : rho(S, f* (x) b*) = 0}` has
//!   dimension at least 2.
//!
//! The case split uses `r`, the generic rank of `sum c1_i c2_j sigma^{ij}`.

mod generate;

use alloc::string::ToString;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

pub use generate::{random_s_biased, random_s_of_rank, SCaseBias};

use crate::linalg::float::{self, c};
use crate::linalg::{exact, Matrix};
use crate::rng::{derived, int_in, nonzero_rational_vec, unit_f64, SeededRng};
use crate::scalar::{rational_to_f64, Rational, Scalar};
use crate::tensors::{flattenings, rho_apply, rho_matrix, rk_s, sigma_hat_block, act_s, STensor};
use crate::Error;

/// Proportionality residual bound for pencil witnesses.
pub const PENCIL_RESIDUAL_TOL: f64 = 1e-8;
/// Lower bound for the stacked image of a pencil witness.
pub const PENCIL_IMAGE_MIN: f64 = 1e-6;
/// Default number of samples for the generic rank `r`.
pub const SIGMA12_REPETITIONS: usize = 50;
/// Relative residual for float `Z_S` points.
pub const ZS_TOL: f64 = 1e-8;
/// Points requested for a `Cond3` certificate.
pub const ZS_CERT_POINTS: usize = 25;
/// Minimum verified points for a `dim Z_S >= 2` verdict.
pub const ZS_MIN_POINTS: usize = 20;

const SING_TOL: f64 = 1e-10;
const COND1_FALLBACK_TRIES: usize = 40;

/// `R1 v0 = l1 u0`, `R2 v0 = l2 u0` with `(l1 u0, l2 u0) != 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PencilWitness {
    pub v0: Vec<C64>,
    pub u0: Vec<C64>,
    pub lambda: (C64, C64),
    /// Largest proportionality defect, relative to `max(|R1|, |R2|)`.
    pub residual: f64,
    /// `|(R1 v0, R2 v0)|`, relative to `max(|R1|, |R2|)`, with `|v0| = 1`.
    pub image_norm: f64,
}

fn check_skew(m: &Matrix<C64>, scale: f64) -> bool {
    let n = m.rows();
    (0..n).all(|i| (0..n).all(|j| (m[(i, j)] + m[(j, i)]).norm() <= 1e-10 * scale.max(f64::MIN_POSITIVE)))
}

/// Constructive pencil lemma: a common direction `v0` on which two skew
/// matrices act proportionally.
pub fn lemma21_solve(r1: &Matrix<C64>, r2: &Matrix<C64>) -> Result<PencilWitness, Error> {
    if !r1.is_square() || r1.rows() != r2.rows() || r1.cols() != r2.cols() {
        return Err(Error::ShapeMismatch("pencil blocks must be square and of equal size".to_string()));
    }
    let scale = r1.frobenius().max(r2.frobenius());
    if scale == 0.0 {
        return Err(Error::Precondition("both pencil blocks vanish".to_string()));
    }
    if !check_skew(r1, scale) || !check_skew(r2, scale) {
        return Err(Error::Precondition("pencil blocks must be skew".to_string()));
    }
    let mut best: Option<PencilWitness> = None;
    for (v, l1, l2) in pencil_candidates(r1, r2, scale)? {
        let w = assess(r1, r2, &float::normalize(&v), l1, l2, scale);
        if best.as_ref().is_none_or(|b| better(&w, b)) {
            best = Some(w);
        }
    }
    match best {
        Some(w) if w.residual <= PENCIL_RESIDUAL_TOL && w.image_norm > PENCIL_IMAGE_MIN => Ok(w),
        Some(w) => Err(Error::VerificationFailed(alloc::format!(
            "pencil witness residual {:e}, image {:e}",
            w.residual,
            w.image_norm
        ))),
        None => Err(Error::NotFound("no pencil candidates".to_string())),
    }
}

fn better(a: &PencilWitness, b: &PencilWitness) -> bool {
    let ok = |w: &PencilWitness| w.image_norm > PENCIL_IMAGE_MIN;
    match (ok(a), ok(b)) {
        (true, false) => true,
        (false, true) => false,
        _ => a.residual < b.residual,
    }
}

fn assess(r1: &Matrix<C64>, r2: &Matrix<C64>, v0: &[C64], l1: C64, l2: C64, scale: f64) -> PencilWitness {
    let a = r1.mul_vec(v0);
    let b = r2.mul_vec(v0);
    let u0 = if l1.norm() >= l2.norm() { float::scale_vec(&a, c(1.0) / l1) } else { float::scale_vec(&b, c(1.0) / l2) };
    let res1 = float::norm(&float::sub_vec(&a, &float::scale_vec(&u0, l1)));
    let res2 = float::norm(&float::sub_vec(&b, &float::scale_vec(&u0, l2)));
    let image = num_traits::Float::hypot(float::norm(&a), float::norm(&b));
    PencilWitness { v0: v0.to_vec(), u0, lambda: (l1, l2), residual: res1.max(res2) / scale, image_norm: image / scale }
}

/// Candidate `(v0, l1, l2)` triples following the proof: a root of the
/// pencil determinant when `R1` is invertible, a kernel vector of `R1`
/// moved by `R2` otherwise, and a recursion on a complement of the common
/// kernel when both vanish there.
fn pencil_candidates(r1: &Matrix<C64>, r2: &Matrix<C64>, scale: f64) -> Result<Vec<(Vec<C64>, C64, C64)>, Error> {
    let n = r1.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if r2.frobenius() <= SING_TOL * scale || r1.frobenius() <= SING_TOL * scale {
        let (m, l) = if r2.frobenius() <= SING_TOL * scale { (r1, (c(1.0), c(0.0))) } else { (r2, (c(0.0), c(1.0))) };
        let col_norm = |j: usize| float::norm(&m.column(j));
        let top = (0..n).map(col_norm).fold(0.0, f64::max);
        if top == 0.0 {
            return Ok(Vec::new());
        }
        let j = (0..n).find(|&j| col_norm(j) >= 0.5 * top).expect("column exists");
        let mut v = alloc::vec![c(0.0); n];
        v[j] = c(1.0);
        return Ok(alloc::vec![(v, l.0, l.1)]);
    }
    if float::rank(r1, SING_TOL) == n {
        let mut out = Vec::new();
        match float::pencil_roots(r1, r2, SING_TOL)? {
            float::PencilRoots::Roots(mus) => {
                for mu in mus {
                    let (_, v) = float::smallest_singular(&r2.sub(&r1.scale(&mu)));
                    out.push((v, c(1.0), mu));
                }
            }
            float::PencilRoots::IdenticallySingular => {
                let mu = C64::new(0.618_033_988_749_894_9, 0.414_213_562_373_095_1);
                let (_, v) = float::smallest_singular(&r2.sub(&r1.scale(&mu)));
                out.push((v, c(1.0), mu));
            }
        }
        return Ok(out);
    }
    let kernel = float::null_space(r1, SING_TOL);
    let kmat = Matrix::from_fn(n, kernel.len(), |r, col| kernel[col][r]);
    let r2k = r2.mul(&kmat);
    if r2k.frobenius() > SING_TOL * scale {
        let (_, y) = float::largest_singular(&r2k);
        return Ok(alloc::vec![(kmat.mul_vec(&y), c(0.0), c(1.0))]);
    }
    // common kernel: restrict to a complement W, where R1 becomes invertible
    let kh = Matrix::from_fn(kernel.len(), n, |r, col| kernel[r][col].conj());
    let comp = float::null_space(&kh, 1e-8);
    if comp.is_empty() {
        return Ok(Vec::new());
    }
    let w = Matrix::from_fn(n, comp.len(), |r, col| comp[col][r]);
    let wt = w.transpose();
    let s1 = wt.mul(r1).mul(&w);
    let s2 = wt.mul(r2).mul(&w);
    let sub = pencil_candidates(&s1, &s2, scale)?;
    Ok(sub.into_iter().map(|(v, l1, l2)| (w.mul_vec(&v), l1, l2)).collect())
}

/// `sum c1_i c2_j sigma^{ij}`.
pub fn sigma12<T: Scalar>(s: &STensor<T>, c1: &[T], c2: &[T]) -> Matrix<T> {
    let k = s.k();
    let mut acc = Matrix::zeros(4, 4);
    for (i, x) in c1.iter().enumerate().take(k) {
        for (j, y) in c2.iter().enumerate().take(k) {
            let w = x.clone() * y.clone();
            if i != j && !w.is_zero() {
                acc = acc.add(&s.block(i, j).scale(&w));
            }
        }
    }
    acc
}

/// The statistic `r`: the largest rank of `sum c1_i c2_j sigma^{ij}` over
/// random integer pairs, with a `b`-basis change (rows `c1, c2, ...`)
/// attaining it.
pub fn sigma12_max_rank(s: &STensor<Rational>, repetitions: usize, seed: u64) -> (usize, Matrix<Rational>) {
    let k = s.k();
    if k < 2 || s.is_zero() {
        return (0, Matrix::identity(k));
    }
    let mut rng = derived(seed, 0x512);
    let mut best: Option<(usize, Vec<Rational>, Vec<Rational>)> = None;
    for _ in 0..repetitions.max(1) {
        let (c1, c2) = independent_pair(&mut rng, k);
        let r = sigma12(s, &c1, &c2).rank();
        if best.as_ref().is_none_or(|b| r > b.0) {
            best = Some((r, c1, c2));
        }
        if r == 4 {
            break;
        }
    }
    let (r, c1, c2) = best.expect("at least one repetition");
    (r, exact::complete_basis(&[c1, c2], k))
}

fn independent_pair(rng: &mut SeededRng, k: usize) -> (Vec<Rational>, Vec<Rational>) {
    loop {
        let c1 = nonzero_rational_vec(rng, k, 10);
        let c2 = nonzero_rational_vec(rng, k, 10);
        let m = Matrix::from_fn(2, k, |r, col| if r == 0 { c1[col].clone() } else { c2[col].clone() });
        if m.rank() == 2 {
            return (c1, c2);
        }
    }
}

/// Exact normal form: `normalized = act_s(C, N, S)` with
/// `normalized.sigma^{01} = diag(d_1, .., d_r, 0, ..)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalization {
    pub r: usize,
    /// `b`-basis change.
    pub c: Matrix<Rational>,
    /// `f`-basis change.
    pub n: Matrix<Rational>,
    pub diagonal: Vec<Rational>,
    pub normalized: STensor<Rational>,
}

pub fn normalize(s: &STensor<Rational>, repetitions: usize, seed: u64) -> Result<Normalization, Error> {
    let k = s.k();
    if k < 2 {
        return Err(Error::Precondition("normalization needs k >= 2".to_string()));
    }
    let (r, cmat) = sigma12_max_rank(s, repetitions, seed);
    let s1 = act_s(&cmat, &Matrix::identity(4), s);
    let (t, diagonal) = exact::symmetric_diagonalize(&s1.block(0, 1)).expect("sigma blocks are symmetric");
    let n = t.transpose();
    let normalized = act_s(&Matrix::identity(k), &n, &s1);
    Ok(Normalization { r, c: cmat, n, diagonal, normalized })
}

/// Whether `sigma^{ab}_{ij} = 0` for all `a, b` and all `f`-indices `i, j >= r`.
pub fn tail_vanishes<T: Scalar>(s: &STensor<T>, r: usize) -> bool {
    let k = s.k();
    (0..k).all(|a| {
        (a + 1..k).all(|b| (r..4).all(|i| (r..4).all(|j| s.sigma(a, b, i, j).is_zero())))
    })
}

/// Which branch of the case analysis applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LemmaCase {
    /// `r <= 2`.
    A,
    /// `r = 3`, `rk = 6`.
    B,
    /// `r = 4`, `rk = 8`, `k = 5`.
    C,
    /// `r = 3`, `rk = 8`, `k = 5`.
    D,
}

/// `rho(S, B*) = f0 (x) b0` with `B*` indexed `i*k + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cond1Witness {
    pub bstar: Vec<C64>,
    pub f0: Vec<C64>,
    pub b0: Vec<C64>,
    pub pencil: PencilWitness,
    /// Second over first singular value of `rho(S, B*)` as a `4 x k` matrix.
    pub rank_ratio: f64,
    /// First singular value relative to `|rho(S, .)| |B*|`.
    pub image_norm: f64,
}

/// `rho(S, fstar (x) e_j) = 0` for every `j`, checked exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct Cond2Witness {
    pub fstar: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactZsPoint {
    pub fstar: Vec<Rational>,
    pub bstar: Vec<Rational>,
}

/// A point of `Z_S`; `residual` is `|rho(S, f (x) b)|` relative to
/// `|rho(S, .)| |f| |b|` (zero when verified exactly).
#[derive(Clone, Debug, PartialEq)]
pub struct ZsPoint {
    pub fstar: Vec<C64>,
    pub bstar: Vec<C64>,
    pub residual: f64,
    pub exact: Option<ExactZsPoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZsSource {
    /// Common eigenvectors of the commuting pair `U, V`.
    Claim1,
    /// Dependent rows of the normalized flattening along lines of `b`-covectors.
    Claim2,
    /// `S = 0`.
    Everything,
}

/// Verified points of `Z_S` together with a finite-difference Jacobian of
/// the two-parameter family they come from.
#[derive(Clone, Debug, PartialEq)]
pub struct ZsFamily {
    pub source: ZsSource,
    pub points: Vec<ZsPoint>,
    pub jacobian_rank: usize,
    pub jacobian_singular_values: Vec<f64>,
}

impl ZsFamily {
    pub fn certifies_dim_two(&self) -> bool {
        self.points.len() >= ZS_MIN_POINTS && self.jacobian_rank >= 2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Condition {
    Cond1(Cond1Witness),
    Cond2(Cond2Witness),
    Cond3(ZsFamily),
}

impl Condition {
    pub fn index(&self) -> u8 {
        match self {
            Condition::Cond1(_) => 1,
            Condition::Cond2(_) => 2,
            Condition::Cond3(_) => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct STensorClassification {
    pub rk_s: usize,
    pub r: usize,
    pub case: LemmaCase,
    /// The vanishing of the normalized tail blocks.
    pub tail_vanishes: bool,
    pub condition: Condition,
}

/// Runs the case analysis and returns a verified witness.
pub fn classify_s(s: &STensor<Rational>, seed: u64) -> Result<STensorClassification, Error> {
    let k = s.k();
    if !(2..=5).contains(&k) {
        return Err(Error::InvalidCharge(k));
    }
    let rk = rk_s(s);
    if rk < 2 || rk > 2 * k - 2 {
        return Err(Error::Precondition(alloc::format!("rk(S) = {rk} outside [2, {}]", 2 * k - 2)));
    }
    let norm = normalize(s, SIGMA12_REPETITIONS, seed)?;
    let r = norm.r;
    let tail = tail_vanishes(&norm.normalized, r);
    let case = match (r, rk) {
        (0..=2, _) => LemmaCase::A,
        (3, 6) => LemmaCase::B,
        (4, 8) => LemmaCase::C,
        (3, 8) => LemmaCase::D,
        _ => return Err(Error::VerificationFailed(alloc::format!("(r, rk) = ({r}, {rk}) is outside the case list"))),
    };
    let condition = match case {
        LemmaCase::A => Condition::Cond1(cond1_witness(s, &norm, seed)?),
        LemmaCase::B => Condition::Cond2(cond2_witness(s, &norm)?),
        LemmaCase::C | LemmaCase::D => {
            let family = if case == LemmaCase::C {
                claim1_family(s, ZS_CERT_POINTS, seed)?
            } else {
                claim2_family(s, ZS_CERT_POINTS, seed)?
            };
            if !family.certifies_dim_two() {
                return Err(Error::VerificationFailed(alloc::format!(
                    "Z_S family has {} points and Jacobian rank {}",
                    family.points.len(),
                    family.jacobian_rank
                )));
            }
            Condition::Cond3(family)
        }
    };
    Ok(STensorClassification { rk_s: rk, r, case, tail_vanishes: tail, condition })
}

fn complex_s(s: &STensor<Rational>) -> STensor<C64> {
    s.map(|x| c(rational_to_f64(x)))
}

fn unit(n: usize, i: usize) -> Vec<C64> {
    let mut v = alloc::vec![c(0.0); n];
    v[i] = c(1.0);
    v
}

/// `rho(S, w (x) v)` has rows `-4 M_p v` with `M_p = sum_c w_c sigma_hat^{pc}`.
/// When the `M_p` span at most two dimensions the pencil lemma makes all
/// rows proportional.
fn column_witness(s: &STensor<C64>, w: &[C64]) -> Option<PencilWitness> {
    let k = s.k();
    let blocks: Vec<Matrix<C64>> = (0..4)
        .map(|p| {
            (0..4).fold(Matrix::zeros(k, k), |acc, col| {
                if w[col].norm() == 0.0 {
                    acc
                } else {
                    acc.add(&sigma_hat_block(s, p, col).scale(&w[col]))
                }
            })
        })
        .collect();
    let flat = Matrix::from_fn(4, k * k, |p, e| blocks[p][(e / k, e % k)]);
    let rank = float::rank(&flat, SING_TOL);
    if rank == 0 || rank > 2 {
        return None;
    }
    let norms: Vec<f64> = blocks.iter().map(|b| b.frobenius()).collect();
    let first = (0..4).max_by(|&a, &b| norms[a].total_cmp(&norms[b]))?;
    let r1 = blocks[first].clone();
    let r2 = if rank == 1 {
        Matrix::zeros(k, k)
    } else {
        // the block furthest from the line through r1
        let r1v: Vec<C64> = r1.data().to_vec();
        let n1 = float::dot(&r1v, &r1v);
        let residual = |b: &Matrix<C64>| {
            let bv = b.data().to_vec();
            let coef = float::dot(&r1v, &bv) / n1;
            b.sub(&r1.scale(&coef))
        };
        let second = (0..4).max_by(|&a, &b| residual(&blocks[a]).frobenius().total_cmp(&residual(&blocks[b]).frobenius()))?;
        residual(&blocks[second])
    };
    lemma21_solve(&r1, &r2).ok()
}

fn verify_cond1(s: &STensor<C64>, fpart: &[C64], bpart: &[C64], pencil: PencilWitness) -> Option<Cond1Witness> {
    let k = s.k();
    let bstar: Vec<C64> = (0..4 * k).map(|idx| fpart[idx / k] * bpart[idx % k]).collect();
    let rho = rho_matrix(s);
    let img = rho.mul_vec(&bstar);
    let m = Matrix::from_vec(4, k, img);
    let sv = float::singular_values(&m);
    let scale = rho.frobenius() * float::norm(&bstar);
    if scale == 0.0 || sv[0] <= PENCIL_IMAGE_MIN * scale {
        return None;
    }
    let ratio = sv.get(1).copied().unwrap_or(0.0) / sv[0];
    if ratio > PENCIL_RESIDUAL_TOL {
        return None;
    }
    let p = (0..4).max_by(|&a, &b| float::norm(m.row(a)).total_cmp(&float::norm(m.row(b))))?;
    let b0 = m.row(p).to_vec();
    let bb = float::dot(&b0, &b0);
    let f0 = (0..4).map(|q| float::dot(&b0, m.row(q)) / bb).collect();
    Some(Cond1Witness { bstar, f0, b0, pencil, rank_ratio: ratio, image_norm: sv[0] / scale })
}

fn cond1_witness(s: &STensor<Rational>, norm: &Normalization, seed: u64) -> Result<Cond1Witness, Error> {
    let sc = complex_s(s);
    let sn = complex_s(&norm.normalized);
    let nt = norm.n.transpose().to_complex();
    let ct = norm.c.transpose().to_complex();
    for col in (0..4).rev() {
        let w = unit(4, col);
        if let Some(pw) = column_witness(&sn, &w) {
            let fpart = nt.mul_vec(&w);
            let bpart = ct.mul_vec(&pw.v0);
            if let Some(wit) = verify_cond1(&sc, &fpart, &bpart, pw) {
                return Ok(wit);
            }
        }
    }
    // randomized search for a rank-one element of the image
    let mut rng = derived(seed, 0xC1);
    let kernel_dirs: Vec<Vec<C64>> = (norm.r..4).map(|col| nt.mul_vec(&unit(4, col))).collect();
    for attempt in 0..COND1_FALLBACK_TRIES {
        let w: Vec<C64> = if attempt % 2 == 0 && !kernel_dirs.is_empty() {
            kernel_dirs.iter().fold(alloc::vec![c(0.0); 4], |acc, d| {
                let t = c(int_in(&mut rng, 9) as f64);
                acc.iter().zip(d).map(|(a, x)| a + t * x).collect()
            })
        } else {
            (0..4).map(|_| c(int_in(&mut rng, 9) as f64)).collect()
        };
        if float::norm(&w) == 0.0 {
            continue;
        }
        if let Some(pw) = column_witness(&sc, &w) {
            let v0 = pw.v0.clone();
            if let Some(wit) = verify_cond1(&sc, &w, &v0, pw) {
                return Ok(wit);
            }
        }
    }
    Err(Error::NotFound("no rank-one element in the image of rho(S, .)".to_string()))
}

fn cond2_holds(s: &STensor<Rational>, fstar: &[Rational]) -> bool {
    let k = s.k();
    fstar.iter().any(|x| !x.is_zero())
        && (0..k).all(|j| {
            let mut b = alloc::vec![Rational::zero(); k];
            b[j] = Rational::one();
            rho_apply(s, fstar, &b).iter().all(|x| x.is_zero())
        })
}

fn cond2_witness(s: &STensor<Rational>, norm: &Normalization) -> Result<Cond2Witness, Error> {
    // the fourth normalized covector, pulled back
    let fstar: Vec<Rational> = norm.n.row(3).to_vec();
    if cond2_holds(s, &fstar) {
        return Ok(Cond2Witness { fstar: exact::primitive_integer(&fstar) });
    }
    // common kernel of all blocks
    let k = s.k();
    let stacked: Vec<Matrix<Rational>> =
        (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).map(|(a, b)| s.block(a, b)).collect();
    let tall = stacked.iter().skip(1).fold(stacked[0].clone(), |acc, m| acc.vstack(m));
    if let Some(f) = tall.kernel_basis().into_iter().next() {
        if cond2_holds(s, &f) {
            return Ok(Cond2Witness { fstar: exact::primitive_integer(&f) });
        }
    }
    Err(Error::VerificationFailed("no covector annihilates every b*".to_string()))
}

fn rel_residual(s: &STensor<C64>, fstar: &[C64], bstar: &[C64]) -> f64 {
    let scale = rho_matrix(s).frobenius() * float::norm(fstar) * float::norm(bstar);
    float::norm(&rho_apply(s, fstar, bstar)) / scale.max(f64::MIN_POSITIVE)
}

/// Float normal form for case (c): `normalized.sigma^{01} = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseCFrame {
    pub c: Matrix<Rational>,
    pub n: Matrix<C64>,
    pub normalized: STensor<C64>,
}

pub fn case_c_frame(s: &STensor<Rational>, seed: u64) -> Result<CaseCFrame, Error> {
    let k = s.k();
    let (r, cmat) = sigma12_max_rank(s, SIGMA12_REPETITIONS, seed);
    if k != 5 || r != 4 {
        return Err(Error::Precondition(alloc::format!("case (c) needs k = 5 and r = 4, got k = {k}, r = {r}")));
    }
    let s1 = act_s(&cmat, &Matrix::identity(4), s);
    let (t, rank) = float::symmetric_congruence_normalize(&s1.block(0, 1).to_complex(), 1e-12)?;
    if rank != 4 {
        return Err(Error::VerificationFailed(alloc::format!("normalized block has rank {rank}")));
    }
    let n = t.transpose();
    let normalized = act_s(&Matrix::identity(k), &n, &complex_s(&s1));
    Ok(CaseCFrame { c: cmat, n, normalized })
}

/// All `Z_S` points produced by common eigenvectors of
/// `U = sum b_j sigma^{0j}`, `V = sum b_j sigma^{1j}` (`j >= 2`), in the
/// normalized frame.
pub fn claim1_candidates(s: &STensor<C64>, b345: &[C64], tol: f64) -> Result<Vec<ZsPoint>, Error> {
    check_claim1_frame(s, b345)?;
    let u = (2..5).fold(Matrix::zeros(4, 4), |acc, j| acc.add(&s.block(0, j).scale(&b345[j - 2])));
    let v = (2..5).fold(Matrix::zeros(4, 4), |acc, j| acc.add(&s.block(1, j).scale(&b345[j - 2])));
    let (nu, nv) = (u.frobenius(), v.frobenius());
    let comm = u.mul(&v).sub(&v.mul(&u)).frobenius();
    if comm > tol * (nu * nv).max(1.0) {
        return Err(Error::NonCommuting { norm: comm });
    }
    let mut out: Vec<ZsPoint> = Vec::new();
    for lam in float::eigenvalues(&u)? {
        let shifted = u.sub(&Matrix::identity(4).scale(&lam));
        let mut basis = float::null_space(&shifted, 1e-6);
        if basis.is_empty() {
            basis.push(float::smallest_singular(&shifted).1);
        }
        let q = Matrix::from_fn(4, basis.len(), |r, col| basis[col][r]);
        let qh = Matrix::from_fn(basis.len(), 4, |r, col| basis[r][col].conj());
        let w = qh.mul(&v).mul(&q);
        for nu_w in float::eigenvalues(&w)? {
            let y = float::smallest_singular(&w.sub(&Matrix::identity(w.rows()).scale(&nu_w))).1;
            let f = float::normalize(&q.mul_vec(&y));
            let eu = float::dot(&f, &u.mul_vec(&f));
            let ev = float::dot(&f, &v.mul_vec(&f));
            let b = alloc::vec![ev, -eu, b345[0], b345[1], b345[2]];
            let residual = rel_residual(s, &f, &b);
            if residual <= tol && !out.iter().any(|p| same_pair(p, &f, &b)) {
                out.push(ZsPoint { fstar: f, bstar: b, residual, exact: None });
            }
        }
    }
    Ok(out)
}

fn check_claim1_frame(s: &STensor<C64>, b345: &[C64]) -> Result<(), Error> {
    if s.k() != 5 || b345.len() != 3 || float::norm(b345) == 0.0 {
        return Err(Error::Precondition("claim 1 needs k = 5 and a nonzero triple".to_string()));
    }
    let defect = s.block(0, 1).sub(&Matrix::identity(4)).max_abs();
    if defect > 1e-8 {
        return Err(Error::Precondition(alloc::format!("sigma^01 differs from the identity by {defect:e}")));
    }
    Ok(())
}

fn same_pair(p: &ZsPoint, f: &[C64], b: &[C64]) -> bool {
    crate::planes::same_point(&p.fstar, f) && crate::planes::same_point(&p.bstar, b)
}

/// One verified `Z_S` point from a normalized case-(c) tensor.
pub fn claim1_point(s: &STensor<C64>, b345: &[C64], tol: f64) -> Result<ZsPoint, Error> {
    claim1_candidates(s, b345, tol)?
        .into_iter()
        .min_by(|a, b| a.residual.total_cmp(&b.residual))
        .ok_or_else(|| Error::NotFound("no common eigenvector yields a Z_S point".to_string()))
}

/// Affine chart: divide `f` and `b` by fixed coordinates and drop them.
fn chart(p: &ZsPoint, fi: usize, bi: usize) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::new();
    out.extend(p.fstar.iter().enumerate().filter(|(i, _)| *i != fi).map(|(_, z)| z / p.fstar[fi]));
    out.extend(p.bstar.iter().enumerate().filter(|(i, _)| *i != bi).map(|(_, z)| z / p.bstar[bi]));
    out
}

fn argmax_abs(v: &[C64]) -> usize {
    (0..v.len()).max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm())).unwrap_or(0)
}

fn jacobian_rank(columns: &[Vec<C64>]) -> (usize, Vec<f64>) {
    let rows = columns[0].len();
    let j = Matrix::from_fn(rows, columns.len(), |r, col| columns[col][r]);
    let sv = float::singular_values(&j);
    let top = sv.first().copied().unwrap_or(0.0);
    let rank = if top == 0.0 { 0 } else { sv.iter().filter(|&&x| x > 1e-6 * top).count() };
    (rank, sv)
}

fn point_count_side(points: usize) -> usize {
    let mut side = 2;
    while side * side < points {
        side += 1;
    }
    side
}

/// A grid of claim-1 points pulled back to the original frame, each
/// verified on `S`, with a branch-tracked finite-difference Jacobian.
pub fn claim1_family(s: &STensor<Rational>, points: usize, seed: u64) -> Result<ZsFamily, Error> {
    let frame = case_c_frame(s, seed)?;
    let sc = complex_s(s);
    let nt = frame.n.transpose();
    let ct = frame.c.transpose().to_complex();
    let mut rng = derived(seed, 0xC1A1);
    let side = point_count_side(points);
    let mut last_err = Error::NotFound("no grid attempts".to_string());
    for _ in 0..4 {
        let rand3 = |rng: &mut SeededRng| -> Vec<C64> { (0..3).map(|_| c(unit_f64(rng))).collect() };
        let base = rand3(&mut rng);
        let d1 = rand3(&mut rng);
        let d2 = rand3(&mut rng);
        let at = |s_: f64, t_: f64| -> Vec<C64> {
            (0..3).map(|i| base[i] + d1[i] * s_ + d2[i] * t_).collect()
        };
        let pulled = |b345: &[C64]| -> Result<Vec<ZsPoint>, Error> {
            let cands = claim1_candidates(&frame.normalized, b345, ZS_TOL)?;
            Ok(cands
                .into_iter()
                .map(|p| {
                    let f = float::normalize(&nt.mul_vec(&p.fstar));
                    let b = float::normalize(&ct.mul_vec(&p.bstar));
                    let residual = rel_residual(&sc, &f, &b);
                    ZsPoint { fstar: f, bstar: b, residual, exact: None }
                })
                .filter(|p| p.residual <= ZS_TOL)
                .collect())
        };
        let center = match pulled(&at(0.0, 0.0)) {
            Ok(c0) if !c0.is_empty() => c0.into_iter().next().expect("nonempty"),
            Ok(_) => {
                last_err = Error::NotFound("no claim-1 point at the grid center".to_string());
                continue;
            }
            Err(e) => return Err(e),
        };
        let track = |b345: &[C64]| -> Result<Option<ZsPoint>, Error> {
            Ok(pulled(b345)?.into_iter().max_by(|a, b| {
                float::dot(&center.fstar, &a.fstar).norm().total_cmp(&float::dot(&center.fstar, &b.fstar).norm())
            }))
        };
        let mut pts = Vec::new();
        let mut complete = true;
        for i in 0..side {
            for j in 0..side {
                if pts.len() == points {
                    break;
                }
                let st = |x: usize| 0.5 * (x as f64 / (side - 1) as f64 - 0.5);
                match track(&at(st(i), st(j)))? {
                    Some(p) => pts.push(p),
                    None => complete = false,
                }
            }
        }
        if !complete {
            last_err = Error::NotFound("degenerate claim-1 grid".to_string());
            continue;
        }
        let (fi, bi) = (argmax_abs(&center.fstar), argmax_abs(&center.bstar));
        let h = 1e-5;
        let mut cols = Vec::new();
        for (ds, dt) in [(h, 0.0), (0.0, h)] {
            let (Some(plus), Some(minus)) = (track(&at(ds, dt))?, track(&at(-ds, -dt))?) else {
                complete = false;
                break;
            };
            let (cp, cm) = (chart(&plus, fi, bi), chart(&minus, fi, bi));
            cols.push(cp.iter().zip(&cm).map(|(a, b)| (a - b) / (2.0 * h)).collect());
        }
        if !complete {
            last_err = Error::NotFound("Jacobian branch lost".to_string());
            continue;
        }
        let (rank, sv) = jacobian_rank(&cols);
        return Ok(ZsFamily { source: ZsSource::Claim1, points: pts, jacobian_rank: rank, jacobian_singular_values: sv });
    }
    Err(last_err)
}

/// One exact `Z_S` point from a case-(d) tensor and the line of
/// `b`-covectors spanned by `n1, n2`.
pub fn claim2_witness(s: &STensor<Rational>, n1: &[Rational], n2: &[Rational]) -> Result<ZsPoint, Error> {
    let k = s.k();
    if k != 5 || n1.len() != k || n2.len() != k {
        return Err(Error::Precondition("claim 2 needs k = 5 and two b-covectors".to_string()));
    }
    let pair = Matrix::from_fn(2, k, |r, col| if r == 0 { n1[col].clone() } else { n2[col].clone() });
    if pair.rank() < 2 {
        return Err(Error::Precondition("the line needs two independent covectors".to_string()));
    }
    let rk = rk_s(s);
    if rk != 8 {
        return Err(Error::Precondition(alloc::format!("claim 2 needs rk(S) = 8, got {rk}")));
    }
    let cmat = exact::complete_basis(&[n1.to_vec(), n2.to_vec()], k);
    let s1 = act_s(&cmat, &Matrix::identity(4), s);
    let m = s1.block(0, 1);
    let r = m.rank();
    if r != 3 {
        return Err(Error::Precondition(alloc::format!("sigma^12 on this line has rank {r}, case (d) needs 3")));
    }
    let (t, _) = exact::symmetric_diagonalize(&m).expect("symmetric");
    let s2 = act_s(&Matrix::identity(k), &t.transpose(), &s1);
    let (sigma, _) = flattenings(&s2);
    let rows = Matrix::from_fn(4 * k, 2, |e, col| sigma[(if col == 0 { 3 } else { 7 }, e)].clone());
    let dep = rows
        .kernel_basis()
        .into_iter()
        .next()
        .ok_or_else(|| Error::VerificationFailed("rows 3 and 7 of the normalized flattening are independent".to_string()))?;
    let fstar: Vec<Rational> = (0..4).map(|i| t[(i, 3)].clone()).collect();
    let bstar: Vec<Rational> = (0..k).map(|j| dep[0].clone() * n1[j].clone() + dep[1].clone() * n2[j].clone()).collect();
    if !rho_apply(s, &fstar, &bstar).iter().all(|x| x.is_zero()) {
        return Err(Error::VerificationFailed("claim 2 point is not in Z_S".to_string()));
    }
    let fstar = exact::primitive_integer(&fstar);
    let bstar = exact::primitive_integer(&bstar);
    let to_c = |v: &[Rational]| -> Vec<C64> { v.iter().map(|x| c(rational_to_f64(x))).collect() };
    Ok(ZsPoint { fstar: to_c(&fstar), bstar: to_c(&bstar), residual: 0.0, exact: Some(ExactZsPoint { fstar, bstar }) })
}

/// Claim-2 points over random lines, plus a Jacobian from moving `n1` in
/// two directions.
pub fn claim2_family(s: &STensor<Rational>, points: usize, seed: u64) -> Result<ZsFamily, Error> {
    let k = s.k();
    let mut rng = derived(seed, 0xC1A2);
    let mut pts = Vec::new();
    let mut first_line: Option<(Vec<Rational>, Vec<Rational>)> = None;
    let mut failures = 0;
    while pts.len() < points {
        let (n1, n2) = independent_pair(&mut rng, k);
        match claim2_witness(s, &n1, &n2) {
            Ok(p) => {
                first_line.get_or_insert((n1, n2));
                pts.push(p);
            }
            Err(Error::Precondition(msg)) if msg.contains("has rank") && failures < 10 * points => failures += 1,
            Err(e) => return Err(e),
        }
    }
    let Some((n1, n2)) = first_line else {
        return Ok(ZsFamily { source: ZsSource::Claim2, points: pts, jacobian_rank: 0, jacobian_singular_values: Vec::new() });
    };
    let p0 = claim2_witness(s, &n1, &n2)?;
    let (fi, bi) = (argmax_abs(&p0.fstar), argmax_abs(&p0.bstar));
    let c0 = chart(&p0, fi, bi);
    let h = Rational::from_ratio(1, 10_000);
    let mut cols = Vec::new();
    for _ in 0..2 {
        let d = nonzero_rational_vec(&mut rng, k, 5);
        let moved: Vec<Rational> = n1.iter().zip(&d).map(|(a, x)| a.clone() + h.clone() * x.clone()).collect();
        let p = claim2_witness(s, &moved, &n2)?;
        let cp = chart(&p, fi, bi);
        cols.push(cp.iter().zip(&c0).map(|(a, b)| (a - b) / 1e-4).collect());
    }
    let (rank, sv) = jacobian_rank(&cols);
    Ok(ZsFamily { source: ZsSource::Claim2, points: pts, jacobian_rank: rank, jacobian_singular_values: sv })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZsVerdict {
    AtLeastTwo,
    /// Neither claim applies (`rk(S) < 8` or `k != 5`); the `Cond1`/`Cond2`
    /// witnesses are the relevant evidence there.
    NotApplicable,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZsProbe {
    pub trials: usize,
    pub verdict: ZsVerdict,
    pub family: Option<ZsFamily>,
}

/// Certifies `dim Z_S >= 2` by a verified two-parameter family of points.
pub fn zs_dimension_probe(s: &STensor<Rational>, trials: usize, seed: u64) -> Result<ZsProbe, Error> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".to_string()));
    }
    let k = s.k();
    let family = if s.is_zero() {
        Some(everything_family(k, trials, seed))
    } else if k == 5 && rk_s(s) == 8 {
        match sigma12_max_rank(s, SIGMA12_REPETITIONS, seed).0 {
            4 => Some(claim1_family(s, trials, seed)?),
            3 => Some(claim2_family(s, trials, seed)?),
            _ => None,
        }
    } else {
        None
    };
    let verdict = match &family {
        None => ZsVerdict::NotApplicable,
        Some(f) if f.points.len() >= trials.min(ZS_MIN_POINTS) && f.jacobian_rank >= 2 => ZsVerdict::AtLeastTwo,
        Some(_) => ZsVerdict::Inconclusive,
    };
    Ok(ZsProbe { trials, verdict, family })
}

fn everything_family(k: usize, points: usize, seed: u64) -> ZsFamily {
    // every pair lies in Z_S; move f in a plane of directions
    let mut rng = derived(seed, 0x2E);
    let rand_v = |rng: &mut SeededRng, n: usize| -> Vec<C64> { (0..n).map(|_| c(unit_f64(rng))).collect() };
    let b = float::normalize(&rand_v(&mut rng, k));
    let base = rand_v(&mut rng, 4);
    let d1 = rand_v(&mut rng, 4);
    let d2 = rand_v(&mut rng, 4);
    let at = |s_: f64, t_: f64| -> ZsPoint {
        let f = (0..4).map(|i| base[i] + d1[i] * s_ + d2[i] * t_).collect();
        ZsPoint { fstar: f, bstar: b.clone(), residual: 0.0, exact: None }
    };
    let side = point_count_side(points);
    let pts: Vec<ZsPoint> =
        (0..side * side).take(points).map(|idx| at((idx / side) as f64 * 0.1, (idx % side) as f64 * 0.1)).collect();
    let p0 = at(0.0, 0.0);
    let (fi, bi) = (argmax_abs(&p0.fstar), argmax_abs(&p0.bstar));
    let c0 = chart(&p0, fi, bi);
    let h = 1e-5;
    let cols: Vec<Vec<C64>> = [(h, 0.0), (0.0, h)]
        .iter()
        .map(|&(ds, dt)| chart(&at(ds, dt), fi, bi).iter().zip(&c0).map(|(a, b)| (a - b) / h).collect())
        .collect();
    let (rank, sv) = jacobian_rank(&cols);
    ZsFamily { source: ZsSource::Everything, points: pts, jacobian_rank: rank, jacobian_singular_values: sv }
}
