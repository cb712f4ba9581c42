//! The unstable-plane locus `W(E)`, computed as the set of `f*` for which
//! `Im beta(A, .)` contains a decomposable tensor `f* (x) b*`.

use alloc::string::ToString;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::linalg::float::{self, c};
use crate::linalg::{poly, Matrix};
use crate::monad::h0_plane_float;
use crate::rng::{derived, int_in, unit_f64};
use crate::scalar::{rational_to_f64, Rational, Scalar};
use crate::tensors::{beta_matrix, sym_of, ATensor};
use crate::Error;

/// Minimum number of points for a quadric fit.
pub const QUADRIC_MIN_POINTS: usize = 9;
/// Minimum number of trials for a `dim >= 2` verdict.
pub const PROBE_MIN_TRIALS: usize = 20;
/// Fraction of trials that must hit for a `dim >= 2` verdict.
pub const PROBE_HIT_FRACTION: f64 = 0.8;

#[derive(Clone, Debug, PartialEq)]
pub struct PlanePoint {
    pub fstar: Vec<C64>,
    pub bstar: Option<Vec<C64>>,
    pub h0: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DimensionVerdict {
    AtLeastTwo,
    AtMostOneLikely,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionProbe {
    pub trials: usize,
    pub hits: usize,
    pub verdict: DimensionVerdict,
    pub hit_points: Vec<PlanePoint>,
}

/// Result of [`unstable_plane_test`].
#[derive(Clone, Debug, PartialEq)]
pub struct UnstableTest<T> {
    pub unstable: bool,
    pub bstar: Option<Vec<T>>,
    /// `dim (Im beta  intersect  f* (x) C^k*)`.
    pub intersection_dim: usize,
}

/// `[beta | f* (x) e_0 | ... | f* (x) e_{k-1}]`, `4k x (3k+2)`.
pub fn assembled<T: Scalar>(a: &ATensor<T>, fstar: &[T]) -> Matrix<T> {
    let k = a.k();
    let beta = beta_matrix(a);
    let n = a.n();
    Matrix::from_fn(4 * k, n + k, |r, col| {
        if col < n {
            beta[(r, col)].clone()
        } else if r % k == col - n {
            fstar[r / k].clone()
        } else {
            T::zero()
        }
    })
}

fn check_fstar<T: Scalar>(fstar: &[T]) -> Result<(), Error> {
    if fstar.len() != 4 || fstar.iter().all(|x| x.is_zero()) {
        return Err(Error::Precondition("plane covector must be a nonzero 4-vector".to_string()));
    }
    Ok(())
}

/// Exact decision whether `H = {f* = 0}` is unstable, with `b*` on success.
pub fn unstable_plane_test(a: &ATensor<Rational>, fstar: &[Rational]) -> Result<UnstableTest<Rational>, Error> {
    check_fstar(fstar)?;
    let n = a.n();
    if beta_matrix(a).rank() < n {
        return Err(Error::Precondition("beta(A, .) is not injective; A is not an instanton".to_string()));
    }
    let kernel = assembled(a, fstar).kernel_basis();
    // beta is injective, so every kernel vector has a nonzero b-part
    let bstar = kernel.first().map(|v| v[n..].iter().map(|x| -x.clone()).collect());
    Ok(UnstableTest { unstable: !kernel.is_empty(), bstar, intersection_dim: kernel.len() })
}

/// Float version of [`unstable_plane_test`].
pub fn unstable_plane_test_float(a: &ATensor<C64>, fstar: &[C64], tol: f64) -> Result<UnstableTest<C64>, Error> {
    if fstar.len() != 4 || fstar.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::Precondition("plane covector must be a nonzero 4-vector".to_string()));
    }
    let n = a.n();
    let kernel = float::null_space(&assembled(a, fstar), tol);
    let bstar = kernel.first().map(|v| float::normalize(&v[n..]).iter().map(|z| -z).collect());
    Ok(UnstableTest { unstable: !kernel.is_empty(), bstar, intersection_dim: kernel.len() })
}

/// Outcome of a line probe.
#[derive(Clone, Debug, PartialEq)]
pub enum LineProbe {
    /// Finitely many verified hits on the pencil.
    Hits(Vec<PlanePoint>),
    /// Every plane of the pencil is unstable (always the case for `k = 1`).
    WholeLine,
}

impl LineProbe {
    pub fn hits(&self) -> &[PlanePoint] {
        match self {
            LineProbe::Hits(h) => h,
            LineProbe::WholeLine => &[],
        }
    }
}

fn plane_point(a: &ATensor<C64>, fstar: Vec<C64>, tol: f64) -> Result<PlanePoint, Error> {
    let fstar = float::normalize(&fstar);
    let test = unstable_plane_test_float(a, &fstar, tol)?;
    let h0 = h0_plane_float(a, &fstar, tol)?;
    Ok(PlanePoint { fstar, bstar: test.bstar, h0 })
}

/// Unstable planes on the pencil `f0 + t f1` (and `t = infinity`).
///
/// The assembled matrix `N(t)` is affine in `t` in its last `k` columns, so
/// `det(R N(t))` for a random projection `R` is a polynomial of degree at
/// most `k`; it is interpolated at roots of unity and its roots are
/// verified by a rank test on `N(t)` itself.
pub fn w_line_probe(a: &ATensor<C64>, f0: &[C64], f1: &[C64], seed: u64, tol: f64) -> Result<LineProbe, Error> {
    let pair = Matrix::from_fn(2, 4, |r, col| if r == 0 { f0[col] } else { f1[col] });
    if f0.len() != 4 || f1.len() != 4 || float::rank(&pair, 1e-10) < 2 {
        return Err(Error::Precondition("pencil endpoints must be independent".to_string()));
    }
    let k = a.k();
    let n = a.n();
    let cols = n + k;
    let at = |t: C64| -> Vec<C64> { f0.iter().zip(f1).map(|(x, y)| x + t * y).collect() };
    let full = |fstar: &[C64]| float::rank(&assembled(a, fstar), tol) < cols;
    if 4 * k < cols {
        return Ok(LineProbe::WholeLine);
    }
    let mut rng = derived(seed, 0x11E);
    let proj = Matrix::from_fn(cols, 4 * k, |_, _| C64::new(unit_f64(&mut rng), unit_f64(&mut rng)));
    let nodes = poly::unit_circle_nodes(k + 1);
    let values: Vec<C64> = nodes.iter().map(|w| float::determinant(&proj.mul(&assembled(a, &at(*w))))).collect();
    let coeffs = poly::interpolate_on_circle(&values, 1.0);
    let mut hits = Vec::new();
    match poly::effective_degree(&coeffs, 1e-10) {
        None => {
            let generic = at(C64::new(0.37, -0.21));
            if full(&generic) {
                return Ok(LineProbe::WholeLine);
            }
        }
        Some(_) => {
            for t in poly::merge_clusters(poly::roots(&coeffs, 1e-10)?, 1e-6) {
                let fstar = at(t);
                if full(&fstar) && !hits.iter().any(|p: &PlanePoint| same_point(&p.fstar, &fstar)) {
                    hits.push(plane_point(a, fstar, tol)?);
                }
            }
        }
    }
    if full(f1) && !hits.iter().any(|p| same_point(&p.fstar, f1)) {
        hits.push(plane_point(a, f1.to_vec(), tol)?);
    }
    Ok(LineProbe::Hits(hits))
}

/// Projective equality of two covectors.
pub fn same_point(x: &[C64], y: &[C64]) -> bool {
    let m = Matrix::from_fn(2, x.len(), |r, col| if r == 0 { x[col] } else { y[col] });
    float::rank(&m, 1e-7) < 2
}

/// Random-line incidence probe of `dim W(E)`.
pub fn w_dimension_probe(a: &ATensor<C64>, trials: usize, seed: u64, tol: f64) -> Result<DimensionProbe, Error> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".to_string()));
    }
    let mut rng = derived(seed, 0xD1);
    let mut hits = 0;
    let mut hit_points = Vec::new();
    for trial in 0..trials {
        let (f0, f1) = loop {
            let f0: Vec<C64> = (0..4).map(|_| c(int_in(&mut rng, 9) as f64)).collect();
            let f1: Vec<C64> = (0..4).map(|_| c(int_in(&mut rng, 9) as f64)).collect();
            let pair = Matrix::from_fn(2, 4, |r, col| if r == 0 { f0[col] } else { f1[col] });
            if float::rank(&pair, 1e-10) == 2 {
                break (f0, f1);
            }
        };
        match w_line_probe(a, &f0, &f1, seed.wrapping_add(trial as u64), tol)? {
            LineProbe::WholeLine => hits += 1,
            LineProbe::Hits(h) if !h.is_empty() => {
                hits += 1;
                hit_points.extend(h);
            }
            LineProbe::Hits(_) => {}
        }
    }
    let needed = num_traits::Float::ceil(PROBE_HIT_FRACTION * trials as f64) as usize;
    let verdict = if trials >= PROBE_MIN_TRIALS && hits >= needed {
        DimensionVerdict::AtLeastTwo
    } else {
        DimensionVerdict::AtMostOneLikely
    };
    Ok(DimensionProbe { trials, hits, verdict, hit_points })
}

/// Fitted quadric in the monomial order of [`sym_of`].
#[derive(Clone, Debug, PartialEq)]
pub struct QuadricFit {
    pub coeffs: Vec<C64>,
    pub residual: f64,
    pub held_out: usize,
}

fn monomials(p: &[C64]) -> Vec<C64> {
    (0..10)
        .map(|s| {
            let (i, j) = sym_of(s);
            p[i] * p[j]
        })
        .collect()
}

/// Evaluates a quadric given in the monomial order of [`sym_of`].
pub fn eval_quadric(coeffs: &[C64], p: &[C64]) -> C64 {
    monomials(p).iter().zip(coeffs).map(|(m, q)| m * q).sum()
}

/// Least singular vector of the monomial evaluation matrix. When more
/// than 9 points are given, up to a third are held out and the residual
/// is the largest normalized evaluation on them.
pub fn quadric_fit(points: &[Vec<C64>]) -> Result<QuadricFit, Error> {
    if points.len() < QUADRIC_MIN_POINTS {
        return Err(Error::Precondition(alloc::format!(
            "quadric fit is underdetermined with {} points",
            points.len()
        )));
    }
    let pts: Vec<Vec<C64>> = points.iter().map(|p| float::normalize(p)).collect();
    let held_out = if pts.len() > QUADRIC_MIN_POINTS { (pts.len() - QUADRIC_MIN_POINTS).min(pts.len() / 3) } else { 0 };
    let fit = &pts[..pts.len() - held_out];
    let m = Matrix::from_fn(fit.len(), 10, |r, col| monomials(&fit[r])[col]);
    let (_, coeffs) = float::smallest_singular(&m);
    let check = if held_out > 0 { &pts[pts.len() - held_out..] } else { fit };
    let residual = check.iter().map(|p| eval_quadric(&coeffs, p).norm()).fold(0.0, f64::max);
    Ok(QuadricFit { coeffs, residual, held_out })
}

/// Complex copy of an exact tensor.
pub fn to_complex(a: &ATensor<Rational>) -> ATensor<C64> {
    a.map(|x| c(rational_to_f64(x)))
}
