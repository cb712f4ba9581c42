//! Tangent dimensions, the smoothness test through `xi`, and an executable
//! trace of the argument excluding obstruction directions `S`.
//!
//! With `dgamma` and `xi(A, .)` adjoint, `rank dgamma = rank xi`, so
//! `moduli_tangent_dim - xi_corank = (8k^2+8k) - (3k^2+5k+3) - 5k(k-1) = 8k-3`
//! holds for every `A`; a point is smooth exactly when `xi_corank = 0`.

use alloc::string::ToString;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::linalg::{float, Backend, Matrix};
use crate::monad::{certify, MonadCertificate};
use crate::pencil::{classify_s, Condition, ZsFamily};
use crate::planes::{unstable_plane_test, w_dimension_probe, DimensionVerdict};
use crate::rng::{derived, int_in};
use crate::scalar::{prime, rational_to_f64, Fp, Rational, Scalar};
use crate::tensors::{
    a_dim, beta_matrix, dgamma, epsilon_at, epsilon_matrix, gamma, group_dim, kappa, moduli_expected, rho_matrix,
    rk_s, s_dim, smooth_tangent_dim, xi, xi_matrix, ATensor, GammaMode, STensor,
};
use crate::Error;

/// The threshold as misprinted in one place (`3k^2 + 18k`); reported only.
pub fn misprinted_threshold(k: usize) -> usize {
    3 * k * k + 18 * k
}

/// `(tangent_I_dim, moduli_tangent_dim)` from a rank of `dgamma`.
pub fn dims_from_rank(k: usize, rank_dgamma: usize) -> (usize, i64) {
    let t = a_dim(k) - rank_dgamma;
    (t, t as i64 - group_dim(k) as i64)
}

/// Tangent dimensions of a tensor satisfying the monad and nondegeneracy
/// conditions exactly.
pub fn tangent_dims(a: &ATensor<Rational>) -> Result<(usize, i64), Error> {
    if !gamma(a, GammaMode::MatrixOfForms).iter().all(|x| x.is_zero()) {
        return Err(Error::Precondition("gamma(A) != 0".to_string()));
    }
    if beta_matrix(a).rank() < a.n() {
        return Err(Error::Precondition("beta(A, .) is not injective".to_string()));
    }
    Ok(dims_from_rank(a.k(), dgamma(a).rank()))
}

/// `dim ker xi(A, .)` with a kernel basis as S-tensors.
pub fn xi_corank(a: &ATensor<Rational>) -> (usize, Vec<STensor<Rational>>) {
    let k = a.k();
    if s_dim(k) == 0 {
        return (0, Vec::new());
    }
    let basis: Vec<STensor<Rational>> =
        xi_matrix(a).kernel_basis().into_iter().map(|v| STensor::from_vec(k, v)).collect();
    (basis.len(), basis)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSummary {
    pub trials: usize,
    pub hits: usize,
    pub verdict: DimensionVerdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub k: usize,
    pub backend: Backend,
    pub tangent_i_dim: usize,
    pub moduli_tangent_dim: i64,
    pub xi_corank: usize,
    pub smooth: bool,
    pub rank_dgamma: usize,
    pub rank_xi: usize,
    /// `3k^2 + 13k`.
    pub smooth_threshold: usize,
    /// `3k^2 + 18k`, carried for comparison only.
    pub misprinted_threshold: usize,
    /// `(e1, e2, e3)` pass pattern of the certificate.
    pub certificate: (bool, bool, bool),
    pub w_probe: Option<ProbeSummary>,
}

impl AuditReport {
    /// `moduli_tangent_dim - xi_corank = 8k - 3`.
    pub fn riemann_roch_holds(&self) -> bool {
        self.moduli_tangent_dim - self.xi_corank as i64 == moduli_expected(self.k)
    }

    /// The three descriptions of smoothness agree.
    pub fn smoothness_consistent(&self) -> bool {
        let by_dim = self.moduli_tangent_dim == moduli_expected(self.k);
        let by_threshold = self.tangent_i_dim == self.smooth_threshold;
        self.smooth == (self.xi_corank == 0) && self.smooth == by_dim && self.smooth == by_threshold
    }

    /// Integer outputs only, for comparing backends.
    pub fn integers(&self) -> (usize, i64, usize, usize, usize) {
        (self.tangent_i_dim, self.moduli_tangent_dim, self.xi_corank, self.rank_dgamma, self.rank_xi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditOptions {
    pub e1_samples: usize,
    /// Line-probe trials for `W(E)`; zero skips the probe.
    pub probe_trials: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            e1_samples: crate::monad::DEFAULT_E1_SAMPLES,
            probe_trials: 0,
            seed: 0,
            tolerance: crate::linalg::DEFAULT_TOLERANCE,
        }
    }
}

fn report(
    k: usize,
    backend: Backend,
    rank_dgamma: usize,
    rank_xi: usize,
    cert: (bool, bool, bool),
    w_probe: Option<ProbeSummary>,
) -> AuditReport {
    let (tangent_i_dim, moduli_tangent_dim) = dims_from_rank(k, rank_dgamma);
    let xi_corank = s_dim(k) - rank_xi;
    AuditReport {
        k,
        backend,
        tangent_i_dim,
        moduli_tangent_dim,
        xi_corank,
        smooth: xi_corank == 0,
        rank_dgamma,
        rank_xi,
        smooth_threshold: smooth_tangent_dim(k),
        misprinted_threshold: misprinted_threshold(k),
        certificate: cert,
        w_probe,
    }
}

fn probe(a: &ATensor<C64>, opts: &AuditOptions) -> Result<Option<ProbeSummary>, Error> {
    if opts.probe_trials == 0 {
        return Ok(None);
    }
    let p = w_dimension_probe(a, opts.probe_trials, opts.seed, opts.tolerance)?;
    Ok(Some(ProbeSummary { trials: p.trials, hits: p.hits, verdict: p.verdict }))
}

/// Exact audit. Works on any tensor; the certificate pattern records
/// whether it is an instanton.
pub fn audit(a: &ATensor<Rational>, opts: &AuditOptions) -> Result<AuditReport, Error> {
    let k = a.k();
    let cert = certify(a, opts.e1_samples, opts.seed)?;
    let rank_dgamma = dgamma(a).rank();
    let rank_xi = if s_dim(k) == 0 { 0 } else { xi_matrix(a).rank() };
    let w = probe(&a.map(|x| C64::new(rational_to_f64(x), 0.0)), opts)?;
    Ok(report(k, Backend::Rational, rank_dgamma, rank_xi, cert.pattern(), w))
}

/// Ranks over the active prime field. A rank can only drop modulo `p`,
/// so a prime audit that reports `xi_corank = 0` certifies smoothness.
/// Fails when a denominator of `A` vanishes modulo `p`.
pub fn audit_prime(a: &ATensor<Rational>, opts: &AuditOptions) -> Result<AuditReport, Error> {
    let k = a.k();
    let cert = certify(a, opts.e1_samples, opts.seed)?;
    let entries: Option<Vec<Fp>> = a.as_slice().iter().map(Fp::from_rational).collect();
    let ap = ATensor::from_vec(
        k,
        entries.ok_or_else(|| Error::Precondition("a denominator vanishes modulo the prime".to_string()))?,
    );
    let rank_dgamma = dgamma(&ap).rank();
    let rank_xi = if s_dim(k) == 0 { 0 } else { xi_matrix(&ap).rank() };
    let w = probe(&a.map(|x| C64::new(rational_to_f64(x), 0.0)), opts)?;
    Ok(report(k, Backend::Prime(prime()), rank_dgamma, rank_xi, cert.pattern(), w))
}

/// Float audit with SVD ranks at `opts.tolerance`.
pub fn audit_float(a: &ATensor<f64>, opts: &AuditOptions) -> Result<AuditReport, Error> {
    let k = a.k();
    let cert = crate::monad::certify_float(a, opts.e1_samples, opts.seed, opts.tolerance)?;
    let ac = a.map(|x| C64::new(*x, 0.0));
    let rank_dgamma = float::rank(&dgamma(&ac), opts.tolerance);
    let rank_xi = if s_dim(k) == 0 { 0 } else { float::rank(&xi_matrix(&ac), opts.tolerance) };
    let w = probe(&ac, opts)?;
    Ok(report(k, Backend::float(opts.tolerance), rank_dgamma, rank_xi, cert.pattern(), w))
}

/// The three vanishing families that follow from `xi(A, S) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lemma31Report {
    /// `tau0(A, S, h_l) = 0` for every basis vector `h_l`.
    pub tau_vanishes: bool,
    /// `epsilon(A, rho(S, B*)) = 0` for every basis covector `B*`.
    pub epsilon_rho_vanishes: bool,
    /// `rho(S, .) o beta(A, .) = 0`.
    pub rho_beta_vanishes: bool,
}

impl Lemma31Report {
    pub fn all(&self) -> bool {
        self.tau_vanishes && self.epsilon_rho_vanishes && self.rho_beta_vanishes
    }
}

fn check_pair(a: &ATensor<Rational>, s: &STensor<Rational>) -> Result<(), Error> {
    if a.k() != s.k() {
        return Err(Error::ShapeMismatch("A and S have different charges".to_string()));
    }
    if !xi(a, s).is_zero() {
        return Err(Error::Precondition("xi(A, S) != 0".to_string()));
    }
    Ok(())
}

pub fn lemma31_check(a: &ATensor<Rational>, s: &STensor<Rational>) -> Result<Lemma31Report, Error> {
    check_pair(a, s)?;
    let n = a.n();
    let c = xi(a, s);
    let tau_vanishes = (0..n).all(|l| {
        let mut h = alloc::vec![Rational::zero(); n];
        h[l] = Rational::one();
        kappa(&c, &h).is_zero()
    });
    let rho = rho_matrix(s);
    Ok(Lemma31Report {
        tau_vanishes,
        epsilon_rho_vanishes: epsilon_matrix(a).mul(&rho).is_zero(),
        rho_beta_vanishes: rho.mul(&beta_matrix(a)).is_zero(),
    })
}

/// A pair `(A, S)` with `xi(A, S) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnsmoothPair {
    pub a: ATensor<Rational>,
    pub certificate: MonadCertificate<Rational>,
    pub rk_s: usize,
    /// `dim {A : xi(A, S) = 0} = (2k+2) dim ker rho(S, .)`.
    pub kernel_dim: usize,
}

/// Random `A` with `xi(A, S) = 0`: every column `A_l` of `flat(A)` is a
/// random combination of a basis of `ker rho(S, .)`.
pub fn synth_unsmooth_pair(s: &STensor<Rational>, seed: u64) -> Result<UnsmoothPair, Error> {
    if s.is_zero() {
        return Err(Error::Precondition("S = 0".to_string()));
    }
    let k = s.k();
    let n = 2 * k + 2;
    let kernel = rho_matrix(s).kernel_basis();
    if kernel.is_empty() {
        return Err(Error::NotFound("rho(S, .) is injective; no A exists".to_string()));
    }
    let mut rng = derived(seed, 0x5E);
    let mut flat = Matrix::<Rational>::zeros(4 * k, n);
    for l in 0..n {
        let coeffs: Vec<Rational> = kernel.iter().map(|_| Rational::from_i64(int_in(&mut rng, 5))).collect();
        for r in 0..4 * k {
            flat[(r, l)] = kernel.iter().zip(&coeffs).fold(Rational::zero(), |acc, (v, c)| acc + c.clone() * v[r].clone());
        }
    }
    let a = ATensor::from_flat(k, &flat);
    debug_assert!(xi(&a, s).is_zero());
    let certificate = certify(&a, 50, seed)?;
    Ok(UnsmoothPair { a, certificate, rk_s: rk_s(s), kernel_dim: n * kernel.len() })
}

/// Where the trace of the case analysis ends.
#[derive(Clone, Debug, PartialEq)]
pub enum TraceOutcome {
    /// `rank beta < 2k+2`: the tensor already fails nondegeneracy.
    E3Failure { beta_rank: usize },
    /// `rk(S) > 2k-2` although `Im beta` (dimension `2k+2`) sits in `ker rho`.
    RankBound { rk_s: usize, bound: usize },
    /// `epsilon(A, f0 (x) b0) = 0`: fiberwise surjectivity fails at `f0`.
    CaseI {
        f0: Vec<C64>,
        b0: Vec<C64>,
        /// `|epsilon(A, f0 (x) b0)|` relative to `|flat(A)| |f0| |b0|`.
        residual: f64,
    },
    /// `{f*} (x) M` lies in `Im beta` with `dim M >= 3`, so `dim X_A >= 2`.
    CaseII { fstar: Vec<Rational>, m_dim: usize },
    /// `Im beta = ker rho`, so `X_A = Z_S` and `dim X_A >= 2`.
    CaseIII { ker_rho_dim: usize, beta_rank: usize, family: ZsFamily },
    /// `xi(A, .)` is injective: no obstruction direction to trace.
    SmoothNoS,
}

impl TraceOutcome {
    /// Whether the outcome rules out a certified instanton with `dim X_A <= 2`.
    pub fn contradicts_instanton(&self) -> bool {
        !matches!(self, TraceOutcome::SmoothNoS)
    }

    pub fn label(&self) -> &'static str {
        match self {
            TraceOutcome::E3Failure { .. } => "E3-failure",
            TraceOutcome::RankBound { .. } => "rank-bound",
            TraceOutcome::CaseI { .. } => "I",
            TraceOutcome::CaseII { .. } => "II",
            TraceOutcome::CaseIII { .. } => "III",
            TraceOutcome::SmoothNoS => "smooth-no-S",
        }
    }
}

/// The dimension step: `Im beta` of dimension `beta_rank` inside `ker rho`
/// of dimension `4k - rk_s`.
pub fn rank_bound_step(k: usize, beta_rank: usize, rk_s: usize) -> Option<TraceOutcome> {
    let bound = 2 * k - 2;
    (beta_rank == 2 * k + 2 && rk_s > bound).then_some(TraceOutcome::RankBound { rk_s, bound })
}

const E1_WITNESS_TOL: f64 = 1e-8;

/// Runs the case analysis on a pair with `xi(A, S) = 0`, `S != 0`.
pub fn theorem_tracer(a: &ATensor<Rational>, s: &STensor<Rational>, seed: u64) -> Result<TraceOutcome, Error> {
    check_pair(a, s)?;
    if s.is_zero() {
        return Err(Error::Precondition("S = 0".to_string()));
    }
    let k = a.k();
    let beta = beta_matrix(a);
    let rho = rho_matrix(s);
    if !rho.mul(&beta).is_zero() {
        return Err(Error::VerificationFailed("Im beta is not inside ker rho".to_string()));
    }
    let beta_rank = beta.rank();
    if beta_rank < a.n() {
        return Ok(TraceOutcome::E3Failure { beta_rank });
    }
    let rk = rho.rank();
    if let Some(out) = rank_bound_step(k, beta_rank, rk) {
        return Ok(out);
    }
    let cls = classify_s(s, seed)?;
    match cls.condition {
        Condition::Cond1(w) => {
            if !epsilon_matrix(a).mul(&rho).is_zero() {
                return Err(Error::VerificationFailed("epsilon o rho does not vanish".to_string()));
            }
            let ac = a.map(|x| C64::new(rational_to_f64(x), 0.0));
            let img = epsilon_at(&ac, &w.f0).mul_vec(&w.b0);
            let scale = ac.flat().frobenius() * float::norm(&w.f0) * float::norm(&w.b0);
            let residual = float::norm(&img) / scale.max(f64::MIN_POSITIVE);
            if residual > E1_WITNESS_TOL {
                return Err(Error::VerificationFailed(alloc::format!("E1 witness residual {residual:e}")));
            }
            Ok(TraceOutcome::CaseI { f0: w.f0, b0: w.b0, residual })
        }
        Condition::Cond2(w) => {
            let m_dim = unstable_plane_test(a, &w.fstar)?.intersection_dim;
            if m_dim < 3 {
                return Err(Error::VerificationFailed(alloc::format!("dim M = {m_dim} < 3")));
            }
            Ok(TraceOutcome::CaseII { fstar: w.fstar, m_dim })
        }
        Condition::Cond3(family) => {
            let ker_rho_dim = 4 * k - rk;
            if ker_rho_dim != beta_rank {
                return Err(Error::VerificationFailed(alloc::format!(
                    "dim ker rho = {ker_rho_dim} but rank beta = {beta_rank}"
                )));
            }
            Ok(TraceOutcome::CaseIII { ker_rho_dim, beta_rank, family })
        }
    }
}

/// Traces the first obstruction direction of `A`, if any.
pub fn trace_sample(a: &ATensor<Rational>, seed: u64) -> Result<TraceOutcome, Error> {
    match xi_corank(a).1.into_iter().next() {
        None => Ok(TraceOutcome::SmoothNoS),
        Some(s) => theorem_tracer(a, &s, seed),
    }
}
