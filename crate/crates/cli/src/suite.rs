//! The ten acceptance criteria, each a function returning a
//! [`CriterionResult`]. Every randomized choice is derived from
//! [`SuiteConfig::seed`], so a report can be re-run from its seeds.

use std::collections::BTreeMap;
use std::time::Instant;

use instanton_core::audit::{
    audit, audit_float, synth_unsmooth_pair, theorem_tracer, AuditOptions, AuditReport,
};
use instanton_core::linalg::{float, Matrix};
use instanton_core::monad::{
    certify, degenerate_slice_draw, generate_newton, generate_slice, h0_plane, to_f64, NewtonStart,
};
use instanton_core::pencil::{
    classify_s, lemma21_solve, random_s_biased, Condition, LemmaCase, SCaseBias, ZsSource, PENCIL_IMAGE_MIN,
    PENCIL_RESIDUAL_TOL, ZS_MIN_POINTS, ZS_TOL,
};
use instanton_core::planes::{
    quadric_fit, to_complex, unstable_plane_test, unstable_plane_test_float, w_dimension_probe, DimensionVerdict,
};
use instanton_core::rng::{derived, int_in, SeededRng};
use instanton_core::scalar::rational_to_f64;
use instanton_core::tensors::{
    dgamma, dot, flattenings, gamma, moduli_expected, omega_pairing, random_a, random_s, rho_apply, rho_matrix,
    rk_s, s_dim, xi, ATensor, GammaMode, STensor,
};
use instanton_core::{Error, Rational, Scalar};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Samples per charge in criterion 1.
pub const SAMPLES_PER_K: usize = 5;
pub const AUDIT_TIME_LIMIT_S: f64 = 10.0;
pub const ADJOINT_TRIALS: usize = 100;
pub const EVEN_RANK_TRIALS: usize = 500;
pub const PENCIL_TRIALS: usize = 500;
pub const PENCIL_TIME_LIMIT_S: f64 = 1.0;
pub const CLASSIFIER_INSTANCES: usize = 100;
pub const TRACER_PAIRS: usize = 50;
pub const H0_PLANES: usize = 1000;
pub const UNSTABLE_PLANES: usize = 500;
pub const LINE_PROBE_TRIALS: usize = 20;
pub const QUADRIC_TOL: f64 = 1e-8;
pub const NEWTON_RESIDUAL_BOUND: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Charges for the per-`k` criteria (within `2..=5`).
    pub ks: Vec<usize>,
    pub seed: u64,
    pub tolerance: f64,
    /// Criteria to run; empty means all.
    pub only: Vec<u8>,
}

impl SuiteConfig {
    pub fn new(ks: Vec<usize>, seed: u64) -> Self {
        SuiteConfig { ks, seed, tolerance: instanton_core::linalg::DEFAULT_TOLERANCE, only: Vec::new() }
    }

    fn wants(&self, id: u8) -> bool {
        self.only.is_empty() || self.only.contains(&id)
    }

    fn sub_seed(&self, criterion: u64, k: usize, index: usize) -> u64 {
        self.seed.wrapping_mul(1_000_003).wrapping_add(criterion * 100_000 + k as u64 * 10_000 + index as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    #[serde(default)]
    pub counts: BTreeMap<String, u64>,
    /// Failures, capped at a handful.
    #[serde(default)]
    pub failures: Vec<String>,
    #[serde(skip)]
    pub elapsed_s: f64,
    /// Wall-clock remarks, kept out of the serialized result.
    #[serde(skip)]
    pub timing: String,
}

impl CriterionResult {
    fn new(id: u8, name: &str) -> Self {
        CriterionResult {
            id,
            name: name.to_string(),
            passed: true,
            detail: String::new(),
            counts: BTreeMap::new(),
            failures: Vec::new(),
            elapsed_s: 0.0,
            timing: String::new(),
        }
    }

    fn count(&mut self, key: &str, by: u64) {
        *self.counts.entry(key.to_string()).or_insert(0) += by;
    }

    fn fail(&mut self, msg: String) {
        self.passed = false;
        if self.failures.len() < 8 {
            self.failures.push(msg);
        }
    }

    fn absorb(&mut self, errors: Vec<String>) {
        for e in errors {
            self.fail(e);
        }
    }

    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!("criterion {:>2} [{status}] {}: {}", self.id, self.name, self.detail);
        if !self.timing.is_empty() {
            s.push_str(&format!(", {}", self.timing));
        }
        if let Some(first) = self.failures.first() {
            s.push_str(&format!(" (first failure: {first})"));
        }
        s
    }
}

/// One audited certified sample.
#[derive(Clone, Debug)]
pub struct BankEntry {
    pub k: usize,
    pub seed: u64,
    pub a: ATensor<Rational>,
    pub exact: AuditReport,
    pub float: AuditReport,
    pub audit_s: f64,
}

/// Certified samples shared by criteria 1, 3, 4, 9 and 10.
#[derive(Clone, Debug, Default)]
pub struct SampleBank {
    pub entries: Vec<BankEntry>,
    pub errors: Vec<String>,
}

fn audit_options(cfg: &SuiteConfig, seed: u64) -> AuditOptions {
    AuditOptions { seed, tolerance: cfg.tolerance, ..AuditOptions::default() }
}

impl SampleBank {
    pub fn build(cfg: &SuiteConfig) -> Self {
        let tasks: Vec<(usize, usize)> =
            cfg.ks.iter().flat_map(|&k| (0..SAMPLES_PER_K).map(move |i| (k, i))).collect();
        let results: Vec<Result<BankEntry, String>> = tasks
            .par_iter()
            .map(|&(k, i)| {
                let seed = cfg.sub_seed(1, k, i);
                let sample = generate_slice(k, seed).map_err(|e| format!("k={k} seed={seed}: {e}"))?;
                let opts = audit_options(cfg, seed);
                let t = Instant::now();
                let exact = audit(&sample.a, &opts).map_err(|e| format!("k={k} seed={seed}: {e}"))?;
                let audit_s = t.elapsed().as_secs_f64();
                let float = audit_float(&to_f64(&sample.a), &opts).map_err(|e| format!("k={k} seed={seed}: {e}"))?;
                Ok(BankEntry { k, seed, a: sample.a, exact, float, audit_s })
            })
            .collect();
        let mut bank = SampleBank::default();
        for r in results {
            match r {
                Ok(e) => bank.entries.push(e),
                Err(e) => bank.errors.push(e),
            }
        }
        bank
    }

    fn meets_criterion_one(e: &BankEntry) -> bool {
        e.exact.certificate == (true, true, true)
            && e.exact.moduli_tangent_dim == moduli_expected(e.k)
            && e.exact.xi_corank == 0
            && e.exact.integers() == e.float.integers()
            && e.audit_s <= AUDIT_TIME_LIMIT_S
    }
}

/// Criterion 1: certified samples have the expected moduli tangent
/// dimension and no obstruction directions.
pub fn criterion1(cfg: &SuiteConfig, bank: &SampleBank) -> CriterionResult {
    let mut res = CriterionResult::new(1, "smoothness of certified samples");
    res.absorb(bank.errors.clone());
    let mut max_time: f64 = 0.0;
    for &k in &cfg.ks {
        let mine: Vec<&BankEntry> = bank.entries.iter().filter(|e| e.k == k).collect();
        let good = mine.iter().filter(|e| SampleBank::meets_criterion_one(e)).count();
        res.count(&format!("k{k}_samples"), good as u64);
        if good < SAMPLES_PER_K {
            res.fail(format!("k={k}: only {good} of {} samples meet the criterion", SAMPLES_PER_K));
        }
        for e in &mine {
            max_time = max_time.max(e.audit_s);
            if !SampleBank::meets_criterion_one(e) {
                res.fail(format!(
                    "k={k} seed={}: moduli {} corank {} float {:?} in {:.2}s",
                    e.seed,
                    e.exact.moduli_tangent_dim,
                    e.exact.xi_corank,
                    e.float.integers(),
                    e.audit_s
                ));
            }
        }
    }
    let dims: Vec<String> = cfg.ks.iter().map(|&k| format!("k={k}: {}", moduli_expected(k))).collect();
    res.detail = format!(
        "{} samples, moduli tangent dims [{}], xi corank 0, float ranks agree",
        bank.entries.len(),
        dims.join(", ")
    );
    res.timing = format!("slowest audit {max_time:.2}s (limit {AUDIT_TIME_LIMIT_S}s)");
    res
}

/// Criterion 2: charge one.
pub fn criterion2(cfg: &SuiteConfig) -> CriterionResult {
    let mut res = CriterionResult::new(2, "charge one sanity");
    let mut rng = derived(cfg.sub_seed(2, 1, 0), 2);
    let mut audited = 0;
    let mut draws = 0;
    while audited < SAMPLES_PER_K && draws < 200 {
        draws += 1;
        let a = random_a(&mut rng, 1, 5);
        if a.flat().rank() < 4 {
            continue;
        }
        match audit(&a, &audit_options(cfg, draws as u64)) {
            Ok(r) => {
                audited += 1;
                if r.certificate != (true, true, true) || r.moduli_tangent_dim != 5 || r.xi_corank != 0 || s_dim(1) != 0 {
                    res.fail(format!("draw {draws}: {:?}", r.integers()));
                }
            }
            Err(e) => res.fail(format!("draw {draws}: {e}")),
        }
    }
    if audited < SAMPLES_PER_K {
        res.fail(format!("only {audited} full-rank draws"));
    }
    res.count("samples", audited as u64);
    res.detail = format!("{audited} random full-rank samples audit to moduli tangent dim 5 with S-space of dim 0");
    res
}

/// Criterion 3: adjointness of `dgamma` and `xi`, with a constant
/// calibrated from the first nondegenerate trial.
pub fn criterion3(cfg: &SuiteConfig, bank: &SampleBank, synthetic: &[AuditReport]) -> CriterionResult {
    let mut res = CriterionResult::new(3, "adjointness of dgamma and xi");
    let per_k: Vec<(usize, Result<Rational, String>)> = cfg
        .ks
        .par_iter()
        .map(|&k| {
            let mut rng = derived(cfg.sub_seed(3, k, 0), 3);
            let mut c: Option<Rational> = None;
            for trial in 0..ADJOINT_TRIALS {
                let a = random_a(&mut rng, k, 3);
                let b = random_a(&mut rng, k, 3);
                let s = random_s(&mut rng, k, 3);
                let lhs = dot(&dgamma(&a).mul_vec(b.as_slice()), s.as_slice());
                let rhs = omega_pairing(&xi(&a, &s), &b);
                match &c {
                    None if !rhs.is_zero() => c = Some(lhs / rhs),
                    None => {
                        if !lhs.is_zero() {
                            return (k, Err(format!("k={k} trial {trial}: pairing vanishes on one side only")));
                        }
                    }
                    Some(c) => {
                        if lhs != c.clone() * rhs {
                            return (k, Err(format!("k={k} trial {trial}: ratio differs from {c}")));
                        }
                    }
                }
            }
            (k, c.ok_or_else(|| format!("k={k}: no nondegenerate trial")))
        })
        .collect();
    let mut constants = Vec::new();
    for (k, r) in per_k {
        match r {
            Ok(c) => constants.push(format!("k={k}: {c}")),
            Err(e) => res.fail(e),
        }
    }
    let mut rank_checks = 0;
    for r in bank.entries.iter().map(|e| &e.exact).chain(synthetic) {
        rank_checks += 1;
        if r.rank_dgamma != r.rank_xi {
            res.fail(format!("k={}: rank dgamma {} != rank xi {}", r.k, r.rank_dgamma, r.rank_xi));
        }
    }
    res.count("rank_checks", rank_checks);
    res.detail = format!(
        "{ADJOINT_TRIALS} exact trials per k, constants [{}]; rank dgamma = rank xi on {rank_checks} audits",
        constants.join(", ")
    );
    res
}

/// Synthetic non-smooth audits shared by criteria 3 and 4.
pub fn synthetic_audits(cfg: &SuiteConfig) -> (Vec<AuditReport>, Vec<String>) {
    let tasks: Vec<(usize, usize)> = cfg.ks.iter().flat_map(|&k| (0..4).map(move |i| (k, i))).collect();
    let out: Vec<Result<AuditReport, String>> = tasks
        .par_iter()
        .map(|&(k, i)| {
            let seed = cfg.sub_seed(4, k, i);
            let target = 2 + 2 * (i % (k - 1));
            let s = random_s_biased(k, target, SCaseBias::Any, seed).map_err(|e| format!("k={k}: {e}"))?;
            let pair = synth_unsmooth_pair(&s, seed).map_err(|e| format!("k={k}: {e}"))?;
            audit(&pair.a, &audit_options(cfg, seed)).map_err(|e| format!("k={k}: {e}"))
        })
        .collect();
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for r in out {
        match r {
            Ok(r) => reports.push(r),
            Err(e) => errors.push(e),
        }
    }
    (reports, errors)
}

/// Criterion 4: `moduli_tangent_dim - xi_corank = 8k - 3` on every audit.
pub fn criterion4(bank: &SampleBank, synthetic: &[AuditReport], synth_errors: &[String]) -> CriterionResult {
    let mut res = CriterionResult::new(4, "tangent dimension identity");
    res.absorb(synth_errors.to_vec());
    let mut unsmooth = 0;
    let all: Vec<&AuditReport> = bank.entries.iter().map(|e| &e.exact).chain(synthetic).collect();
    for r in &all {
        if !r.riemann_roch_holds() {
            res.fail(format!("k={}: {} - {} != {}", r.k, r.moduli_tangent_dim, r.xi_corank, moduli_expected(r.k)));
        }
        if r.xi_corank > 0 {
            unsmooth += 1;
        }
    }
    if unsmooth == 0 && !synthetic.is_empty() {
        res.fail("no synthetic audit had positive corank".to_string());
    }
    res.count("audits", all.len() as u64);
    res.count("unsmooth", unsmooth);
    res.detail = format!("identity holds on {} audits ({unsmooth} with positive xi corank)", all.len());
    res
}

/// Criterion 5: ranks of `rho`, `sigma` and `sigma_hat` agree and are even.
pub fn criterion5(cfg: &SuiteConfig) -> CriterionResult {
    let mut res = CriterionResult::new(5, "even rank of obstruction tensors");
    let out: Vec<(usize, Vec<usize>, Vec<String>)> = cfg
        .ks
        .par_iter()
        .map(|&k| {
            let mut rng = derived(cfg.sub_seed(5, k, 0), 5);
            let mut hist = vec![0usize; 4 * k + 1];
            let mut errors = Vec::new();
            for trial in 0..EVEN_RANK_TRIALS {
                let s = match trial % 3 {
                    0 => random_s(&mut rng, k, 3),
                    // sparse draws reach the low ranks
                    1 => sparse_s(&mut rng, k),
                    _ => {
                        let target = 2 * (1 + trial % (2 * k));
                        match random_s_biased(k, target, SCaseBias::Any, cfg.sub_seed(5, k, trial)) {
                            Ok(s) => s,
                            Err(e) => {
                                errors.push(format!("k={k} target {target}: {e}"));
                                continue;
                            }
                        }
                    }
                };
                let rho = rho_matrix(&s).rank();
                let (sigma, sigma_hat) = flattenings(&s);
                let (r1, r2) = (sigma.rank(), sigma_hat.rank());
                hist[rho] += 1;
                if rho % 2 == 1 || rho != r1 || rho != r2 || rk_s(&s) != rho {
                    errors.push(format!("k={k} trial {trial}: ranks {rho}, {r1}, {r2}"));
                }
            }
            (k, hist, errors)
        })
        .collect();
    let mut seen = Vec::new();
    for (k, hist, errors) in out {
        res.absorb(errors);
        let ranks: Vec<String> = hist.iter().enumerate().filter(|(_, &c)| c > 0).map(|(r, _)| r.to_string()).collect();
        seen.push(format!("k={k}: {{{}}}", ranks.join(",")));
        res.count(&format!("k{k}_trials"), hist.iter().sum::<usize>() as u64);
    }
    res.detail = format!("{EVEN_RANK_TRIALS} tensors per k, ranks seen {}", seen.join(" "));
    res
}

fn index(rng: &mut SeededRng, n: usize) -> usize {
    (int_in(rng, n as i64) + n as i64) as usize % n
}

fn sparse_s(rng: &mut SeededRng, k: usize) -> STensor<Rational> {
    let mut s = STensor::zeros(k);
    for _ in 0..2 + index(rng, 3) {
        let (i, j) = (index(rng, k), index(rng, k));
        let (l, p) = (index(rng, 4), index(rng, 4));
        if i != j {
            s.add_monomial(l, p, i, j, Rational::from_i64(1 + index(rng, 3) as i64));
        }
    }
    s
}

fn cz(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn random_skew(rng: &mut SeededRng, k: usize) -> Matrix<C64> {
    let mut m = Matrix::zeros(k, k);
    for i in 0..k {
        for j in i + 1..k {
            let v = cz(int_in(rng, 9) as f64 + 0.25 * int_in(rng, 3) as f64);
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

fn compress(rng: &mut SeededRng, rows: usize, k: usize) -> Matrix<C64> {
    Matrix::from_fn(rows, k, |_, _| cz(int_in(rng, 4) as f64))
}

/// Skew pairs: generic, singular first block, identically singular, and
/// one vanishing block.
pub fn pencil_instance(rng: &mut SeededRng, k: usize, family: usize) -> (Matrix<C64>, Matrix<C64>) {
    match family {
        0 | 1 => (random_skew(rng, k), random_skew(rng, k)),
        2 => {
            let rank = if k.is_multiple_of(2) { k - 2 } else { k - 1 }.max(2).min(k);
            let p = compress(rng, rank, k);
            (p.transpose().mul(&random_skew(rng, rank)).mul(&p), random_skew(rng, k))
        }
        // a 2 x 2 pencil is never identically singular; use a proportional pair
        3 if k == 2 => {
            let r = random_skew(rng, k);
            (r.clone(), r.scale(&cz(int_in(rng, 5) as f64)))
        }
        3 => {
            let p = compress(rng, k - 1, k);
            let a = random_skew(rng, k - 1);
            let b = random_skew(rng, k - 1);
            (p.transpose().mul(&a).mul(&p), p.transpose().mul(&b).mul(&p))
        }
        _ => (Matrix::zeros(k, k), random_skew(rng, k)),
    }
}

/// Independent check of a pencil witness: `R1 v0` and `R2 v0` span a
/// line and are not both zero.
pub fn pencil_witness_ok(r1: &Matrix<C64>, r2: &Matrix<C64>, v0: &[C64]) -> Result<(), String> {
    let a = r1.mul_vec(v0);
    let b = r2.mul_vec(v0);
    let scale = r1.frobenius().max(r2.frobenius()) * float::norm(v0);
    let stacked = Matrix::from_fn(2, a.len(), |r, c| if r == 0 { a[c] } else { b[c] });
    let sv = float::singular_values(&stacked);
    let s2 = sv.get(1).copied().unwrap_or(0.0);
    if sv[0] <= PENCIL_IMAGE_MIN * scale {
        return Err(format!("image {:.3e}", sv[0] / scale));
    }
    if s2 > PENCIL_RESIDUAL_TOL * scale {
        return Err(format!("proportionality {:.3e}", s2 / scale));
    }
    Ok(())
}

/// Criterion 6: the skew pencil solver on random pairs.
pub fn criterion6(cfg: &SuiteConfig) -> CriterionResult {
    let mut res = CriterionResult::new(6, "skew pencil solver");
    let out: Vec<(Vec<String>, f64, usize)> = cfg
        .ks
        .par_iter()
        .map(|&k| {
            let mut rng = derived(cfg.sub_seed(6, k, 0), 6);
            let mut errors = Vec::new();
            let mut slowest: f64 = 0.0;
            let mut solved = 0;
            for trial in 0..PENCIL_TRIALS {
                let (r1, r2) = loop {
                    let (r1, r2) = pencil_instance(&mut rng, k, trial % 5);
                    if r1.frobenius() > 0.0 || r2.frobenius() > 0.0 {
                        break (r1, r2);
                    }
                };
                let t = Instant::now();
                let w = lemma21_solve(&r1, &r2);
                let dt = t.elapsed().as_secs_f64();
                slowest = slowest.max(dt);
                match w {
                    Ok(w) => match pencil_witness_ok(&r1, &r2, &w.v0) {
                        Ok(()) => solved += 1,
                        Err(e) => errors.push(format!("k={k} trial {trial}: {e}")),
                    },
                    Err(e) => errors.push(format!("k={k} trial {trial}: {e}")),
                }
                if dt > PENCIL_TIME_LIMIT_S {
                    errors.push(format!("k={k} trial {trial}: {dt:.2}s"));
                }
            }
            (errors, slowest, solved)
        })
        .collect();
    let mut slowest: f64 = 0.0;
    let mut solved = 0;
    for (errors, s, n) in out {
        res.absorb(errors);
        slowest = slowest.max(s);
        solved += n;
    }
    res.count("solved", solved as u64);
    if solved < PENCIL_TRIALS * cfg.ks.len() {
        res.passed = false;
    }
    res.detail = format!(
        "{solved} pairs across 5 families verified (residual <= {PENCIL_RESIDUAL_TOL:e}, image > {PENCIL_IMAGE_MIN:e})"
    );
    res.timing = format!("slowest {:.1}ms (limit {PENCIL_TIME_LIMIT_S}s)", slowest * 1e3);
    res
}

fn complex_s(s: &STensor<Rational>) -> STensor<C64> {
    s.map(|x| cz(rational_to_f64(x)))
}

/// Independent verification of a classification against its case.
pub fn verify_classification(s: &STensor<Rational>, expected: LemmaCase, seed: u64) -> Result<(), String> {
    let cls = classify_s(s, seed).map_err(|e| e.to_string())?;
    if cls.case != expected {
        return Err(format!("case {:?}, expected {expected:?}", cls.case));
    }
    let k = s.k();
    let sc = complex_s(s);
    let rho_norm = rho_matrix(&sc).frobenius();
    match (&cls.condition, expected) {
        (Condition::Cond1(w), LemmaCase::A) => {
            let v = rho_matrix(&sc).mul_vec(&w.bstar);
            let m = Matrix::from_fn(4, k, |p, b| v[p * k + b]);
            let sv = float::singular_values(&m);
            let scale = rho_norm * float::norm(&w.bstar);
            if sv[0] <= PENCIL_IMAGE_MIN * scale || sv[1] > PENCIL_RESIDUAL_TOL * sv[0] {
                return Err(format!("rho(S, B*) is not rank one: {:.3e} {:.3e}", sv[0], sv[1]));
            }
        }
        (Condition::Cond2(w), LemmaCase::B) => {
            if w.fstar.iter().all(|x| x.is_zero()) {
                return Err("zero covector".to_string());
            }
            for j in 0..k {
                let mut b = vec![Rational::zero(); k];
                b[j] = Rational::one();
                if !rho_apply(s, &w.fstar, &b).iter().all(|x| x.is_zero()) {
                    return Err(format!("rho(S, f* (x) e_{j}) != 0"));
                }
            }
        }
        (Condition::Cond3(f), LemmaCase::C | LemmaCase::D) => {
            if f.points.len() < ZS_MIN_POINTS || f.jacobian_rank != 2 {
                return Err(format!("{} points, jacobian rank {}", f.points.len(), f.jacobian_rank));
            }
            let want = if expected == LemmaCase::C { ZsSource::Claim1 } else { ZsSource::Claim2 };
            if f.source != want {
                return Err(format!("source {:?}", f.source));
            }
            for p in &f.points {
                let r = float::norm(&rho_apply(&sc, &p.fstar, &p.bstar))
                    / (rho_norm * float::norm(&p.fstar) * float::norm(&p.bstar));
                if r.is_nan() || r > ZS_TOL {
                    return Err(format!("point residual {r:.3e}"));
                }
                if let Some(e) = &p.exact {
                    if !rho_apply(s, &e.fstar, &e.bstar).iter().all(|x| x.is_zero()) {
                        return Err("exact point is not on Z_S".to_string());
                    }
                }
            }
        }
        (c, _) => return Err(format!("condition {} for case {expected:?}", c.index())),
    }
    Ok(())
}

/// Criterion 7: the classifier on constructed instances of every
/// reachable case.
pub fn criterion7(cfg: &SuiteConfig) -> CriterionResult {
    let mut res = CriterionResult::new(7, "obstruction tensor classifier");
    let mut groups: Vec<(usize, LemmaCase, SCaseBias)> = Vec::new();
    for &k in &cfg.ks {
        groups.push((k, LemmaCase::A, SCaseBias::A));
        if k >= 4 {
            groups.push((k, LemmaCase::B, SCaseBias::B));
        }
        if k == 5 {
            groups.push((k, LemmaCase::C, SCaseBias::C));
            groups.push((k, LemmaCase::D, SCaseBias::D));
        }
    }
    let tasks: Vec<(usize, usize)> =
        (0..groups.len()).flat_map(|g| (0..CLASSIFIER_INSTANCES).map(move |i| (g, i))).collect();
    let out: Vec<(usize, Result<(), String>)> = tasks
        .par_iter()
        .map(|&(g, i)| {
            let (k, case, bias) = groups[g];
            let seed = cfg.sub_seed(7, k, g * 1000 + i);
            let target = match case {
                LemmaCase::A => 2 + 2 * (i % (k - 1)),
                LemmaCase::B => 6,
                _ => 8,
            };
            let r = random_s_biased(k, target, bias, seed)
                .map_err(|e| e.to_string())
                .and_then(|s| verify_classification(&s, case, seed));
            (g, r.map_err(|e| format!("k={k} case {case:?} seed {seed}: {e}")))
        })
        .collect();
    let mut ok = vec![0usize; groups.len()];
    for (g, r) in out {
        match r {
            Ok(()) => ok[g] += 1,
            Err(e) => res.fail(e),
        }
    }
    let mut parts = Vec::new();
    for (g, (k, case, _)) in groups.iter().enumerate() {
        res.count(&format!("k{k}_{case:?}"), ok[g] as u64);
        if ok[g] < CLASSIFIER_INSTANCES {
            res.passed = false;
        }
        parts.push(format!("k={k}/{case:?}: {}", ok[g]));
    }
    res.detail = format!("verified witnesses [{}]", parts.join(", "));
    res
}

/// Criterion 8: the tracer on synthetic pairs. Returns the result and
/// whether a synthetic tensor passed certification, which aborts the suite.
pub fn criterion8(cfg: &SuiteConfig) -> (CriterionResult, bool) {
    let mut res = CriterionResult::new(8, "tracer totality");
    let tasks: Vec<(usize, usize)> = cfg.ks.iter().flat_map(|&k| (0..TRACER_PAIRS).map(move |i| (k, i))).collect();
    let out: Vec<Result<(&'static str, bool), String>> = tasks
        .par_iter()
        .map(|&(k, i)| {
            let seed = cfg.sub_seed(8, k, i);
            let target = 2 + 2 * (i % (k - 1));
            let bias = match (k, target, i % 3) {
                (5, 8, 0) => SCaseBias::C,
                (5, 8, 1) => SCaseBias::D,
                (_, 6, 0) if k >= 3 => SCaseBias::B,
                (_, _, 1) => SCaseBias::A,
                _ => SCaseBias::Any,
            };
            let s = random_s_biased(k, target, bias, seed).map_err(|e| format!("k={k} seed {seed}: {e}"))?;
            let pair = synth_unsmooth_pair(&s, seed).map_err(|e| format!("k={k} seed {seed}: {e}"))?;
            let outcome = theorem_tracer(&pair.a, &s, seed).map_err(|e| format!("k={k} seed {seed}: {e}"))?;
            if !outcome.contradicts_instanton() {
                return Err(format!("k={k} seed {seed}: trace ended in {}", outcome.label()));
            }
            Ok((outcome.label(), pair.certificate.is_instanton()))
        })
        .collect();
    let mut falsified = false;
    for r in out {
        match r {
            Ok((label, certified)) => {
                res.count(label, 1);
                if certified {
                    falsified = true;
                    res.fail("a synthetic tensor passed full instanton certification".to_string());
                }
            }
            Err(e) => res.fail(e),
        }
    }
    let hist: Vec<String> = res.counts.iter().map(|(k, v)| format!("{k}: {v}")).collect();
    res.detail = format!("{TRACER_PAIRS} pairs per k, outcomes [{}], no synthetic tensor certified", hist.join(", "));
    (res, falsified)
}

fn random_plane(rng: &mut SeededRng) -> Vec<Rational> {
    loop {
        let f: Vec<i64> = (0..4).map(|_| int_in(rng, 9)).collect();
        if f.iter().any(|&x| x != 0) {
            return f.into_iter().map(Rational::from_i64).collect();
        }
    }
}

fn check_planes(cfg: &SuiteConfig, e: &BankEntry) -> (Vec<String>, usize, usize, bool) {
    let mut errors = Vec::new();
    let mut rng = derived(cfg.sub_seed(9, e.k, e.seed as usize % 10_000), 9);
    let mut unstable = 0;
    for i in 0..H0_PLANES {
        let f = random_plane(&mut rng);
        let h0 = match h0_plane(&e.a, &f) {
            Ok(h) => h,
            Err(err) => {
                errors.push(format!("k={} seed {}: {err}", e.k, e.seed));
                continue;
            }
        };
        if h0 > 1 {
            errors.push(format!("k={} seed {}: h0 = {h0} on a plane", e.k, e.seed));
        }
        if i < UNSTABLE_PLANES {
            match unstable_plane_test(&e.a, &f) {
                Ok(t) if t.unstable == (h0 >= 1) => unstable += usize::from(t.unstable),
                Ok(_) => errors.push(format!("k={} seed {}: unstable test disagrees with h0 = {h0}", e.k, e.seed)),
                Err(err) => errors.push(format!("k={} seed {}: {err}", e.k, e.seed)),
            }
        }
    }
    let ac = to_complex(&e.a);
    let probe = match w_dimension_probe(&ac, LINE_PROBE_TRIALS, e.seed, cfg.tolerance) {
        Ok(p) => p,
        Err(err) => {
            errors.push(format!("k={} seed {}: {err}", e.k, e.seed));
            return (errors, unstable, 0, false);
        }
    };
    for p in &probe.hit_points {
        let reverified = unstable_plane_test_float(&ac, &p.fstar, cfg.tolerance)
            .map(|t| t.unstable && t.intersection_dim == 1 && t.bstar.is_some())
            .unwrap_or(false);
        if p.h0 != 1 || p.bstar.is_none() || !reverified {
            errors.push(format!("k={} seed {}: line probe hit fails re-verification", e.k, e.seed));
        }
    }
    let surface = probe.verdict == DimensionVerdict::AtLeastTwo;
    if surface {
        let pts: Vec<Vec<C64>> = probe.hit_points.iter().map(|p| p.fstar.clone()).collect();
        match quadric_fit(&pts) {
            Ok(q) if q.residual <= QUADRIC_TOL => {}
            Ok(q) => errors.push(format!("k={} seed {}: quadric residual {:.3e}", e.k, e.seed, q.residual)),
            Err(err) => errors.push(format!("k={} seed {}: {err}", e.k, e.seed)),
        }
        if !SampleBank::meets_criterion_one(e) {
            errors.push(format!("k={} seed {}: surface case without smoothness", e.k, e.seed));
        }
    }
    (errors, unstable, probe.hit_points.len(), surface)
}

/// Criterion 9: unstable planes of the certified samples.
pub fn criterion9(cfg: &SuiteConfig, bank: &SampleBank) -> CriterionResult {
    let mut res = CriterionResult::new(9, "unstable planes");
    if bank.entries.is_empty() {
        res.fail("no certified samples".to_string());
    }
    let out: Vec<(Vec<String>, usize, usize, bool)> = bank.entries.par_iter().map(|e| check_planes(cfg, e)).collect();
    let (mut unstable, mut hits, mut surfaces) = (0, 0, 0);
    for (errors, u, h, s) in out {
        res.absorb(errors);
        unstable += u;
        hits += h;
        surfaces += usize::from(s);
    }
    res.count("unstable_random_planes", unstable as u64);
    res.count("line_probe_hits", hits as u64);
    res.count("surface_samples", surfaces as u64);
    res.detail = format!(
        "{} samples x {H0_PLANES} planes with h0 <= 1, {UNSTABLE_PLANES} agreement checks each; {hits} line-probe hits re-verified; {surfaces} samples with a surface",
        bank.entries.len()
    );
    res
}

/// Criterion 10: generator outputs.
pub fn criterion10(cfg: &SuiteConfig, bank: &SampleBank) -> CriterionResult {
    let mut res = CriterionResult::new(10, "generator soundness");
    let mut slice = 0;
    for e in &bank.entries {
        slice += 1;
        if !gamma(&e.a, GammaMode::MatrixOfForms).iter().all(|x| x.is_zero()) {
            res.fail(format!("k={} seed {}: gamma(A) != 0", e.k, e.seed));
        }
    }
    let mut ks = vec![1];
    ks.extend(cfg.ks.iter().copied());
    let out: Vec<(Vec<String>, usize, usize)> = ks
        .par_iter()
        .map(|&k| {
            let mut errors = Vec::new();
            let mut newton = 0;
            for i in 0..2 {
                let seed = cfg.sub_seed(10, k, i);
                match generate_newton(k, seed, 50, &NewtonStart::Random) {
                    Ok(s) => {
                        newton += 1;
                        let g = gamma(&s.a, GammaMode::MatrixOfForms);
                        let res2 = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                        let a2: f64 = s.a.as_slice().iter().map(|x| x * x).sum();
                        if res2.is_nan() || res2 > NEWTON_RESIDUAL_BOUND * a2 {
                            errors.push(format!("k={k} seed {seed}: newton residual {res2:.3e}"));
                        }
                    }
                    Err(e) => errors.push(format!("k={k} seed {seed}: {e}")),
                }
            }
            let mut rejected = 0;
            for i in 0..10 {
                let seed = cfg.sub_seed(10, k, 100 + i);
                match certify(&degenerate_slice_draw(k, seed), 50, seed) {
                    Ok(c) if !c.is_instanton() => rejected += 1,
                    Ok(_) => errors.push(format!("k={k} seed {seed}: degenerate draw certified")),
                    Err(e) => errors.push(format!("k={k} seed {seed}: {e}")),
                }
            }
            (errors, newton, rejected)
        })
        .collect();
    let (mut newton, mut rejected) = (0, 0);
    for (errors, n, r) in out {
        res.absorb(errors);
        newton += n;
        rejected += r;
    }
    res.count("slice", slice);
    res.count("newton", newton as u64);
    res.count("degenerate_rejected", rejected as u64);
    res.detail = format!(
        "{slice} slice samples with gamma = 0 exactly, {newton} Newton samples within {NEWTON_RESIDUAL_BOUND:e} |A|^2, {rejected} degenerate draws rejected"
    );
    res
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub criteria: Vec<CriterionResult>,
    pub aborted: bool,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.aborted && self.criteria.iter().all(|c| c.passed)
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64())
}

fn stamp(mut r: CriterionResult, extra_s: f64, own_s: f64) -> CriterionResult {
    r.elapsed_s = extra_s + own_s;
    r
}

/// Runs the selected criteria; `on_result` sees each result as it lands.
/// A certified synthetic tensor in criterion 8 stops the run.
pub fn run_suite(cfg: &SuiteConfig, mut on_result: impl FnMut(&CriterionResult)) -> Result<SuiteReport, Error> {
    let bad: Vec<usize> = cfg.ks.iter().copied().filter(|k| !(2..=5).contains(k)).collect();
    if !bad.is_empty() || cfg.ks.is_empty() {
        return Err(Error::Precondition(format!("k-range must lie in 2..=5, got {:?}", cfg.ks)));
    }
    let needs_bank = [1, 3, 4, 9, 10].iter().any(|&i| cfg.wants(i));
    let (bank, bank_s) = if needs_bank { timed(|| SampleBank::build(cfg)) } else { (SampleBank::default(), 0.0) };
    let needs_synth = cfg.wants(3) || cfg.wants(4);
    let ((synthetic, synth_errors), synth_s) =
        if needs_synth { timed(|| synthetic_audits(cfg)) } else { ((Vec::new(), Vec::new()), 0.0) };
    let mut criteria = Vec::new();
    let mut push = |r: CriterionResult, criteria: &mut Vec<CriterionResult>| {
        on_result(&r);
        criteria.push(r);
    };
    if cfg.wants(1) {
        let (r, s) = timed(|| criterion1(cfg, &bank));
        push(stamp(r, bank_s, s), &mut criteria);
    }
    if cfg.wants(2) {
        let (r, s) = timed(|| criterion2(cfg));
        push(stamp(r, 0.0, s), &mut criteria);
    }
    if cfg.wants(3) {
        let (r, s) = timed(|| criterion3(cfg, &bank, &synthetic));
        push(stamp(r, 0.0, s), &mut criteria);
    }
    if cfg.wants(4) {
        let (r, s) = timed(|| criterion4(&bank, &synthetic, &synth_errors));
        push(stamp(r, synth_s, s), &mut criteria);
    }
    if cfg.wants(5) {
        let (r, s) = timed(|| criterion5(cfg));
        push(stamp(r, 0.0, s), &mut criteria);
    }
    if cfg.wants(6) {
        let (r, s) = timed(|| criterion6(cfg));
        push(stamp(r, 0.0, s), &mut criteria);
    }
    if cfg.wants(7) {
        let (r, s) = timed(|| criterion7(cfg));
        push(stamp(r, 0.0, s), &mut criteria);
    }
    if cfg.wants(8) {
        let ((r, falsified), s) = timed(|| criterion8(cfg));
        push(stamp(r, 0.0, s), &mut criteria);
        if falsified {
            return Ok(SuiteReport { config: cfg.clone(), criteria, aborted: true });
        }
    }
    if cfg.wants(9) {
        let (r, s) = timed(|| criterion9(cfg, &bank));
        push(stamp(r, 0.0, s), &mut criteria);
    }
    if cfg.wants(10) {
        let (r, s) = timed(|| criterion10(cfg, &bank));
        push(stamp(r, 0.0, s), &mut criteria);
    }
    Ok(SuiteReport { config: cfg.clone(), criteria, aborted: false })
}
