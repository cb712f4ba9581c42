use instanton_core::audit::*;
use instanton_core::linalg::Matrix;
use instanton_core::monad::{generate_slice, to_f64};
use instanton_core::pencil::{random_s_biased, random_s_of_rank, SCaseBias};
use instanton_core::tensors::{a_dim, gamma, rk_s, s_dim, xi, xi_matrix, ATensor, GammaMode, STensor};
use instanton_core::{Error, Rational, Scalar};

fn q(v: i64) -> Rational {
    Rational::from_i64(v)
}

fn opts() -> AuditOptions {
    AuditOptions { e1_samples: 30, ..AuditOptions::default() }
}

/// Oracle: `dgamma` by polarization of `gamma` on unit tensors.
fn polarized_rank(a: &ATensor<Rational>) -> usize {
    let k = a.k();
    let ga = gamma(a, GammaMode::MatrixOfForms);
    let cols: Vec<Vec<Rational>> = (0..a_dim(k))
        .map(|idx| {
            let mut e = vec![q(0); a_dim(k)];
            e[idx] = q(1);
            let e = ATensor::from_vec(k, e);
            let gae = gamma(&a.add(&e), GammaMode::MatrixOfForms);
            let ge = gamma(&e, GammaMode::MatrixOfForms);
            gae.iter().zip(&ga).zip(&ge).map(|((x, y), z)| x.clone() - y.clone() - z.clone()).collect()
        })
        .collect();
    Matrix::from_fn(s_dim(k), a_dim(k), |r, c| cols[c][r].clone()).rank()
}

#[test]
fn tangent_dimensions_match_expected_values() {
    for (k, expect) in [(1, (16, 5)), (2, (38, 13)), (3, (66, 21)), (4, (100, 29)), (5, (140, 37))] {
        let s = generate_slice(k, 3).unwrap();
        assert_eq!(tangent_dims(&s.a).unwrap(), expect, "k={k}");
    }
}

#[test]
fn dgamma_rank_matches_polarization() {
    for k in 1..=3 {
        let s = generate_slice(k, 4).unwrap();
        let r = polarized_rank(&s.a);
        let (t, _) = tangent_dims(&s.a).unwrap();
        assert_eq!(a_dim(k) - r, t);
    }
}

#[test]
fn tangent_dims_reject_non_instantons() {
    assert!(matches!(tangent_dims(&ATensor::zeros(2)), Err(Error::Precondition(_))));
}

#[test]
fn certified_samples_are_smooth() {
    for k in 1..=5 {
        let s = generate_slice(k, 6).unwrap();
        let rep = audit(&s.a, &opts()).unwrap();
        assert!(rep.smooth, "k={k}");
        assert_eq!(rep.xi_corank, 0);
        assert_eq!(rep.moduli_tangent_dim, 8 * k as i64 - 3);
        assert_eq!(rep.rank_dgamma, rep.rank_xi);
        assert!(rep.riemann_roch_holds());
        assert!(rep.smoothness_consistent());
        assert_eq!(rep.certificate, (true, true, true));
        assert_eq!(xi_corank(&s.a).0, 0);
    }
}

#[test]
fn charge_one_has_no_obstruction_space() {
    let s = generate_slice(1, 2).unwrap();
    let (corank, basis) = xi_corank(&s.a);
    assert_eq!((corank, basis.len(), s_dim(1)), (0, 0, 0));
    assert_eq!(trace_sample(&s.a, 0).unwrap(), TraceOutcome::SmoothNoS);
}

#[test]
fn float_audit_agrees_with_exact() {
    for k in 2..=4 {
        let s = generate_slice(k, 8).unwrap();
        let exact = audit(&s.a, &opts()).unwrap();
        let fl = audit_float(&to_f64(&s.a), &opts()).unwrap();
        assert_eq!(exact.integers(), fl.integers());
    }
}

#[test]
fn audits_are_scale_invariant() {
    let s = generate_slice(3, 1).unwrap();
    let o = AuditOptions { probe_trials: 5, ..opts() };
    let a = audit(&s.a, &o).unwrap();
    let b = audit(&s.a.scale(&Rational::from_ratio(-7, 3)), &o).unwrap();
    assert_eq!(a, b);
}

#[test]
fn synthetic_pairs_are_unsmooth_and_never_instantons() {
    for k in 2..=5 {
        for seed in 0..4 {
            let target = 2 + 2 * (seed as usize % (k - 1));
            let s = random_s_of_rank(k, target, seed).unwrap();
            let pair = synth_unsmooth_pair(&s, seed).unwrap();
            assert!(xi(&pair.a, &s).is_zero());
            assert!(xi_matrix(&pair.a).mul_vec(s.as_slice()).iter().all(|x| x.is_zero()));
            assert!(!pair.certificate.is_instanton());
            assert_eq!(pair.rk_s, rk_s(&s));
            assert_eq!(pair.kernel_dim, (2 * k + 2) * (4 * k - pair.rk_s));
            let rep = audit(&pair.a, &opts()).unwrap();
            assert!(rep.xi_corank >= 1);
            assert!(!rep.smooth);
            assert!(rep.riemann_roch_holds(), "k={k}");
            assert!(rep.smoothness_consistent());
            assert!(lemma31_check(&pair.a, &s).unwrap().all());
        }
    }
    assert!(matches!(synth_unsmooth_pair(&STensor::zeros(3), 0), Err(Error::Precondition(_))));
}

#[test]
fn lemma31_examples() {
    let s = generate_slice(3, 2).unwrap();
    assert!(lemma31_check(&s.a, &STensor::zeros(3)).unwrap().all());
    let planted = random_s_of_rank(3, 2, 1).unwrap();
    let pair = synth_unsmooth_pair(&planted, 1).unwrap();
    let mut bad = pair.a.clone();
    let v = bad.get(0, 0, 0).clone();
    bad.set(0, 0, 0, v + q(1));
    if !xi(&bad, &planted).is_zero() {
        assert!(matches!(lemma31_check(&bad, &planted), Err(Error::Precondition(_))));
        assert!(matches!(theorem_tracer(&bad, &planted, 0), Err(Error::Precondition(_))));
    }
}

#[test]
fn tracer_case_one() {
    for k in 2..=5 {
        let s = random_s_biased(k, 2, SCaseBias::A, k as u64).unwrap();
        let pair = synth_unsmooth_pair(&s, 3).unwrap();
        let out = theorem_tracer(&pair.a, &s, 3).unwrap();
        let TraceOutcome::CaseI { residual, .. } = out else { panic!("k={k}: {out:?}") };
        assert!(residual <= 1e-8);
        assert!(!pair.certificate.e1_passes() || !pair.certificate.is_instanton());
    }
}

#[test]
fn tracer_case_two() {
    for k in 4..=5 {
        let s = random_s_biased(k, 6, SCaseBias::B, 2).unwrap();
        let pair = synth_unsmooth_pair(&s, 2).unwrap();
        match theorem_tracer(&pair.a, &s, 2).unwrap() {
            TraceOutcome::CaseII { m_dim, .. } => assert!(m_dim >= 8 - k),
            other => panic!("k={k}: {other:?}"),
        }
    }
}

#[test]
fn tracer_case_three() {
    for bias in [SCaseBias::C, SCaseBias::D] {
        let s = random_s_biased(5, 8, bias, 5).unwrap();
        let pair = synth_unsmooth_pair(&s, 5).unwrap();
        match theorem_tracer(&pair.a, &s, 5).unwrap() {
            TraceOutcome::CaseIII { ker_rho_dim, beta_rank, family } => {
                assert_eq!((ker_rho_dim, beta_rank), (12, 12));
                assert!(family.certifies_dim_two());
            }
            other => panic!("{bias:?}: {other:?}"),
        }
    }
}

#[test]
fn tracer_early_exits() {
    let s = random_s_of_rank(3, 2, 0).unwrap();
    assert_eq!(theorem_tracer(&ATensor::zeros(3), &s, 0).unwrap(), TraceOutcome::E3Failure { beta_rank: 0 });
    assert!(matches!(theorem_tracer(&ATensor::zeros(3), &STensor::zeros(3), 0), Err(Error::Precondition(_))));
    assert_eq!(rank_bound_step(3, 8, 6), Some(TraceOutcome::RankBound { rk_s: 6, bound: 4 }));
    assert_eq!(rank_bound_step(3, 8, 4), None);
    assert_eq!(rank_bound_step(3, 7, 6), None);
    assert!(TraceOutcome::RankBound { rk_s: 6, bound: 4 }.contradicts_instanton());
    assert!(!TraceOutcome::SmoothNoS.contradicts_instanton());
}

#[test]
fn certified_samples_trace_to_smooth() {
    for k in 2..=4 {
        let s = generate_slice(k, 9).unwrap();
        assert_eq!(trace_sample(&s.a, 0).unwrap(), TraceOutcome::SmoothNoS);
    }
}

#[test]
fn thresholds_are_reported_side_by_side() {
    let s = generate_slice(2, 1).unwrap();
    let rep = audit(&s.a, &opts()).unwrap();
    assert_eq!(rep.smooth_threshold, 3 * 4 + 26);
    assert_eq!(rep.misprinted_threshold, 3 * 4 + 36);
    assert_eq!(rep.tangent_i_dim, rep.smooth_threshold);
}

#[test]
fn prime_audit_agrees_with_exact() {
    for k in 2..=4 {
        let s = generate_slice(k, 5).unwrap();
        let exact = audit(&s.a, &opts()).unwrap();
        let p = audit_prime(&s.a, &opts()).unwrap();
        assert_eq!(exact.integers(), p.integers());
        assert!(matches!(p.backend, instanton_core::Backend::Prime(_)));
    }
}
