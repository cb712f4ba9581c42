use instanton_core::linalg::{float, Matrix};
use instanton_core::pencil::*;
use instanton_core::rng::{int_in, seeded, SeededRng};
use instanton_core::tensors::{flattenings, rho_apply, rho_matrix, rk_s, STensor};
use instanton_core::{Error, Rational, Scalar};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn q(v: i64) -> Rational {
    Rational::from_i64(v)
}

fn cz(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn cm(rows: &[&[f64]]) -> Matrix<C64> {
    Matrix::from_fn(rows.len(), rows[0].len(), |r, c| cz(rows[r][c]))
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

/// `P^T M P` for a random real `P` of rank `rank`, a skew matrix of rank
/// at most `rank`.
fn skew_of_rank(rng: &mut SeededRng, k: usize, rank: usize) -> Matrix<C64> {
    let inner = random_skew(rng, rank);
    let p = Matrix::from_fn(rank, k, |_, _| cz(int_in(rng, 4) as f64));
    p.transpose().mul(&inner).mul(&p)
}

/// Oracle for a pencil witness: independent recomputation of both
/// products and a 2 x k rank test on them.
fn check_witness(r1: &Matrix<C64>, r2: &Matrix<C64>, w: &PencilWitness) {
    let a = r1.mul_vec(&w.v0);
    let b = r2.mul_vec(&w.v0);
    let scale = r1.frobenius().max(r2.frobenius());
    assert!((float::norm(&w.v0) - 1.0).abs() < 1e-12);
    let stacked = Matrix::from_fn(2, a.len(), |r, c| if r == 0 { a[c] } else { b[c] });
    let sv = float::singular_values(&stacked);
    assert!(sv[0] > 1e-6 * scale, "image {}", sv[0]);
    assert!(sv.get(1).copied().unwrap_or(0.0) <= 1e-8 * scale, "proportionality {}", sv[1]);
    assert!(w.residual <= PENCIL_RESIDUAL_TOL);
    assert!(w.image_norm > PENCIL_IMAGE_MIN);
}

#[test]
fn pencil_direct_example() {
    let r1 = cm(&[&[0.0, 1.0], &[-1.0, 0.0]]);
    let w = lemma21_solve(&r1, &Matrix::zeros(2, 2)).unwrap();
    assert_eq!(w.v0, vec![cz(1.0), cz(0.0)]);
    assert_eq!(w.u0, vec![cz(0.0), cz(-1.0)]);
    assert_eq!(w.lambda, (cz(1.0), cz(0.0)));
}

#[test]
fn pencil_proportional_example() {
    let r1 = cm(&[&[0.0, 1.0], &[-1.0, 0.0]]);
    let w = lemma21_solve(&r1, &r1.scale(&cz(3.0))).unwrap();
    let mu = w.lambda.1 / w.lambda.0;
    assert!((mu - cz(3.0)).norm() < 1e-8);
    check_witness(&r1, &r1.scale(&cz(3.0)), &w);
}

#[test]
fn pencil_rejects_bad_input() {
    let z = Matrix::<C64>::zeros(3, 3);
    assert!(matches!(lemma21_solve(&z, &z), Err(Error::Precondition(_))));
    let sym = cm(&[&[1.0, 0.0], &[0.0, 1.0]]);
    assert!(matches!(lemma21_solve(&sym, &z.block(0, 0, 2, 2)), Err(Error::Precondition(_))));
    assert!(matches!(lemma21_solve(&z, &z.block(0, 0, 2, 2)), Err(Error::ShapeMismatch(_))));
}

#[test]
fn pencil_random_pairs() {
    let mut rng = seeded(31);
    for k in 2..=5 {
        for trial in 0..500 {
            let (r1, r2) = match trial % 5 {
                // generic
                0 | 1 => (random_skew(&mut rng, k), random_skew(&mut rng, k)),
                // singular R1
                2 => (skew_of_rank(&mut rng, k, k.saturating_sub(2).max(2).min(k)), random_skew(&mut rng, k)),
                // common kernel: identically singular pencil
                3 => {
                    let p = Matrix::from_fn(k - 1, k, |_, _| cz(int_in(&mut rng, 4) as f64));
                    let a = random_skew(&mut rng, k - 1);
                    let b = random_skew(&mut rng, k - 1);
                    (p.transpose().mul(&a).mul(&p), p.transpose().mul(&b).mul(&p))
                }
                // one block vanishes
                _ => (Matrix::zeros(k, k), random_skew(&mut rng, k)),
            };
            if r1.frobenius() == 0.0 && r2.frobenius() == 0.0 {
                continue;
            }
            let w = lemma21_solve(&r1, &r2).unwrap_or_else(|e| panic!("k={k} trial={trial}: {e}"));
            check_witness(&r1, &r2, &w);
        }
    }
}

#[test]
fn sigma12_examples() {
    let s = STensor::<Rational>::from_monomial(2, 0, 0, 0, 1);
    assert_eq!(sigma12_max_rank(&s, 50, 1).0, 1);
    let s = STensor::<Rational>::from_monomial(2, 0, 1, 0, 1);
    assert_eq!(sigma12_max_rank(&s, 50, 1).0, 2);
    assert_eq!(sigma12_max_rank(&STensor::<Rational>::zeros(3), 50, 1).0, 0);
}

#[test]
fn sigma12_basis_change_attains_r() {
    for k in 2..=5 {
        for seed in 0..5 {
            let s = random_s_of_rank(k, 2 * k.min(4), seed).unwrap();
            let (r, c) = sigma12_max_rank(&s, 50, seed);
            assert_eq!(c.rank(), k);
            let s1 = instanton_core::tensors::act_s(&c, &Matrix::identity(4), &s);
            assert_eq!(s1.block(0, 1).rank(), r);
            // oracle: an independent sample never beats r
            let mut rng = seeded(seed + 100);
            for _ in 0..20 {
                let c1: Vec<Rational> = (0..k).map(|_| q(int_in(&mut rng, 20))).collect();
                let c2: Vec<Rational> = (0..k).map(|_| q(int_in(&mut rng, 20))).collect();
                assert!(sigma12(&s, &c1, &c2).rank() <= r);
            }
        }
    }
}

#[test]
fn generator_hits_requested_ranks() {
    for k in 2..=5 {
        for target in (0..=2 * k - 2).step_by(2) {
            let s = random_s_of_rank(k, target, k as u64).unwrap();
            assert_eq!(rk_s(&s), target);
        }
    }
    let s = random_s_of_rank(2, 2, 3).unwrap();
    assert_eq!(sigma12_max_rank(&s, 50, 0).0, 1);
    let c = random_s_biased(5, 8, SCaseBias::C, 1).unwrap();
    assert_eq!((rk_s(&c), sigma12_max_rank(&c, 50, 9).0), (8, 4));
    let d = random_s_biased(5, 8, SCaseBias::D, 1).unwrap();
    assert_eq!((rk_s(&d), sigma12_max_rank(&d, 50, 9).0), (8, 3));
    assert!(matches!(random_s_of_rank(3, 3, 0), Err(Error::Precondition(_))));
    assert!(matches!(random_s_biased(4, 8, SCaseBias::C, 0), Err(Error::Precondition(_))));
}

#[test]
fn normalization_kills_the_tail() {
    for k in 2..=5 {
        for seed in 0..4 {
            for (bias, target) in [(SCaseBias::A, 2 * k - 2), (SCaseBias::B, 6), (SCaseBias::D, 8)] {
                let Ok(s) = random_s_biased(k, target, bias, seed) else { continue };
                let n = normalize(&s, 50, seed).unwrap();
                let m = n.normalized.block(0, 1);
                for i in 0..4 {
                    for j in 0..4 {
                        let expect = if i == j && i < n.r { n.diagonal[i].clone() } else { q(0) };
                        assert_eq!(m[(i, j)], expect);
                    }
                }
                assert!(tail_vanishes(&n.normalized, n.r), "k={k} bias={bias:?}");
                assert_eq!(rk_s(&n.normalized), rk_s(&s));
            }
        }
    }
}

/// Oracle for case (a): recompute `rho(S, B*)` and test its rank.
fn brute_rank_one(s: &STensor<Rational>, bstar: &[C64]) -> bool {
    let k = s.k();
    let rho = rho_matrix(&s.map(|x| cz(instanton_core::scalar::rational_to_f64(x))));
    let img = rho.mul_vec(bstar);
    let m = Matrix::from_vec(4, k, img);
    float::rank(&m, 1e-8) == 1
}

#[test]
fn case_a_instances_yield_rank_one_witnesses() {
    for k in 2..=5 {
        for seed in 0..15 {
            let target = 2 + 2 * (seed as usize % (k - 1));
            let s = random_s_biased(k, target, SCaseBias::A, seed).unwrap();
            let cls = classify_s(&s, seed).unwrap();
            assert_eq!(cls.case, LemmaCase::A);
            let Condition::Cond1(w) = &cls.condition else { panic!("expected cond1") };
            assert!(brute_rank_one(&s, &w.bstar), "k={k} seed={seed}");
            assert!(w.rank_ratio <= 1e-8);
        }
    }
    let r1 = STensor::<Rational>::from_monomial(3, 1, 1, 0, 2);
    let cls = classify_s(&r1, 0).unwrap();
    assert_eq!((cls.r, cls.case), (1, LemmaCase::A));
}

#[test]
fn case_b_instances_yield_annihilating_covectors() {
    // all blocks supported in the top-left 3 x 3 corner of the f-indices
    let mut s = STensor::<Rational>::zeros(4);
    let mut rng = seeded(3);
    for i in 0..4 {
        for j in i + 1..4 {
            for l in 0..3 {
                for p in l..3 {
                    s.set_sigma(i, j, l, p, q(int_in(&mut rng, 5)));
                }
            }
        }
    }
    let target = rk_s(&s);
    if target == 6 {
        let cls = classify_s(&s, 1).unwrap();
        assert!(matches!(cls.condition, Condition::Cond2(_)));
    }
    for k in 4..=5 {
        for seed in 0..10 {
            let s = random_s_biased(k, 6, SCaseBias::B, seed).unwrap();
            let cls = classify_s(&s, seed).unwrap();
            assert_eq!(cls.case, LemmaCase::B);
            let Condition::Cond2(w) = &cls.condition else { panic!("expected cond2") };
            for j in 0..k {
                let mut b = vec![q(0); k];
                b[j] = q(1);
                assert!(rho_apply(&s, &w.fstar, &b).iter().all(|x| x.is_zero()));
            }
        }
    }
}

#[test]
fn case_c_instances_yield_surfaces() {
    for seed in 0..6 {
        let s = random_s_biased(5, 8, SCaseBias::C, seed).unwrap();
        let cls = classify_s(&s, seed).unwrap();
        assert_eq!(cls.case, LemmaCase::C);
        let Condition::Cond3(fam) = &cls.condition else { panic!("expected cond3") };
        assert_eq!(fam.source, ZsSource::Claim1);
        assert!(fam.points.len() >= 25);
        assert_eq!(fam.jacobian_rank, 2);
        let sc = s.map(|x| cz(instanton_core::scalar::rational_to_f64(x)));
        for p in &fam.points {
            let v = rho_apply(&sc, &p.fstar, &p.bstar);
            assert!(float::norm(&v) <= 1e-8 * rho_matrix(&sc).frobenius());
        }
        for (i, a) in fam.points.iter().enumerate() {
            for b in &fam.points[..i] {
                assert!(!instanton_core::planes::same_point(&a.bstar, &b.bstar));
            }
        }
    }
}

#[test]
fn case_d_instances_yield_surfaces() {
    for seed in 0..6 {
        let s = random_s_biased(5, 8, SCaseBias::D, seed).unwrap();
        let cls = classify_s(&s, seed).unwrap();
        assert_eq!(cls.case, LemmaCase::D);
        let Condition::Cond3(fam) = &cls.condition else { panic!("expected cond3") };
        assert_eq!(fam.source, ZsSource::Claim2);
        assert_eq!(fam.jacobian_rank, 2);
        for p in &fam.points {
            let e = p.exact.as_ref().unwrap();
            assert!(rho_apply(&s, &e.fstar, &e.bstar).iter().all(|x| x.is_zero()));
        }
    }
}

#[test]
fn claim1_single_matrix_and_grid() {
    let s = random_s_biased(5, 8, SCaseBias::C, 4).unwrap();
    let frame = case_c_frame(&s, 4).unwrap();
    assert!(frame.normalized.block(0, 1).sub(&Matrix::identity(4)).max_abs() < 1e-8);
    let p = claim1_point(&frame.normalized, &[cz(1.0), cz(0.0), cz(0.0)], ZS_TOL).unwrap();
    // f is an eigenvector of sigma^{02} and sigma^{12}
    for blk in [frame.normalized.block(0, 2), frame.normalized.block(1, 2)] {
        let img = blk.mul_vec(&p.fstar);
        let lam = float::dot(&p.fstar, &img);
        assert!(float::norm(&float::sub_vec(&img, &float::scale_vec(&p.fstar, lam))) < 1e-8 * blk.frobenius().max(1.0));
    }
    let fam = claim1_family(&s, 25, 4).unwrap();
    assert_eq!(fam.points.len(), 25);
    assert_eq!(fam.jacobian_rank, 2);
}

#[test]
fn claim1_rejects_non_commuting_blocks() {
    let mut s = STensor::<C64>::zeros(5);
    let mut rng = seeded(8);
    for l in 0..4 {
        s.set_sigma(0, 1, l, l, cz(1.0));
    }
    for (a, b) in [(0, 2), (1, 2)] {
        for l in 0..4 {
            for p in l..4 {
                s.set_sigma(a, b, l, p, cz(int_in(&mut rng, 5) as f64));
            }
        }
    }
    assert!(matches!(claim1_point(&s, &[cz(1.0), cz(0.0), cz(0.0)], ZS_TOL), Err(Error::NonCommuting { .. })));
    let c = random_s_biased(5, 8, SCaseBias::C, 1).unwrap();
    // the raw tensor is not in the normalized frame
    assert!(matches!(
        claim1_point(&c.map(|x| cz(instanton_core::scalar::rational_to_f64(x))), &[cz(1.0), cz(0.0), cz(0.0)], ZS_TOL),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn claim2_points_vary_with_the_line() {
    let s = random_s_biased(5, 8, SCaseBias::D, 2).unwrap();
    let mut rng = seeded(12);
    let mut pts: Vec<ZsPoint> = Vec::new();
    while pts.len() < 20 {
        let n1: Vec<Rational> = (0..5).map(|_| q(int_in(&mut rng, 6))).collect();
        let n2: Vec<Rational> = (0..5).map(|_| q(int_in(&mut rng, 6))).collect();
        match claim2_witness(&s, &n1, &n2) {
            Ok(p) => {
                let e = p.exact.as_ref().unwrap();
                assert!(rho_apply(&s, &e.fstar, &e.bstar).iter().all(|x| x.is_zero()));
                // b lies on the chosen line
                let m = Matrix::from_fn(3, 5, |r, c| [&n1, &n2, &e.bstar][r][c].clone());
                assert_eq!(m.rank(), 2);
                pts.push(p);
            }
            Err(Error::Precondition(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
    let distinct = pts
        .iter()
        .enumerate()
        .filter(|(i, p)| !pts[..*i].iter().any(|o| instanton_core::planes::same_point(&o.bstar, &p.bstar)))
        .count();
    assert!(distinct >= 15);
    let c = random_s_biased(5, 8, SCaseBias::C, 2).unwrap();
    let e = |i: usize| (0..5).map(|j| q((i == j) as i64)).collect::<Vec<_>>();
    assert!(claim2_witness(&c, &e(0), &e(1)).is_err());
}

#[test]
fn zs_probe_verdicts() {
    let zero = zs_dimension_probe(&STensor::<Rational>::zeros(3), 25, 0).unwrap();
    assert_eq!(zero.verdict, ZsVerdict::AtLeastTwo);
    assert_eq!(zero.family.unwrap().source, ZsSource::Everything);
    let small = random_s_of_rank(3, 2, 0).unwrap();
    assert_eq!(zs_dimension_probe(&small, 25, 0).unwrap().verdict, ZsVerdict::NotApplicable);
    let c = random_s_biased(5, 8, SCaseBias::C, 7).unwrap();
    assert_eq!(zs_dimension_probe(&c, 25, 7).unwrap().verdict, ZsVerdict::AtLeastTwo);
    assert!(matches!(zs_dimension_probe(&c, 0, 7), Err(Error::Precondition(_))));
}

#[test]
fn classify_rejects_out_of_range() {
    let s = random_s_of_rank(3, 6, 0).unwrap();
    assert!(matches!(classify_s(&s, 0), Err(Error::Precondition(_))));
    assert!(matches!(classify_s(&STensor::<Rational>::zeros(3), 0), Err(Error::Precondition(_))));
    assert!(matches!(classify_s(&STensor::<Rational>::zeros(1), 0), Err(Error::InvalidCharge(1))));
}

#[test]
fn flattening_ranks_agree_on_generated_tensors() {
    for k in 2..=5 {
        let s = random_s_of_rank(k, 2 * k - 2, 5).unwrap();
        let (sigma, sigma_hat) = flattenings(&s);
        assert_eq!(sigma.rank(), rk_s(&s));
        assert_eq!(sigma_hat.rank(), rk_s(&s));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pencil_witness_always_verifies(seed in 0u64..10_000, k in 2usize..=5) {
        let mut rng = seeded(seed);
        let r1 = random_skew(&mut rng, k);
        let r2 = random_skew(&mut rng, k);
        prop_assume!(r1.frobenius() > 0.0 || r2.frobenius() > 0.0);
        let w = lemma21_solve(&r1, &r2).unwrap();
        check_witness(&r1, &r2, &w);
    }

    #[test]
    fn every_generated_s_lands_in_one_case(seed in 0u64..10_000, k in 2usize..=4) {
        let target = 2 + 2 * (seed as usize % (k - 1));
        let s = random_s_of_rank(k, target, seed).unwrap();
        let cls = classify_s(&s, seed).unwrap();
        let expected = match (cls.r, cls.rk_s) {
            (0..=2, _) => 1,
            (3, 6) => 2,
            _ => 3,
        };
        prop_assert_eq!(cls.condition.index(), expected);
    }
}
