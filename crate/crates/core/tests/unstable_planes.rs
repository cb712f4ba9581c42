use instanton_core::linalg::float;
use instanton_core::monad::{complexify, generate_newton, generate_slice, h0_plane, h0_plane_float, NewtonStart};
use instanton_core::planes::*;
use instanton_core::rng::{int_in, seeded};
use instanton_core::tensors::{beta_matrix, ATensor};
use instanton_core::{AffineSolution, Error, Rational, Scalar};
use num_complex::Complex64 as C64;

const TOL: f64 = 1e-8;

fn q(v: i64) -> Rational {
    Rational::from_i64(v)
}

fn cf(v: &[f64]) -> Vec<C64> {
    v.iter().map(|x| C64::new(*x, 0.0)).collect()
}

/// Oracle: `f* (x) b*` lies in the column span of beta.
fn in_image(a: &ATensor<Rational>, fstar: &[Rational], bstar: &[Rational]) -> bool {
    let k = a.k();
    let target: Vec<Rational> = (0..4 * k).map(|r| fstar[r / k].clone() * bstar[r % k].clone()).collect();
    matches!(beta_matrix(a).solve_affine(&target), AffineSolution::Solution(_))
}

#[test]
fn zero_tensor_and_zero_covector_rejected() {
    let zero = ATensor::<Rational>::zeros(2);
    let f = vec![q(1), q(0), q(0), q(0)];
    assert!(matches!(unstable_plane_test(&zero, &f), Err(Error::Precondition(_))));
    let s = generate_slice(2, 1).unwrap();
    assert!(matches!(unstable_plane_test(&s.a, &[q(0), q(0), q(0), q(0)]), Err(Error::Precondition(_))));
}

#[test]
fn exact_test_matches_restriction_kernel() {
    let mut rng = seeded(21);
    for k in 2..=4 {
        let s = generate_slice(k, k as u64).unwrap();
        for trial in 0..60 {
            // every fourth plane lies on the special line {f2 = f3 = 0}
            let f: Vec<Rational> = if trial % 4 == 0 {
                vec![q(int_in(&mut rng, 5)), q(1 + int_in(&mut rng, 3).abs()), q(0), q(0)]
            } else {
                (0..4).map(|_| q(int_in(&mut rng, 5))).collect()
            };
            if f.iter().all(|x| x.is_zero()) {
                continue;
            }
            let test = unstable_plane_test(&s.a, &f).unwrap();
            let h0 = h0_plane(&s.a, &f).unwrap();
            assert_eq!(test.unstable, h0 >= 1, "k={k} f={f:?}");
            assert!(h0 <= 1);
            if test.unstable {
                assert_eq!(test.intersection_dim, 1);
                let b = test.bstar.unwrap();
                assert!(b.iter().any(|x| !x.is_zero()));
                assert!(in_image(&s.a, &f, &b));
            } else {
                assert!(test.bstar.is_none());
            }
        }
    }
}

#[test]
fn slice_samples_contain_an_unstable_line() {
    for k in 2..=5 {
        let s = generate_slice(k, 3).unwrap();
        for f in [[1, 0, 0, 0], [0, 1, 0, 0], [2, -3, 0, 0]] {
            let f: Vec<Rational> = f.iter().map(|x| q(*x)).collect();
            assert!(unstable_plane_test(&s.a, &f).unwrap().unstable);
            assert_eq!(h0_plane(&s.a, &f).unwrap(), 1);
        }
    }
}

#[test]
fn charge_two_locus_is_a_quadric() {
    let s = generate_slice(2, 5).unwrap();
    let a = to_complex(&s.a);
    let probe = w_dimension_probe(&a, 20, 5, TOL).unwrap();
    assert_eq!(probe.verdict, DimensionVerdict::AtLeastTwo);
    assert!(probe.hit_points.len() >= QUADRIC_MIN_POINTS);
    for p in &probe.hit_points {
        assert_eq!(p.h0, 1);
        assert_eq!(h0_plane_float(&a, &p.fstar, TOL).unwrap(), 1);
        let test = unstable_plane_test_float(&a, &p.fstar, TOL).unwrap();
        assert!(test.unstable);
        assert_eq!(test.intersection_dim, 1);
    }
    let pts: Vec<Vec<C64>> = probe.hit_points.iter().map(|p| p.fstar.clone()).collect();
    let fit = quadric_fit(&pts).unwrap();
    assert!(fit.residual <= 1e-8, "residual {}", fit.residual);
}

#[test]
fn generic_higher_charge_locus_is_a_curve() {
    for k in 3..=4 {
        let s = generate_newton(k, 11, 50, &NewtonStart::Random).unwrap();
        let probe = w_dimension_probe(&complexify(&s.a), 20, 11, TOL).unwrap();
        assert_eq!(probe.verdict, DimensionVerdict::AtMostOneLikely);
        for p in &probe.hit_points {
            assert_eq!(p.h0, 1);
        }
    }
}

#[test]
fn pencil_through_known_plane_finds_it() {
    let mut rng = seeded(4);
    for k in 2..=5 {
        let s = generate_slice(k, 9).unwrap();
        let a = to_complex(&s.a);
        let f0 = cf(&[3.0, -2.0, 0.0, 0.0]);
        let f1: Vec<C64> = (0..4).map(|_| C64::new(int_in(&mut rng, 7) as f64 + 0.5, 0.0)).collect();
        let hits = w_line_probe(&a, &f0, &f1, 1, TOL).unwrap();
        assert!(hits.hits().iter().any(|p| same_point(&p.fstar, &f0)), "k={k}");
        // the same plane as the point at infinity of the reversed pencil
        let hits = w_line_probe(&a, &f1, &f0, 1, TOL).unwrap();
        assert!(hits.hits().iter().any(|p| same_point(&p.fstar, &f0)), "k={k}");
    }
}

#[test]
fn line_probe_hits_reverify() {
    let mut rng = seeded(8);
    for k in 2..=5 {
        let s = generate_slice(k, 2).unwrap();
        let a = to_complex(&s.a);
        for _ in 0..5 {
            let f0: Vec<C64> = (0..4).map(|_| C64::new(int_in(&mut rng, 9) as f64, 0.0)).collect();
            let f1: Vec<C64> = (0..4).map(|_| C64::new(int_in(&mut rng, 9) as f64, 0.0)).collect();
            let Ok(hits) = w_line_probe(&a, &f0, &f1, 3, TOL) else { continue };
            for p in hits.hits() {
                assert_eq!(h0_plane_float(&a, &p.fstar, TOL).unwrap(), 1);
                let b = p.bstar.as_ref().unwrap();
                assert!((float::norm(b) - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn charge_one_lines_are_entirely_unstable() {
    let s = generate_slice(1, 1).unwrap();
    let a = to_complex(&s.a);
    let probe = w_line_probe(&a, &cf(&[1.0, 0.0, 0.0, 0.0]), &cf(&[0.0, 0.0, 1.0, 1.0]), 0, TOL).unwrap();
    assert_eq!(probe, LineProbe::WholeLine);
    let mut rng = seeded(2);
    for _ in 0..20 {
        let f: Vec<Rational> = (0..4).map(|_| q(int_in(&mut rng, 6))).collect();
        if f.iter().all(|x| x.is_zero()) {
            continue;
        }
        assert_eq!(h0_plane(&s.a, &f).unwrap(), 1);
        assert_eq!(unstable_plane_test(&s.a, &f).unwrap().intersection_dim, 1);
    }
}

#[test]
fn dependent_pencil_and_zero_trials_rejected() {
    let s = generate_slice(2, 1).unwrap();
    let a = to_complex(&s.a);
    let f = cf(&[1.0, 2.0, 3.0, 4.0]);
    let g = cf(&[2.0, 4.0, 6.0, 8.0]);
    assert!(matches!(w_line_probe(&a, &f, &g, 0, TOL), Err(Error::Precondition(_))));
    assert!(matches!(w_dimension_probe(&a, 0, 0, TOL), Err(Error::Precondition(_))));
}

#[test]
fn quadric_fit_recovers_segre_quadric() {
    let mut rng = seeded(6);
    let mut pts = Vec::new();
    for _ in 0..14 {
        let (s, t, u, v) = (
            int_in(&mut rng, 5) as f64 + 0.3,
            int_in(&mut rng, 5) as f64 - 0.7,
            int_in(&mut rng, 5) as f64 + 1.1,
            int_in(&mut rng, 5) as f64 - 0.2,
        );
        pts.push(cf(&[s * u, s * v, t * u, t * v]));
    }
    let fit = quadric_fit(&pts).unwrap();
    assert!(fit.residual < 1e-10);
    assert!(fit.held_out > 0);
    // x0 x3 - x1 x2: only the (0,3) and (1,2) monomials survive, with opposite signs
    let idx = |i, j| instanton_core::tensors::sym_index(i, j);
    let lead = fit.coeffs[idx(0, 3)];
    for (m, c) in fit.coeffs.iter().enumerate() {
        let expect = if m == idx(0, 3) {
            C64::new(1.0, 0.0)
        } else if m == idx(1, 2) {
            C64::new(-1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
        assert!((c / lead - expect).norm() < 1e-9, "monomial {m}");
    }
    assert!(matches!(quadric_fit(&pts[..8]), Err(Error::Precondition(_))));
}
