use instanton_core::rng::{seeded, SeededRng};
use instanton_core::tensors::*;
use instanton_core::{Matrix, Rational, Scalar};
use proptest::prelude::*;

fn q(v: i64) -> Rational {
    Rational::from_i64(v)
}

/// Evaluates the skew matrix of forms `F(x) J F(x)^T` directly.
fn forms_at(a: &ATensor<Rational>, x: &[Rational]) -> Matrix<Rational> {
    let f = a.monad_matrix(x);
    f.mul(&gram(a.k())).mul(&f.transpose())
}

/// Evaluates a gamma value (monomial coefficients) at `x` as a skew matrix.
fn gamma_at(k: usize, g: &[Rational], x: &[Rational]) -> Matrix<Rational> {
    Matrix::from_fn(k, k, |s, t| {
        if s == t {
            return q(0);
        }
        let (a, b, sign) = if s < t { (s, t, 1) } else { (t, s, -1) };
        let mut acc = q(0);
        for sym in 0..10 {
            let (p, r) = sym_of(sym);
            acc = acc + g[pair_index(a, b, k) * 10 + sym].clone() * x[p].clone() * x[r].clone();
        }
        acc * q(sign)
    })
}

fn rand_vec(rng: &mut SeededRng, n: usize) -> Vec<Rational> {
    instanton_core::rng::rational_vec(rng, n, 5)
}

#[test]
fn gamma_zero_and_k1() {
    assert!(gamma(&ATensor::<Rational>::zeros(3), GammaMode::Coefficient).iter().all(|x| x.is_zero()));
    let mut rng = seeded(1);
    let a = random_a(&mut rng, 1, 4);
    assert!(gamma(&a, GammaMode::Coefficient).is_empty());
    assert!(gamma(&a, GammaMode::MatrixOfForms).is_empty());
}

#[test]
fn gamma_two_term_example() {
    // f1*(x)b1*(x)h1 + f1*(x)b2*(x)h4 for k = 2, omega(h1, h4) = 1
    let a = ATensor::<Rational>::unit(2, 0, 0, 0).add(&ATensor::unit(2, 0, 1, 3));
    let mut expect = vec![q(0); 10];
    expect[sym_index(0, 0)] = q(1);
    assert_eq!(gamma(&a, GammaMode::Coefficient), expect);
    assert_eq!(gamma(&a, GammaMode::MatrixOfForms), expect);
}

#[test]
fn gamma_matches_forms_pointwise() {
    let mut rng = seeded(2);
    for k in 2..=5 {
        let a = random_a(&mut rng, k, 3);
        let g = gamma(&a, GammaMode::Coefficient);
        for _ in 0..3 {
            let x = rand_vec(&mut rng, 4);
            assert_eq!(gamma_at(k, &g, &x), forms_at(&a, &x));
        }
    }
}

#[test]
fn dgamma_is_polarization() {
    let mut rng = seeded(3);
    assert!(dgamma(&ATensor::<Rational>::zeros(3)).is_zero());
    let d1 = dgamma(&random_a(&mut rng, 1, 3));
    assert_eq!((d1.rows(), d1.cols()), (0, 16));
    for k in 2..=4 {
        let a = random_a(&mut rng, k, 3);
        let b = random_a(&mut rng, k, 3);
        let lhs = dgamma(&a).mul_vec(b.as_slice());
        let ga = gamma(&a, GammaMode::MatrixOfForms);
        let gb = gamma(&b, GammaMode::MatrixOfForms);
        let gab = gamma(&a.add(&b), GammaMode::MatrixOfForms);
        let rhs: Vec<Rational> =
            gab.iter().zip(&ga).zip(&gb).map(|((x, y), z)| x.clone() - y.clone() - z.clone()).collect();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn dgamma_finite_differences() {
    let mut rng = seeded(4);
    for trial in 0..20 {
        let k = 2 + trial % 4;
        let a = random_a(&mut rng, k, 3).map(|x| instanton_core::scalar::rational_to_f64(x));
        let b = random_a(&mut rng, k, 3).map(|x| instanton_core::scalar::rational_to_f64(x));
        let eps = 1e-6;
        let plus = gamma(&a.add(&b.scale(&eps)), GammaMode::Coefficient);
        let minus = gamma(&a.add(&b.scale(&-eps)), GammaMode::Coefficient);
        let lin = dgamma(&a).mul_vec(b.as_slice());
        for ((p, m), l) in plus.iter().zip(&minus).zip(&lin) {
            let fd = (p - m) / (2.0 * eps);
            assert!((fd - l).abs() <= 1e-6 * (1.0 + l.abs()), "fd {fd} vs {l}");
        }
    }
}

#[test]
fn adjointness_with_omega_pairing() {
    let mut rng = seeded(5);
    let c = Rational::new(ADJOINT_NUM.into(), ADJOINT_DEN.into());
    for trial in 0..100 {
        let k = 2 + trial % 4;
        let a = random_a(&mut rng, k, 3);
        let b = random_a(&mut rng, k, 3);
        let s = random_s(&mut rng, k, 3);
        let lhs = dot(&dgamma(&a).mul_vec(b.as_slice()), s.as_slice());
        let rhs = omega_pairing(&xi(&a, &s), &b);
        assert_eq!(lhs, c.clone() * rhs);
    }
}

#[test]
fn rank_dgamma_equals_rank_xi() {
    let mut rng = seeded(6);
    for k in 2..=4 {
        let a = random_a(&mut rng, k, 2);
        assert_eq!(dgamma(&a).rank(), xi_matrix(&a).rank());
        // a sparse A with rank deficiency
        let sparse = ATensor::<Rational>::unit(k, 0, 0, 0).add(&ATensor::unit(k, 1, 1, 2));
        assert_eq!(dgamma(&sparse).rank(), xi_matrix(&sparse).rank());
    }
}

#[test]
fn xi_matrix_matches_xi() {
    let mut rng = seeded(7);
    for k in 2..=4 {
        let a = random_a(&mut rng, k, 3);
        let s = random_s(&mut rng, k, 3);
        assert_eq!(xi_matrix(&a).mul_vec(s.as_slice()), xi(&a, &s).as_slice());
    }
}

#[test]
fn xi_delta_example() {
    let a = ATensor::<Rational>::unit(2, 0, 0, 0);
    let s = STensor::<Rational>::from_monomial(2, 0, 1, 0, 1);
    assert_eq!(xi(&a, &s), CTensor::unit(2, 1, 1, 0));
    assert!(xi(&a, &STensor::zeros(2)).is_zero());
}

#[test]
fn beta_and_epsilon_examples() {
    let k = 2;
    let a = ATensor::<Rational>::unit(k, 0, 0, 0);
    let beta = beta_matrix(&a);
    assert_eq!(beta.column(3), vec![q(1), q(0), q(0), q(0), q(0), q(0), q(0), q(0)]);
    assert!(beta.column(0).iter().all(|x| x.is_zero()));
    let a3 = ATensor::<Rational>::unit(k, 0, 0, 2);
    let eps = epsilon_matrix(&a3);
    let mut h3 = vec![q(0); 6];
    h3[2] = q(1);
    assert_eq!(eps.column(0), h3);
    assert!(eps.column(k).iter().all(|x| x.is_zero()));
    let mut rng = seeded(8);
    for k in 1..=5 {
        let a = random_a(&mut rng, k, 3);
        assert_eq!(beta_matrix(&a), a.flat().mul(&gram(k)));
        assert_eq!(epsilon_matrix(&a), a.flat().transpose());
    }
    for _ in 0..50 {
        let a = random_a(&mut rng, 3, 1);
        assert_eq!(beta_matrix(&a).rank(), a.flat().rank());
    }
}

#[test]
fn rho_examples() {
    let s = STensor::<Rational>::from_monomial(2, 0, 1, 0, 1);
    let mut img = vec![q(0); 8];
    img[2 + 1] = q(1);
    assert_eq!(rho_apply(&s, &[q(1), q(0), q(0), q(0)], &[q(1), q(0)]), img);
    let s = STensor::<Rational>::from_monomial(2, 0, 0, 0, 1);
    let mut img = vec![q(0); 8];
    img[0] = q(-2);
    assert_eq!(rho_apply(&s, &[q(1), q(0), q(0), q(0)], &[q(0), q(1)]), img);
    assert!(rho_matrix(&s).mul_vec(&vec![q(0); 8]).iter().all(|x| x.is_zero()));
}

#[test]
fn rk_s_examples() {
    assert_eq!(rk_s(&STensor::<Rational>::zeros(3)), 0);
    assert_eq!(rk_s(&STensor::<Rational>::from_monomial(2, 0, 0, 0, 1)), 2);
    assert_eq!(rk_s(&STensor::<Rational>::from_monomial(2, 0, 1, 0, 1)), 4);
}

#[test]
fn flattening_bookkeeping() {
    let mut rng = seeded(9);
    let (z1, z2) = flattenings(&STensor::<Rational>::zeros(3));
    assert!(z1.is_zero() && z2.is_zero());
    for _ in 0..20 {
        let k = 3;
        let s = random_s(&mut rng, k, 4);
        let (sigma, sigma_hat) = flattenings(&s);
        // sigma^{12}_{34} (1-based) = sigma_hat^{34}_{12}
        assert_eq!(sigma[(0 * 4 + 2, 1 * 4 + 3)], sigma_hat[(2 * k, 3 * k + 1)]);
        assert!(sigma.is_skew() || !sigma.is_symmetric());
        assert_eq!(sigma.transpose(), sigma.scale(&q(-1)));
        for i in 0..4 {
            for j in 0..4 {
                let blk = sigma_hat_block(&s, i, j);
                assert!(blk.is_skew());
                assert_eq!(blk, sigma_hat_block(&s, j, i));
            }
        }
    }
}

#[test]
fn rho_is_scaled_sigma_hat() {
    let mut rng = seeded(10);
    for k in 2..=5 {
        let s = random_s(&mut rng, k, 3);
        let (_, sigma_hat) = flattenings(&s);
        assert_eq!(rho_matrix(&s), sigma_hat.scale(&q(-4)));
    }
}

#[test]
fn kappa_examples() {
    let k = 2;
    let c = CTensor::<Rational>::unit(k, 0, 0, 0);
    let mut h = vec![q(0); 6];
    h[k + 1] = q(1);
    let mut expect = Matrix::<Rational>::zeros(4, k);
    expect[(0, 0)] = q(1);
    assert_eq!(kappa(&c, &h), expect);
    let mut h1 = vec![q(0); 6];
    h1[0] = q(1);
    assert!(kappa(&c, &h1).is_zero());
    assert!(kappa(&CTensor::zeros(k), &h).is_zero());
}

#[test]
fn tau0_two_orders() {
    let mut rng = seeded(11);
    for k in 2..=5 {
        let a = random_a(&mut rng, k, 3);
        let s = random_s(&mut rng, k, 3);
        let h = rand_vec(&mut rng, 2 * k + 2);
        // direct: tau0[p][b] = sum_{i,j,l} 4 sigma^{jb}_{ip} a[i][j][l] omega(h_l, h)
        let direct = Matrix::from_fn(4, k, |p, b| {
            let mut acc = q(0);
            for i in 0..4 {
                for j in 0..k {
                    let w = omega(k, a.column(i, j), &h);
                    acc = acc + q(4) * s.sigma(j, b, i, p) * w;
                }
            }
            acc
        });
        assert_eq!(tau0(&a, &s, &h), direct);
        assert!(tau0(&a, &STensor::zeros(k), &h).is_zero());
    }
}

#[test]
fn equivariance() {
    let mut rng = seeded(12);
    for k in 2..=4 {
        let g = random_group_element(&mut rng, k);
        let a = random_a(&mut rng, k, 2);
        let s = random_s(&mut rng, k, 2);
        let ga = act_a(&g, &a);
        // gamma
        assert_eq!(gamma(&ga, GammaMode::Coefficient), act_gamma(&g, k, &gamma(&a, GammaMode::Coefficient)));
        // beta(gA) = (M^T (x) P) beta(A) Q^-1 and epsilon(gA) = Q epsilon(A) (M (x) P^T)
        let left = Matrix::from_fn(4 * k, 4 * k, |r, c| g.m[(c / k, r / k)].clone() * g.p[(r % k, c % k)].clone());
        let qinv = g.q.inverse().unwrap();
        assert_eq!(beta_matrix(&ga), left.mul(&beta_matrix(&a)).mul(&qinv));
        assert_eq!(epsilon_matrix(&ga), g.q.mul(&epsilon_matrix(&a)).mul(&left.transpose()));
        // contragredient action on S makes xi and rho equivariant
        let minv = g.m.inverse().unwrap();
        let pinv_t = g.p.inverse().unwrap().transpose();
        let gs = act_s(&pinv_t, &minv, &s);
        let nc = Matrix::from_fn(4 * k, 4 * k, |r, c| minv[(r / k, c / k)].clone() * pinv_t[(r % k, c % k)].clone());
        assert_eq!(rho_matrix(&gs), nc.mul(&rho_matrix(&s)).mul(&nc.transpose()));
        let lhs = xi(&ga, &gs);
        let rhs = act_c(&minv, &g.p.inverse().unwrap().transpose(), &g.q, &xi(&a, &s));
        assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rk_s_is_even_and_flattenings_agree(seed in any::<u64>(), k in 2usize..=5) {
        let mut rng = seeded(seed);
        let s = random_s(&mut rng, k, 3);
        let r = rk_s(&s);
        let (sigma, sigma_hat) = flattenings(&s);
        prop_assert_eq!(r % 2, 0);
        prop_assert_eq!(r, sigma.rank());
        prop_assert_eq!(r, sigma_hat.rank());
    }

    #[test]
    fn gamma_modes_agree(seed in any::<u64>(), k in 1usize..=4) {
        let mut rng = seeded(seed);
        let a = random_a(&mut rng, k, 4);
        let c = q(GAMMA_MODE_CONSTANT);
        let forms: Vec<Rational> = gamma(&a, GammaMode::MatrixOfForms).into_iter().map(|x| x * c.clone()).collect();
        prop_assert_eq!(gamma(&a, GammaMode::Coefficient), forms);
    }
}
