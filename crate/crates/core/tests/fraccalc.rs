use fracpinn::fraccalc::*;
use proptest::prelude::*;

fn order(a: f64) -> FracOrder {
    FracOrder::new(a).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// L1 value of f(t) = t² at t = 1 with step 1/n.
fn l1_square_at_one(alpha: f64, n: usize) -> f64 {
    let dt = 1.0 / n as f64;
    let samples: Vec<f64> = (0..=n).map(|k| (k as f64 * dt).powi(2)).collect();
    let st = L1Stencil::new(order(alpha), dt, n - 1).unwrap();
    caputo_l1(&samples, &st).unwrap()
}

fn square_exact(alpha: f64) -> f64 {
    2.0 / gamma_fn(3.0 - alpha).unwrap()
}

#[test]
fn gamma_examples() {
    assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
    assert!(rel(gamma_fn(0.5).unwrap(), std::f64::consts::PI.sqrt()) < 1e-14);
    assert!(rel(gamma_fn(1.4).unwrap(), 0.887263817503075) < 1e-12);
}

#[test]
fn square_converges_at_order_two_minus_alpha() {
    for alpha in [0.3, 0.5, 0.8] {
        let exact = square_exact(alpha);
        let errs: Vec<f64> = [32, 64, 128].iter().map(|&n| (l1_square_at_one(alpha, n) - exact).abs()).collect();
        for w in errs.windows(2) {
            let p = (w[0] / w[1]).log2();
            assert!((p - (2.0 - alpha)).abs() <= 0.25, "alpha {alpha}: order {p}");
        }
        assert!(rel(l1_square_at_one(alpha, 256), exact) < 0.01);
    }
}

#[test]
fn monomial_example() {
    let samples: Vec<f64> = (0..=64).map(|k| k as f64 / 64.0).collect();
    let st = L1Stencil::new(order(0.5), 1.0 / 64.0, 63).unwrap();
    // linear data is integrated exactly by the piecewise-linear scheme; 1/Γ(3/2) = 2/√π
    assert!(rel(caputo_l1(&samples, &st).unwrap(), std::f64::consts::FRAC_2_SQRT_PI) < 1e-12);
}

#[test]
fn mittag_leffler_examples() {
    let half = MittagLefflerOrder::new(0.5).unwrap();
    assert_eq!(mittag_leffler(half, 0.0).unwrap(), 1.0);
    assert!((mittag_leffler(half, -1.0).unwrap() - 0.4275836).abs() < 1e-6);
    let one = MittagLefflerOrder::new(1.0).unwrap();
    assert!(rel(mittag_leffler(one, 1.3).unwrap(), 1.3f64.exp()) < 1e-12);
    assert!(rel(relaxation_modulus(3.0, 2.0, one, 2.0).unwrap(), 1.5 * (-1.0f64).exp()) < 1e-12);
    assert!((relaxation_modulus(2.0, 1.0, half, 1.0).unwrap() - 0.8551672).abs() < 1e-6);
}

proptest! {
    #[test]
    fn coefficients_are_monotone(alpha in 0.0f64..=1.0, k in 0usize..400) {
        let b = l1_coefficients(order(alpha), k);
        prop_assert_eq!(b[0], 1.0);
        for w in b.windows(2) {
            prop_assert!(w[0] >= w[1] && w[1] >= 0.0);
        }
    }

    #[test]
    fn endpoint_coefficients(k in 0usize..50) {
        prop_assert!(l1_coefficients(order(1.0), k)[1..].iter().all(|&b| b == 0.0));
        prop_assert!(l1_coefficients(order(0.0), k).iter().all(|&b| b == 1.0));
    }

    #[test]
    fn telescoping_at_order_zero(samples in prop::collection::vec(-1e3f64..1e3, 2..60), dt in 1e-3f64..10.0) {
        let st = L1Stencil::new(order(0.0), dt, samples.len() - 2).unwrap();
        let want = samples[samples.len() - 1] - samples[0];
        let got = caputo_l1(&samples, &st).unwrap();
        prop_assert!((got - want).abs() <= 1e-13 * want.abs().max(1e-300) || got == want, "{} vs {}", got, want);
    }

    #[test]
    fn backward_difference_at_order_one(samples in prop::collection::vec(-1e3f64..1e3, 2..60), dt in 1e-3f64..10.0) {
        let n = samples.len();
        let st = L1Stencil::new(order(1.0), dt, n - 2).unwrap();
        let want = (samples[n - 1] - samples[n - 2]) / dt;
        let got = caputo_l1(&samples, &st).unwrap();
        prop_assert!((got - want).abs() <= 1e-13 * want.abs().max(1e-300) || got == want, "{} vs {}", got, want);
    }

    #[test]
    fn history_and_increment_forms_agree(
        alpha in 0.0f64..=1.0,
        samples in prop::collection::vec(-10.0f64..10.0, 2..80),
        dt in 1e-3f64..1.0,
    ) {
        let k = samples.len() - 2;
        let st = L1Stencil::new(order(alpha), dt, k).unwrap();
        let a = caputo_l1(&samples, &st).unwrap();
        let b = caputo_l1_increments(&samples, &st).unwrap();
        let scale = st.prefactor() * samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!((a - b).abs() <= 1e-13 * scale.max(a.abs()), "{} vs {}", a, b);
        let h = history_term(&samples[..=k], st.coeffs()).unwrap();
        let split = st.prefactor() * (samples[k + 1] - h);
        prop_assert!((a - split).abs() <= 1e-13 * scale.max(a.abs()));
    }

    #[test]
    fn relaxation_modulus_decreases(
        kappa in 0.1f64..10.0,
        eta in 0.1f64..10.0,
        nu in 0.05f64..=1.0,
        mut ts in prop::collection::vec(0.0f64..20.0, 2..30),
    ) {
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let nu = MittagLefflerOrder::new(nu).unwrap();
        let g: Vec<f64> = ts.iter().map(|&t| relaxation_modulus(kappa, eta, nu, t).unwrap()).collect();
        for (w, t) in g.windows(2).zip(ts.windows(2)) {
            // values that agree to round-off cannot be ordered
            prop_assert!(w[1] < w[0] || (t[1] - t[0]) < 1e-9, "G({}) = {} not below G({}) = {}", t[1], w[1], t[0], w[0]);
        }
    }
}
