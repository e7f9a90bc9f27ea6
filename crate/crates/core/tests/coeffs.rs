use betaseq::afamily::{a_inv_unchecked, Case};
use betaseq::coeffs::{coeff_quadrature, coeff_table, coeff_table_quadrature, db_dbeta_fd};
use betaseq::quad::{integrate, Basis, Tolerance};
use betaseq::AFunctionSpec64 as Spec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn nonnegative_cases() -> Vec<Spec> {
    vec![
        Spec::compact_const(1.0),
        Spec::compact_cos(),
        Spec::compact_linear(1.0),
        Spec::bessel_sym(1.0),
        Spec::exp_plain(1.0),
        Spec::exp_plain(0.01),
        Spec::riemann_theta(),
        Spec::ramanujan_tau(5),
    ]
}

/// b_k = (4/β)∫ A_I(y^{−2/β})(1 − y)^k dy over y = x^{−β/2} ∈ [e^{−βS/2}, 1].
fn y_form(spec: &Spec, k: usize, beta: f64) -> f64 {
    let y_min = (-beta * spec.log_support() / 2.0).exp();
    let f = |y: f64| a_inv_unchecked(spec, y.powf(-2.0 / beta)) * (1.0 - y).powi(k as i32);
    let tol = Tolerance::new(1e-12, Basis::Value);
    4.0 / beta * integrate(&f, y_min, 1.0, &tol).unwrap().value
}

#[test]
fn y_form_matches_table() {
    let cases = nonnegative_cases();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let spec = cases[rng.gen_range(0..cases.len())];
        let k = rng.gen_range(0..=50);
        let beta = rng.gen_range(0.05..10.0);
        let table = coeff_table_quadrature(&spec, k, beta, false).unwrap();
        let want = y_form(&spec, k, beta);
        assert!((table.b[k] - want).abs() <= 1e-9 * want.abs(), "{:?} k={k} beta={beta}: {} vs {want}", spec.case, table.b[k]);
    }
}

#[test]
fn exponential_b0_against_exponential_integral() {
    // 2∫₁^∞ e^{−x} x^{−2} dx = 2(e^{−1} − E_1(1))
    let e1 = 0.219_383_934_395_520_3;
    let want = 2.0 * ((-1.0f64).exp() - e1);
    let got = coeff_quadrature(&Spec::exp_plain(1.0), 0, 2.0).unwrap();
    assert!((got - want).abs() <= 1e-9 * want, "{got} {want}");
}

#[test]
fn positive_and_strictly_decreasing() {
    for spec in nonnegative_cases() {
        for beta in [0.1, 1.0, 5.0] {
            let t = coeff_table(&spec, 40, beta, false).unwrap();
            assert!(t.b[0] > 0.0, "{:?}", spec.case);
            assert!(t.b.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0), "{:?} beta={beta}", spec.case);
        }
    }
    let d = coeff_table(&Spec::dirichlet_five(5), 40, 2.0, true).unwrap();
    assert!(d.b.iter().chain(d.db_dbeta.as_ref().unwrap()).all(|v| v.is_finite()));
}

#[test]
fn derivative_column_matches_finite_difference() {
    let spec = Spec::riemann_theta();
    let t = coeff_table(&spec, 20, 3.0, true).unwrap();
    let fd = db_dbeta_fd(&spec, 20, 3.0).unwrap();
    for (k, (a, b)) in t.db_dbeta.unwrap().iter().zip(&fd).enumerate() {
        assert!((a - b).abs() <= 1e-6 * a.abs(), "k={k}: {a} {b}");
    }
}

fn b3(spec: &Spec, betas: &[f64]) -> Vec<f64> {
    betas.iter().map(|&beta| coeff_table(spec, 3, beta, false).unwrap().b[3]).collect()
}

#[test]
fn large_beta_shrinks_coefficients() {
    let b = b3(&Spec::compact_const(1.0), &[1.0, 10.0, 100.0]);
    assert!(b[1] < b[0] && b[2] < b[1], "{b:?}");
    // Decaying kernels grow first: (1 − e^{−βs/2})³ is small at small β.
    for spec in [Spec::bessel_sym(1.0), Spec::riemann_theta()] {
        let b = b3(&spec, &[10.0, 100.0, 1000.0]);
        assert!(b[1] < b[0] && b[2] < b[1], "{:?} {b:?}", spec.case);
    }
}

#[test]
fn large_degree_table_is_accurate() {
    // The geometric ratio of the closed form holds through quadrature at high k.
    let spec = Spec::compact_const(1.0);
    let t = coeff_table_quadrature(&spec, 1500, 1.0, false).unwrap();
    let q = 1.0 - (-1.0f64).exp();
    for k in [500, 1000, 1499] {
        let r = t.b[k + 1] / t.b[k];
        assert!((r - q * (k + 1) as f64 / (k + 2) as f64).abs() <= 1e-8, "k={k}");
    }
    assert_eq!(t.spec.case, Case::CompactConst);
}
