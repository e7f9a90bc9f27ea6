use betaseq::approximant::{all_roots, eval_approximant, extract_poly, is_real_nonneg, real_roots_only, t_roots};
use betaseq::coeffs::coeff_table;
use betaseq::minseq::{seed, SolverConfig};
use betaseq::AFunctionSpec64 as Spec;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cc() -> Spec {
    Spec::compact_const(1.0)
}

proptest! {
    #[test]
    fn even_in_t(n in 0usize..80, t in 0.0f64..20.0, beta in 0.05f64..6.0) {
        let table = coeff_table(&cc(), n, beta, false).unwrap();
        let a = eval_approximant(&table, n, t).unwrap().value;
        let b = eval_approximant(&table, n, -t).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}

#[test]
fn converges_to_limit_at_fixed_beta() {
    let table = coeff_table(&cc(), 200, 2.0, false).unwrap();
    let v = eval_approximant(&table, 200, 1.0).unwrap().value;
    assert!((v - 4.0 * 1f64.sin()).abs() < 1e-6, "{v}");
    let sup = |n: usize| {
        (0..=200)
            .map(|i| {
                let t = i as f64 * 0.05;
                let limit = if t == 0.0 { 4.0 } else { 4.0 * t.sin() / t };
                (eval_approximant(&table, n, t).unwrap().value - limit).abs()
            })
            .fold(0.0, f64::max)
    };
    let errs: Vec<f64> = [25, 50, 100, 200].into_iter().map(sup).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for spec in [cc(), Spec::bessel_sym(1.0)] {
        for _ in 0..20 {
            let n = rng.gen_range(4..40);
            let beta: f64 = rng.gen_range(0.3..4.0);
            let t: f64 = rng.gen_range(0.5..10.0);
            let table = coeff_table(&spec, n, beta, true).unwrap();
            let e = eval_approximant(&table, n, t).unwrap();
            let h = 1e-4 * t;
            let at = |t: f64| eval_approximant(&table, n, t).unwrap();
            let (p, m) = (at(t + h), at(t - h));
            let d = (p.value - m.value) / (2.0 * h);
            let dd = (p.d_t - m.d_t) / (2.0 * h);
            assert!((d - e.d_t).abs() <= 1e-6 * e.scale_df, "n={n} beta={beta} t={t}");
            assert!((dd - e.d_tt).abs() <= 1e-6 * (e.scale_df + e.d_tt.abs()), "n={n} beta={beta} t={t}");
            let hb = 1e-5 * beta;
            let tb = |b: f64| eval_approximant(&coeff_table(&spec, n, b, false).unwrap(), n, t).unwrap();
            let (bp, bm) = (tb(beta + hb), tb(beta - hb));
            let db = (bp.value - bm.value) / (2.0 * hb);
            let dtb = (bp.d_t - bm.d_t) / (2.0 * hb);
            assert!((db - e.d_beta.unwrap()).abs() <= 1e-6 * (e.scale_f / beta), "n={n} beta={beta} t={t}");
            assert!((dtb - e.d_t_beta.unwrap()).abs() <= 1e-6 * (e.scale_df / beta), "n={n} beta={beta} t={t}");
        }
    }
}

#[test]
fn beta_derivative_at_degree_ten() {
    let at = |b: f64| eval_approximant(&coeff_table(&cc(), 10, b, true).unwrap(), 10, 2.0).unwrap();
    let h = 1e-5;
    let fd = (at(1.0 + h).value - at(1.0 - h).value) / (2.0 * h);
    let d = at(1.0).d_beta.unwrap();
    assert!((fd - d).abs() <= 1e-6 * d.abs(), "{fd} {d}");
}

#[test]
fn polynomial_matches_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for spec in [cc(), Spec::riemann_theta()] {
        let table = coeff_table(&spec, 12, 1.7, false).unwrap();
        let poly = extract_poly(&table, 12).unwrap();
        assert_eq!(poly.degree(), 6);
        for _ in 0..20 {
            let t: f64 = rng.gen_range(0.0..8.0);
            let e = eval_approximant(&table, 12, t).unwrap();
            assert!((poly.eval(t * t) - e.value).abs() <= 1e-10 * e.scale_f, "t={t}");
        }
    }
}

#[test]
fn coefficients_alternate_in_sign() {
    for spec in [cc(), Spec::compact_linear(1.0), Spec::bessel_sym(1.0), Spec::exp_plain(1.0), Spec::riemann_theta()] {
        for n in [5, 20, 40] {
            let poly = extract_poly(&coeff_table(&spec, n, 1.3, false).unwrap(), n).unwrap();
            for (l, c) in poly.coeffs.iter().enumerate() {
                assert_eq!(*c > 0.0, l % 2 == 0, "{:?} n={n} l={l}", spec.case);
            }
        }
    }
}

#[test]
fn degree_one_is_root_free() {
    for spec in [cc(), Spec::bessel_sym(1.0), Spec::dirichlet_five(5)] {
        assert!(real_roots_only(&coeff_table(&spec, 1, 0.8, false).unwrap(), 1).unwrap());
    }
}

#[test]
fn near_double_root_after_first_jump() {
    let p = seed(&cc(), 6, &SolverConfig::default()).unwrap();
    assert!((p.beta - 0.126).abs() < 0.005, "{p:?}");
    let table = coeff_table(&cc(), 6, p.beta * (1.0 + 1e-6), false).unwrap();
    let us = all_roots(&extract_poly(&table, 6).unwrap()).unwrap();
    assert!(us.iter().all(|u| is_real_nonneg(*u)));
    let mut ts: Vec<f64> = t_roots(&us).iter().map(|z| z.re).filter(|t| *t > 0.0).collect();
    ts.sort_by(f64::total_cmp);
    let (gap, mid) = ts
        .windows(2)
        .map(|w| (w[1] - w[0], 0.5 * (w[0] + w[1])))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    assert!(gap < 0.05, "{ts:?}");
    assert!((5.13..=5.19).contains(&mid), "{mid}");
}
