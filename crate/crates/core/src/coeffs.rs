//! Expansion coefficients b_k(β) = 2∫₁^∞ A_I(x) x^{−1−β/2}(1 − x^{−β/2})^k dx.
//!
//! Quadrature runs in s = log x, where the integrand 2A_I(e^s)·z(1 − z)^k
//! with z = e^{−βs/2} is smooth for every k. All degrees (and their
//! β-derivatives) share one adaptive pass.

use crate::afamily::{a_inv_unchecked, AFunctionSpec, Case};
use crate::error::{Error, Result};
use crate::quad::{self, Basis, Tolerance};
use crate::scalar::Real;

pub const COEFF_REL_TOL: f64 = 1e-10;
const INITIAL_PANELS: usize = 16;
const MAX_PANELS: usize = 3000;

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable<F = f64> {
    pub spec: AFunctionSpec<F>,
    pub beta: F,
    pub n: usize,
    pub b: Vec<F>,
    pub db_dbeta: Option<Vec<F>>,
    /// Achieved relative error bound over the b column (0 for closed forms).
    pub tol: F,
}

/// (4/(β(k+1)))·(1 − e^{−wβ})^{k+1}.
pub fn coeff_closed_const<F: Real>(k: usize, beta: F, w: F) -> F {
    let q = -(-w * beta).exp_m1();
    let k1 = F::idx(k + 1);
    F::lit(4.0) / (beta * k1) * q.powi((k + 1) as i32)
}

/// β-derivative of [`coeff_closed_const`].
pub fn coeff_closed_const_dbeta<F: Real>(k: usize, beta: F, w: F) -> F {
    let four = F::lit(4.0);
    let q = -(-w * beta).exp_m1();
    let k1 = F::idx(k + 1);
    -four / (beta * beta * k1) * q.powi((k + 1) as i32) + four / beta * q.powi(k as i32) * w * (-w * beta).exp()
}

fn check_beta<F: Real>(beta: F) -> Result<()> {
    if beta > F::zero() && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::Usage(format!("beta must be positive and finite, got {beta}")))
    }
}

/// b_k(β) by scalar adaptive quadrature at relative tolerance 1e-10.
pub fn coeff_quadrature<F: Real>(spec: &AFunctionSpec<F>, k: usize, beta: F) -> Result<F> {
    spec.validate()?;
    check_beta(beta)?;
    let half_beta = beta / F::lit(2.0);
    let two = F::lit(2.0);
    let f = |s: F| {
        let z = (-half_beta * s).exp();
        let y = -(-half_beta * s).exp_m1();
        two * a_inv_unchecked(spec, s.exp()) * z * y.powi(k as i32)
    };
    let mut tol = Tolerance::new(F::lit(COEFF_REL_TOL), Basis::Value);
    tol.abs = F::lit(1e-300).max(F::min_positive_value());
    let est = quad::integrate(&f, F::zero(), spec.log_support(), &tol).map_err(|e| relabel(e, k))?;
    Ok(est.value)
}

fn relabel(e: Error, k: usize) -> Error {
    match e {
        Error::Quadrature {
            estimate, error, bound, ..
        } => Error::Quadrature {
            component: k,
            estimate,
            error,
            bound,
        },
        other => other,
    }
}

/// b_0…b_n at β, closed form for CompactConst and quadrature otherwise.
pub fn coeff_table<F: Real>(spec: &AFunctionSpec<F>, n: usize, beta: F, with_derivatives: bool) -> Result<CoefficientTable<F>> {
    spec.validate()?;
    check_beta(beta)?;
    if spec.case == Case::CompactConst {
        let b = (0..=n).map(|k| coeff_closed_const(k, beta, spec.w)).collect();
        let db = with_derivatives.then(|| (0..=n).map(|k| coeff_closed_const_dbeta(k, beta, spec.w)).collect());
        return Ok(CoefficientTable {
            spec: *spec,
            beta,
            n,
            b,
            db_dbeta: db,
            tol: F::zero(),
        });
    }
    coeff_table_quadrature(spec, n, beta, with_derivatives)
}

/// As [`coeff_table`] but always by quadrature.
pub fn coeff_table_quadrature<F: Real>(
    spec: &AFunctionSpec<F>,
    n: usize,
    beta: F,
    with_derivatives: bool,
) -> Result<CoefficientTable<F>> {
    spec.validate()?;
    check_beta(beta)?;
    let m = n + 1;
    let dim = if with_derivatives { 2 * m } else { m };
    let half_beta = beta / F::lit(2.0);
    let two = F::lit(2.0);
    let f = |s: F, out: &mut [F]| {
        let a = two * a_inv_unchecked(spec, s.exp());
        let z = (-half_beta * s).exp();
        let y = -(-half_beta * s).exp_m1();
        let az = a * z;
        let mut pw = F::one();
        let mut prev = F::zero();
        let ds = -s / two;
        for k in 0..m {
            out[k] = az * pw;
            if with_derivatives {
                out[m + k] = az * ds * (pw - F::idx(k) * z * prev);
            }
            prev = pw;
            pw = pw * y;
        }
    };
    let mut basis = vec![Basis::Value; m];
    if with_derivatives {
        basis.extend(std::iter::repeat(Basis::L1).take(m));
    }
    let est = quad::integrate_vec(
        &f,
        dim,
        F::zero(),
        spec.log_support(),
        INITIAL_PANELS,
        F::lit(COEFF_REL_TOL),
        F::lit(1e-300).max(F::min_positive_value()),
        &basis,
        MAX_PANELS,
    )
    .map_err(|e| match e {
        Error::Quadrature { component, .. } => relabel(e, component % m),
        other => other,
    })?;
    let tol = (0..m).fold(F::zero(), |t, k| {
        if est.value[k] != F::zero() {
            t.max(est.error[k] / est.value[k].abs())
        } else {
            t
        }
    });
    let mut value = est.value;
    let db = with_derivatives.then(|| value.split_off(m));
    Ok(CoefficientTable {
        spec: *spec,
        beta,
        n,
        b: value,
        db_dbeta: db,
        tol,
    })
}

/// Central finite difference of the b column in β, step 1e-6·max(β, 1).
pub fn db_dbeta_fd<F: Real>(spec: &AFunctionSpec<F>, n: usize, beta: F) -> Result<Vec<F>> {
    let h = F::lit(1e-6) * beta.max(F::one());
    let hi = coeff_table(spec, n, beta + h, false)?;
    let lo = coeff_table(spec, n, beta - h, false)?;
    Ok(hi.b.iter().zip(&lo.b).map(|(p, m)| (*p - *m) / (F::lit(2.0) * h)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    type Spec = AFunctionSpec<f64>;

    #[test]
    fn closed_form_values() {
        let b0 = coeff_closed_const(0, 1.0, 1.0);
        assert!((b0 - 4.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((b0 - 2.5285).abs() < 1e-4);
        let b3 = coeff_closed_const(3, 2.0, 1.0);
        assert!((b3 - 0.5 * (1.0 - (-2.0f64).exp()).powi(4)).abs() < 1e-15);
        assert!((b3 - 0.2795).abs() < 1e-4);
        let r = coeff_closed_const(501, 1.0, 1.0) / coeff_closed_const(500, 1.0, 1.0);
        assert!((r - (1.0 - (-1.0f64).exp()) * 501.0 / 502.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let s = Spec::compact_const(1.0);
        let q = coeff_quadrature(&s, 5, 1.5).unwrap();
        let c = coeff_closed_const(5, 1.5, 1.0);
        assert!((q - c).abs() <= 1e-9 * c);
        let t = coeff_table_quadrature(&s, 40, 0.8, true).unwrap();
        for k in 0..=40 {
            let c = coeff_closed_const(k, 0.8, 1.0);
            let d = coeff_closed_const_dbeta(k, 0.8, 1.0);
            assert!((t.b[k] - c).abs() <= 1e-9 * c, "k={k}");
            let dq = t.db_dbeta.as_ref().unwrap()[k];
            assert!((dq - d).abs() <= 1e-7 * d.abs().max(1e-300), "k={k}");
        }
    }

    #[test]
    fn table_shape_and_monotonicity() {
        let t = coeff_table(&Spec::compact_const(1.0), 10, 1.0, false).unwrap();
        assert_eq!(t.b.len(), 11);
        assert!(t.db_dbeta.is_none());
        assert!(t.b.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
    }

    #[test]
    fn single_precision_closed_form() {
        let c = coeff_closed_const(3, 2.0f32, 1.0f32);
        assert!((c - 0.2795).abs() < 1e-4);
    }
}
