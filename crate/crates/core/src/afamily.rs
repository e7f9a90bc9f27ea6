//! Kernel catalog A_I(x) and the limit function Ξ(t) = 4∫₀^∞ A_I(e^{2y}) cos(ty) dy.

use crate::error::{Error, Result};
use crate::quad::{self, Basis};
use crate::scalar::Real;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    CompactConst,
    CompactCos,
    CompactLinear,
    BesselSym,
    ExpPlain,
    RiemannTheta,
    RamanujanTau,
    DirichletFive,
}

impl Case {
    pub const ALL: [Case; 8] = [
        Case::CompactConst,
        Case::CompactCos,
        Case::CompactLinear,
        Case::BesselSym,
        Case::ExpPlain,
        Case::RiemannTheta,
        Case::RamanujanTau,
        Case::DirichletFive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Case::CompactConst => "compact_const",
            Case::CompactCos => "compact_cos",
            Case::CompactLinear => "compact_linear",
            Case::BesselSym => "bessel_sym",
            Case::ExpPlain => "exp_plain",
            Case::RiemannTheta => "riemann_theta",
            Case::RamanujanTau => "ramanujan_tau",
            Case::DirichletFive => "dirichlet_five",
        }
    }

    pub fn from_name(s: &str) -> Option<Case> {
        Case::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn is_compact(self) -> bool {
        matches!(self, Case::CompactConst | Case::CompactCos | Case::CompactLinear)
    }

    /// Cases whose Ξ has complex zeros by construction.
    pub fn is_exceptional(self) -> bool {
        matches!(self, Case::RamanujanTau | Case::DirichletFive)
    }

    fn default_series_terms(self) -> usize {
        match self {
            Case::RiemannTheta => 5,
            Case::RamanujanTau => 10,
            Case::DirichletFive => 12,
            _ => 1,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One member of the kernel family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AFunctionSpec<F = f64> {
    pub case: Case,
    /// Half log-width of the support (compact cases).
    pub w: F,
    /// Decay rate (BesselSym, ExpPlain).
    pub a: F,
    /// Exponent (RamanujanTau) or multiplier (DirichletFive).
    pub k: u32,
    pub series_terms: usize,
    pub x_cutoff_rel: F,
}

const X_GUARD: f64 = 1.0e4;
const CUTOFF_STEP: f64 = 0.02;

impl<F: Real> AFunctionSpec<F> {
    pub fn new(case: Case) -> Self {
        Self {
            case,
            w: F::one(),
            a: F::one(),
            k: 5,
            series_terms: case.default_series_terms(),
            x_cutoff_rel: F::lit(1e-18),
        }
    }

    pub fn compact_const(w: F) -> Self {
        Self { w, ..Self::new(Case::CompactConst) }
    }
    pub fn compact_cos() -> Self {
        Self::new(Case::CompactCos)
    }
    pub fn compact_linear(w: F) -> Self {
        Self { w, ..Self::new(Case::CompactLinear) }
    }
    pub fn bessel_sym(a: F) -> Self {
        Self { a, ..Self::new(Case::BesselSym) }
    }
    pub fn exp_plain(a: F) -> Self {
        Self { a, ..Self::new(Case::ExpPlain) }
    }
    pub fn riemann_theta() -> Self {
        Self::new(Case::RiemannTheta)
    }
    pub fn ramanujan_tau(k: u32) -> Self {
        Self { k, ..Self::new(Case::RamanujanTau) }
    }
    pub fn dirichlet_five(k: u32) -> Self {
        Self { k, ..Self::new(Case::DirichletFive) }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("{}: {m}", self.case)));
        if self.series_terms < 1 {
            return bad("series_terms must be >= 1".into());
        }
        if !(self.x_cutoff_rel > F::zero() && self.x_cutoff_rel < F::one()) {
            return bad(format!("x_cutoff_rel must lie in (0, 1), got {}", self.x_cutoff_rel));
        }
        match self.case {
            Case::CompactConst | Case::CompactLinear => {
                if !(self.w > F::zero() && self.w.is_finite()) {
                    return bad(format!("w must be positive, got {}", self.w));
                }
            }
            Case::CompactCos => {
                if self.w != F::one() {
                    return bad(format!("only w = 1 is defined, got {}", self.w));
                }
            }
            Case::BesselSym | Case::ExpPlain => {
                if !(self.a > F::zero() && self.a.is_finite()) {
                    return bad(format!("a must be positive, got {}", self.a));
                }
            }
            Case::RiemannTheta => {}
            Case::RamanujanTau => {
                if self.k == 0 || [1, 2, 3, 4, 6, 8, 12, 24].contains(&self.k) {
                    return bad(format!("k must be a positive integer outside {{1,2,3,4,6,8,12,24}}, got {}", self.k));
                }
            }
            Case::DirichletFive => {
                if self.k < 4 {
                    return bad(format!("k must be >= 4, got {}", self.k));
                }
            }
        }
        let a1 = kernel(self, F::one());
        if !a1.is_finite() || (!self.case.is_exceptional() && a1 <= F::zero()) {
            return bad(format!("A_I(1) = {a1} is not admissible"));
        }
        Ok(())
    }

    /// Upper end of the support in s = log x.
    pub fn log_support(&self) -> F {
        if self.case.is_compact() {
            return F::lit(2.0) * self.w;
        }
        let guard = F::lit(X_GUARD).ln();
        let step = F::lit(CUTOFF_STEP);
        let threshold = self.x_cutoff_rel * kernel(self, F::one()).abs();
        let mut s = F::zero();
        let mut below = 0;
        loop {
            s = s + step;
            if s >= guard {
                return guard;
            }
            if kernel(self, s.exp()).abs() < threshold {
                below += 1;
                if below == 2 {
                    return s;
                }
            } else {
                below = 0;
            }
        }
    }
}

/// Period-5 quadratic character.
pub fn chi5(n: usize) -> i32 {
    match n % 5 {
        1 | 4 => 1,
        2 | 3 => -1,
        _ => 0,
    }
}

/// Theta-series A(x) = Σ_m (2m⁴π²x − 3m²π) x^{1/2} e^{−m²πx}, valid for any x > 0.
pub fn riemann_a<F: Real>(x: F, terms: usize) -> F {
    let pi = F::PI();
    let mut acc = crate::sum::Neumaier::new();
    for m in 1..=terms {
        let m2 = F::idx(m * m);
        let term = (F::lit(2.0) * m2 * m2 * pi * pi * x - F::lit(3.0) * m2 * pi) * x.sqrt() * (-m2 * pi * x).exp();
        acc.add(term);
    }
    acc.value()
}

fn kernel<F: Real>(spec: &AFunctionSpec<F>, x: F) -> F {
    let pi = F::PI();
    let two = F::lit(2.0);
    let s_top = two * spec.w;
    match spec.case {
        Case::CompactConst => {
            if x.ln() <= s_top {
                F::one()
            } else {
                F::zero()
            }
        }
        Case::CompactCos => {
            let s = x.ln();
            if s <= s_top {
                (s * pi / F::lit(4.0)).cos()
            } else {
                F::zero()
            }
        }
        Case::CompactLinear => {
            let s = x.ln();
            if s <= s_top {
                F::one() - s / s_top
            } else {
                F::zero()
            }
        }
        Case::BesselSym => (-spec.a * (x + x.recip())).exp(),
        Case::ExpPlain => (-spec.a * x).exp(),
        Case::RiemannTheta => x.powf(F::lit(0.75)) * riemann_a(x, spec.series_terms),
        Case::RamanujanTau => {
            let r = x.sqrt();
            let mut base = x.powf(F::lit(0.125)) * (-pi * r / F::lit(12.0)).exp();
            for m in 1..=spec.series_terms {
                base = base * (F::one() - (-two * pi * F::idx(m) * r).exp());
            }
            base.powi(spec.k as i32)
        }
        Case::DirichletFive => {
            let k = F::idx(spec.k as usize);
            let five = F::lit(5.0);
            let x2 = x * x;
            let mut acc = crate::sum::Neumaier::new();
            for n in 1..=spec.series_terms {
                let n2 = F::idx(n * n);
                let q = pi * n2 * x2;
                let a21 = (F::lit(4.0) * q * q - F::lit(6.0) * q) * (-q).exp();
                let a22 = (F::lit(4.0) * q * q / F::lit(25.0) - F::lit(6.0) * q / five) * (-q / five).exp();
                acc.add(k * a21 + F::lit(chi5(n) as f64) * a22);
            }
            acc.value()
        }
    }
}

/// A_I(x) for x ≥ 1.
pub fn eval_a_inv<F: Real>(spec: &AFunctionSpec<F>, x: F) -> Result<F> {
    spec.validate()?;
    if !(x >= F::one()) {
        return Err(Error::Usage(format!("eval_a_inv needs x >= 1, got {x}")));
    }
    Ok(kernel(spec, x))
}

/// A_I(x) without validation, for inner loops over an already validated spec.
#[inline]
pub fn a_inv_unchecked<F: Real>(spec: &AFunctionSpec<F>, x: F) -> F {
    kernel(spec, x)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XiValue<F = f64> {
    pub t: F,
    pub value: F,
    /// dΞ/dt.
    pub dvalue: F,
    /// Ξ + tΞ'.
    pub star: F,
}

/// Relative tolerance (against ∫|integrand|) used for Ξ.
pub const XI_REL_TOL: f64 = 1e-13;

/// Ξ(t), Ξ'(t) and Ξ*(t) by adaptive quadrature of the cosine transform.
pub fn eval_xi<F: Real>(spec: &AFunctionSpec<F>, t: F) -> Result<XiValue<F>> {
    spec.validate()?;
    xi_unchecked(spec, spec.log_support() / F::lit(2.0), t)
}

fn xi_unchecked<F: Real>(spec: &AFunctionSpec<F>, y_max: F, t: F) -> Result<XiValue<F>> {
    let four = F::lit(4.0);
    let two = F::lit(2.0);
    let f = |y: F, out: &mut [F]| {
        let a = kernel(spec, (two * y).exp());
        let (s, c) = (t * y).sin_cos();
        out[0] = four * a * c;
        out[1] = -four * y * a * s;
    };
    let cycles = (t.abs() * y_max / (two * F::PI())).ceil().to_usize().unwrap_or(0);
    let initial = 4 + 2 * cycles.min(2000);
    let est = quad::integrate_vec(
        &f,
        2,
        F::zero(),
        y_max,
        initial,
        F::lit(XI_REL_TOL),
        F::lit(1e-300),
        &[Basis::L1, Basis::L1],
        20_000,
    )?;
    let (value, dvalue) = (est.value[0], est.value[1]);
    Ok(XiValue {
        t,
        value,
        dvalue,
        star: value + t * dvalue,
    })
}

pub const ZERO_SCAN_STEP: f64 = 0.05;

/// Sign changes of Ξ on (0, t_max], ascending.
///
/// Uniform scan then bisection to 1e-8. Tangential zeros are not detected.
pub fn xi_real_zeros<F: Real>(spec: &AFunctionSpec<F>, t_max: F) -> Result<Vec<F>> {
    xi_real_zeros_step(spec, t_max, F::lit(ZERO_SCAN_STEP))
}

pub fn xi_real_zeros_step<F: Real>(spec: &AFunctionSpec<F>, t_max: F, step: F) -> Result<Vec<F>> {
    spec.validate()?;
    if !(t_max > F::zero()) || !(step > F::zero()) {
        return Err(Error::Usage("xi_real_zeros needs t_max > 0 and step > 0".into()));
    }
    let y_max = spec.log_support() / F::lit(2.0);
    let n = (t_max / step).ceil().to_usize().unwrap_or(0);
    let grid: Vec<F> = (0..=n).map(|i| (step * F::idx(i)).min(t_max)).collect();
    let values = grid
        .par_iter()
        .map(|&t| xi_unchecked(spec, y_max, t).map(|v| v.value))
        .collect::<Result<Vec<F>>>()?;
    let mut zeros = Vec::new();
    for i in 1..grid.len() {
        let (fa, fb) = (values[i - 1], values[i]);
        if fb == F::zero() {
            zeros.push(grid[i]);
            continue;
        }
        if fa == F::zero() || fa.signum() == fb.signum() {
            continue;
        }
        let (mut lo, mut hi, mut flo) = (grid[i - 1], grid[i], fa);
        while hi - lo > F::lit(1e-8) {
            let mid = F::lit(0.5) * (lo + hi);
            let fm = xi_unchecked(spec, y_max, mid)?.value;
            if fm == F::zero() {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        zeros.push(F::lit(0.5) * (lo + hi));
    }
    Ok(zeros)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    type Spec = AFunctionSpec<f64>;

    #[test]
    fn compact_const_support() {
        let s = Spec::compact_const(1.0);
        assert_eq!(eval_a_inv(&s, 2.0).unwrap(), 1.0);
        assert_eq!(eval_a_inv(&s, E * E + 0.1).unwrap(), 0.0);
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(Spec::ramanujan_tau(12).validate().is_err());
        assert!(Spec::ramanujan_tau(5).validate().is_ok());
        assert!(Spec::dirichlet_five(3).validate().is_err());
        assert!(Spec::exp_plain(-1.0).validate().is_err());
        let mut cos = Spec::compact_cos();
        cos.w = 2.0;
        assert!(cos.validate().is_err());
        let mut r = Spec::riemann_theta();
        r.series_terms = 0;
        assert!(r.validate().is_err());
        assert!(eval_a_inv(&Spec::exp_plain(1.0), 0.5).is_err());
    }

    #[test]
    fn riemann_inversion_at_one_point_three() {
        let x: f64 = 1.3;
        let lhs = riemann_a(x, 12);
        let rhs = x.powf(-1.5) * riemann_a(1.0 / x, 12);
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
        let s = Spec::riemann_theta();
        let ai = eval_a_inv(&s, x).unwrap();
        assert!((ai - x.powf(0.75) * lhs).abs() <= 1e-14 * ai);
    }

    #[test]
    fn xi_at_sine_zero() {
        let v = eval_xi(&Spec::compact_const(1.0), PI).unwrap();
        assert!(v.value.abs() < 1e-12);
        assert!((v.dvalue - (-4.0 / PI)).abs() < 1e-12);
    }

    #[test]
    fn compact_cos_at_origin() {
        let v = eval_xi(&Spec::compact_cos(), 0.0).unwrap();
        assert!((v.value - 8.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn riemann_xi_at_origin_is_xi_one_half() {
        // ξ(1/2) = 0.4971207781883...
        let v = eval_xi(&Spec::riemann_theta(), 0.0).unwrap();
        assert!((v.value - 0.497_120_778_188_314).abs() < 1e-10, "{}", v.value);
    }

    #[test]
    fn support_cutoffs() {
        let e = Spec::exp_plain(0.01).log_support();
        // e^{-0.01 x} = 1e-18 e^{-0.01} near x ≈ 4145; the grid overshoots by at most two steps.
        assert!(e.exp() > 4145.0 && e.exp() < 4145.0 * (0.05f64).exp(), "{}", e.exp());
        let b = Spec::bessel_sym(1.0).log_support();
        assert!(b.exp() > 40.0 && b.exp() < 45.0);
        assert_eq!(Spec::compact_linear(0.5).log_support(), 1.0);
    }

    #[test]
    fn generic_in_single_precision() {
        let s = AFunctionSpec::<f32>::compact_const(1.0);
        assert_eq!(eval_a_inv(&s, 2.0f32).unwrap(), 1.0);
        assert!((riemann_a(1.3f32, 5) - riemann_a(1.3f64, 5) as f32).abs() < 1e-5);
    }
}
