//! Pochhammer polynomials P_k(s) = ∏_{j≤k}(1 − s/j) on the imaginary axis.
//!
//! P_k(iu) = P_k^+(u) + i·P_k^−(u), with P^+ even and P^− odd in u.

use crate::scalar::Real;
use num_complex::Complex;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PochhammerEval<F = f64> {
    pub k: usize,
    pub u: F,
    pub p_plus: F,
    pub p_minus: F,
    pub dp_plus: F,
    pub ddp_plus: F,
    pub dp_minus: F,
    pub ddp_minus: F,
}

/// Iterator over degrees 0, 1, 2, … at a fixed u, carrying first and second
/// u-derivatives through the recursion.
#[derive(Clone, Debug)]
pub struct Sweep<F> {
    cur: PochhammerEval<F>,
}

pub fn sweep<F: Real>(u: F) -> Sweep<F> {
    Sweep {
        cur: PochhammerEval {
            k: 0,
            u,
            p_plus: F::one(),
            p_minus: F::zero(),
            dp_plus: F::zero(),
            ddp_plus: F::zero(),
            dp_minus: F::zero(),
            ddp_minus: F::zero(),
        },
    }
}

impl<F: Real> Sweep<F> {
    pub fn current(&self) -> &PochhammerEval<F> {
        &self.cur
    }

    /// Moves to the next degree.
    #[inline]
    pub fn step(&mut self) {
        let c = self.cur;
        let j = c.k + 1;
        let inv = F::idx(j).recip();
        let q = c.u * inv;
        let two = F::lit(2.0);
        self.cur = PochhammerEval {
            k: j,
            u: c.u,
            p_plus: c.p_plus + q * c.p_minus,
            p_minus: c.p_minus - q * c.p_plus,
            dp_plus: c.dp_plus + inv * c.p_minus + q * c.dp_minus,
            dp_minus: c.dp_minus - inv * c.p_plus - q * c.dp_plus,
            ddp_plus: c.ddp_plus + two * inv * c.dp_minus + q * c.ddp_minus,
            ddp_minus: c.ddp_minus - two * inv * c.dp_plus - q * c.ddp_plus,
        };
    }
}

impl<F: Real> Iterator for Sweep<F> {
    type Item = PochhammerEval<F>;

    fn next(&mut self) -> Option<Self::Item> {
        let out = self.cur;
        self.step();
        Some(out)
    }
}

/// P_k^± and derivatives at u by the coupled recursion, O(k).
pub fn eval_pair<F: Real>(k: usize, u: F) -> PochhammerEval<F> {
    let mut s = sweep(u);
    for _ in 0..k {
        s.step();
    }
    s.cur
}

/// r(u) = |Γ(1 − iu)| = √(πu / sinh πu), evaluated in logarithmic form.
pub fn envelope_r<F: Real>(u: F) -> F {
    let x = F::PI() * u.abs();
    if x == F::zero() {
        return F::one();
    }
    let two = F::lit(2.0);
    // log sinh x = x + log((1 − e^{−2x})/2)
    let log_sinh = x + (-(-two * x).exp()).ln_1p() - two.ln();
    ((x.ln() - log_sinh) / two).exp()
}

/// φ(u) = Arg Γ(1 − iu). Linear γu for |u| ≤ 0.1, otherwise Stirling's
/// series after shifting the argument by 16.
pub fn phase_phi<F: Real>(u: F) -> F {
    if u.abs() <= F::lit(0.1) {
        return F::lit(EULER_GAMMA) * u;
    }
    const SHIFT: usize = 16;
    let one = F::one();
    let mut acc = F::zero();
    for m in 0..SHIFT {
        // Im log(1 + m − iu)
        acc = acc + (-u).atan2(one + F::idx(m));
    }
    let w = Complex::new(F::idx(SHIFT + 1), -u);
    let half = F::lit(0.5);
    let inv = w.inv();
    let inv2 = inv * inv;
    let series = inv
        * (Complex::from(F::lit(1.0 / 12.0))
            - inv2 * (Complex::from(F::lit(1.0 / 360.0)) - inv2 * (Complex::from(F::lit(1.0 / 1260.0)) - inv2 * F::lit(1.0 / 1680.0))));
    let stirling = (w - half) * w.ln() - w + series;
    stirling.im - acc
}

/// Large-degree form cos(u log k + φ(u)) / r(u).
pub fn eval_asymptotic<F: Real>(k: usize, u: F) -> F {
    if u == F::zero() {
        return F::one();
    }
    (u * F::idx(k.max(1)).ln() + phase_phi(u)).cos() / envelope_r(u)
}
