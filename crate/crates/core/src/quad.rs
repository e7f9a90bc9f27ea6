//! Adaptive Gauss–Kronrod (G10/K21) quadrature, scalar and vector-valued.
//!
//! The vector form integrates many components that share one integration
//! variable; every component must meet its own tolerance and panels are
//! refined where any component is unresolved. Panel evaluation may run in
//! parallel, reductions are always in panel order, so results do not depend
//! on the worker count.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sum::Neumaier;
use rayon::prelude::*;

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208814748987,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// What the relative tolerance of a component is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// |∫f|, for integrands of one sign.
    Value,
    /// ∫|f|, for oscillatory integrands whose integral may vanish.
    L1,
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance<F> {
    pub rel: F,
    pub abs: F,
    pub basis: Basis,
    pub max_panels: usize,
}

impl<F: Real> Tolerance<F> {
    pub fn new(rel: F, basis: Basis) -> Self {
        Self {
            rel,
            abs: F::min_positive_value().max(F::lit(1e-300)),
            basis,
            max_panels: 4000,
        }
    }

    fn bound(&self, value: F, l1: F) -> F {
        let base = match self.basis {
            Basis::Value => value.abs(),
            Basis::L1 => l1,
        };
        self.abs.max(self.rel * base)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Estimate<F> {
    pub value: F,
    pub error: F,
    pub l1: F,
    pub panels: usize,
}

#[derive(Clone, Debug)]
pub struct VecEstimate<F> {
    pub value: Vec<F>,
    pub error: Vec<F>,
    pub l1: Vec<F>,
    pub panels: usize,
}

impl<F: Real> VecEstimate<F> {
    /// Largest error relative to |value| over all components.
    pub fn max_rel_error(&self) -> F {
        self.value
            .iter()
            .zip(&self.error)
            .fold(F::zero(), |m, (v, e)| {
                if *v == F::zero() {
                    m
                } else {
                    m.max(*e / v.abs())
                }
            })
    }
}

fn rescale<F: Real>(err: F, resabs: F, resasc: F) -> F {
    let mut e = err;
    if resasc != F::zero() && e != F::zero() {
        let s = (F::lit(200.0) * e / resasc).powf(F::lit(1.5));
        e = resasc * s.min(F::one());
    }
    let floor = F::min_positive_value() / (F::lit(50.0) * F::epsilon());
    if resabs > floor {
        e = e.max(F::lit(50.0) * F::epsilon() * resabs);
    }
    e
}

/// One G10/K21 panel: (integral, error estimate, ∫|f|).
pub fn gk21<F: Real, G: Fn(F) -> F>(f: &G, a: F, b: F) -> (F, F, F) {
    let half = F::lit(0.5);
    let c = half * (a + b);
    let h = half * (b - a);
    let fc = f(c);
    let mut fp = [F::zero(); 10];
    let mut fm = [F::zero(); 10];
    for j in 0..10 {
        let dx = h * F::lit(XGK[j]);
        fp[j] = f(c + dx);
        fm[j] = f(c - dx);
    }
    let mut resk = F::lit(WGK[10]) * fc;
    let mut resg = F::zero();
    let mut resabs = F::lit(WGK[10]) * fc.abs();
    for j in 0..10 {
        resk = resk + F::lit(WGK[j]) * (fp[j] + fm[j]);
        resabs = resabs + F::lit(WGK[j]) * (fp[j].abs() + fm[j].abs());
        if j % 2 == 1 {
            resg = resg + F::lit(WG[j / 2]) * (fp[j] + fm[j]);
        }
    }
    let mean = half * resk;
    let mut resasc = F::lit(WGK[10]) * (fc - mean).abs();
    for j in 0..10 {
        resasc = resasc + F::lit(WGK[j]) * ((fp[j] - mean).abs() + (fm[j] - mean).abs());
    }
    let ah = h.abs();
    let err = ((resk - resg) * h).abs();
    (resk * h, rescale(err, resabs * ah, resasc * ah), resabs * ah)
}

/// Globally adaptive integration of a scalar function on [a, b].
pub fn integrate<F: Real, G: Fn(F) -> F>(f: &G, a: F, b: F, tol: &Tolerance<F>) -> Result<Estimate<F>> {
    if a == b {
        return Ok(Estimate {
            value: F::zero(),
            error: F::zero(),
            l1: F::zero(),
            panels: 0,
        });
    }
    // (a, b, value, error, l1)
    let mut panels = vec![{
        let (v, e, l) = gk21(f, a, b);
        (a, b, v, e, l)
    }];
    let min_width = (b - a).abs() * F::lit(1e-13);
    loop {
        let value: F = panels.iter().map(|p| p.2).collect::<Neumaier<F>>().value();
        let error: F = panels.iter().map(|p| p.3).collect::<Neumaier<F>>().value();
        let l1: F = panels.iter().map(|p| p.4).collect::<Neumaier<F>>().value();
        let bound = tol.bound(value, l1);
        if error <= bound {
            return Ok(Estimate {
                value,
                error,
                l1,
                panels: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| (p.1 - p.0).abs() > min_width)
            .fold(None, |best: Option<(usize, F)>, (i, p)| match best {
                Some((_, e)) if e >= p.3 => best,
                _ => Some((i, p.3)),
            });
        let Some((i, _)) = worst.filter(|_| panels.len() < tol.max_panels) else {
            return Err(Error::Quadrature {
                component: 0,
                estimate: value.as_f64(),
                error: error.as_f64(),
                bound: bound.as_f64(),
            });
        };
        let (pa, pb, ..) = panels[i];
        let m = F::lit(0.5) * (pa + pb);
        let (v1, e1, l1a) = gk21(f, pa, m);
        let (v2, e2, l2a) = gk21(f, m, pb);
        panels[i] = (pa, m, v1, e1, l1a);
        panels.insert(i + 1, (m, pb, v2, e2, l2a));
    }
}

struct Panel<F> {
    a: F,
    b: F,
    value: Vec<F>,
    error: Vec<F>,
    l1: Vec<F>,
}

fn vec_panel<F: Real, G: Fn(F, &mut [F]) + Sync>(f: &G, dim: usize, a: F, b: F) -> Panel<F> {
    let half = F::lit(0.5);
    let c = half * (a + b);
    let h = half * (b - a);
    let ah = h.abs();
    // Row j of `vals` holds the components at node j: 0..10 are c+h·x_j,
    // 10..20 are c−h·x_j, 20 is the centre.
    let mut vals = vec![F::zero(); 21 * dim];
    for j in 0..10 {
        let dx = h * F::lit(XGK[j]);
        f(c + dx, &mut vals[j * dim..(j + 1) * dim]);
        f(c - dx, &mut vals[(10 + j) * dim..(11 + j) * dim]);
    }
    f(c, &mut vals[20 * dim..21 * dim]);

    let mut value = vec![F::zero(); dim];
    let mut error = vec![F::zero(); dim];
    let mut l1 = vec![F::zero(); dim];
    let wc = F::lit(WGK[10]);
    for k in 0..dim {
        let fc = vals[20 * dim + k];
        let mut resk = wc * fc;
        let mut resg = F::zero();
        let mut resabs = wc * fc.abs();
        for j in 0..10 {
            let (p, m) = (vals[j * dim + k], vals[(10 + j) * dim + k]);
            let w = F::lit(WGK[j]);
            resk = resk + w * (p + m);
            resabs = resabs + w * (p.abs() + m.abs());
            if j % 2 == 1 {
                resg = resg + F::lit(WG[j / 2]) * (p + m);
            }
        }
        let mean = half * resk;
        let mut resasc = wc * (fc - mean).abs();
        for j in 0..10 {
            let (p, m) = (vals[j * dim + k], vals[(10 + j) * dim + k]);
            resasc = resasc + F::lit(WGK[j]) * ((p - mean).abs() + (m - mean).abs());
        }
        value[k] = resk * h;
        error[k] = rescale(((resk - resg) * h).abs(), resabs * ah, resasc * ah);
        l1[k] = resabs * ah;
    }
    Panel { a, b, value, error, l1 }
}

/// Adaptive integration of a `dim`-component integrand on [a, b].
///
/// `f(x, out)` writes all components at `x`. `basis[k]` selects how the
/// relative tolerance of component `k` is measured. The interval is first
/// split into `initial` equal panels.
pub fn integrate_vec<F, G>(
    f: &G,
    dim: usize,
    a: F,
    b: F,
    initial: usize,
    rel: F,
    abs: F,
    basis: &[Basis],
    max_panels: usize,
) -> Result<VecEstimate<F>>
where
    F: Real,
    G: Fn(F, &mut [F]) + Sync,
{
    assert_eq!(basis.len(), dim, "one basis per component");
    let initial = initial.max(1);
    let width = (b - a) / F::idx(initial);
    let bounds: Vec<(F, F)> = (0..initial)
        .map(|i| {
            let lo = a + width * F::idx(i);
            let hi = if i + 1 == initial { b } else { a + width * F::idx(i + 1) };
            (lo, hi)
        })
        .collect();
    let mut panels: Vec<Panel<F>> = bounds.par_iter().map(|&(lo, hi)| vec_panel(f, dim, lo, hi)).collect();
    let min_width = (b - a).abs() * F::lit(1e-13);

    loop {
        let mut value = vec![F::zero(); dim];
        let mut error = vec![F::zero(); dim];
        let mut l1 = vec![F::zero(); dim];
        for k in 0..dim {
            let mut v = Neumaier::new();
            let mut e = Neumaier::new();
            let mut l = Neumaier::new();
            for p in &panels {
                v.add(p.value[k]);
                e.add(p.error[k]);
                l.add(p.l1[k]);
            }
            value[k] = v.value();
            error[k] = e.value();
            l1[k] = l.value();
        }
        let bound: Vec<F> = (0..dim)
            .map(|k| {
                let base = match basis[k] {
                    Basis::Value => value[k].abs(),
                    Basis::L1 => l1[k],
                };
                abs.max(rel * base)
            })
            .collect();
        let failing: Vec<usize> = (0..dim).filter(|&k| !(error[k] <= bound[k])).collect();
        if failing.is_empty() {
            return Ok(VecEstimate {
                value,
                error,
                l1,
                panels: panels.len(),
            });
        }

        let np = F::idx(panels.len());
        let mut mark = vec![false; panels.len()];
        for &k in &failing {
            let share = bound[k] / np;
            let mut worst: Option<(usize, F)> = None;
            for (i, p) in panels.iter().enumerate() {
                if (p.b - p.a).abs() <= min_width {
                    continue;
                }
                if p.error[k] > share {
                    mark[i] = true;
                }
                match worst {
                    Some((_, e)) if e >= p.error[k] => {}
                    _ => worst = Some((i, p.error[k])),
                }
            }
            if let Some((i, _)) = worst {
                mark[i] = true;
            }
        }
        let n_marked = mark.iter().filter(|m| **m).count();
        if n_marked == 0 || panels.len() + n_marked > max_panels {
            let k = failing
                .iter()
                .copied()
                .max_by(|&i, &j| {
                    (error[i] / bound[i])
                        .partial_cmp(&(error[j] / bound[j]))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(failing[0]);
            return Err(Error::Quadrature {
                component: k,
                estimate: value[k].as_f64(),
                error: error[k].as_f64(),
                bound: bound[k].as_f64(),
            });
        }

        let halves: Vec<(F, F)> = panels
            .iter()
            .zip(&mark)
            .filter(|(_, m)| **m)
            .flat_map(|(p, _)| {
                let m = F::lit(0.5) * (p.a + p.b);
                [(p.a, m), (m, p.b)]
            })
            .collect();
        let mut fresh = halves
            .par_iter()
            .map(|&(lo, hi)| vec_panel(f, dim, lo, hi))
            .collect::<Vec<_>>()
            .into_iter();
        let old = std::mem::take(&mut panels);
        for (p, m) in old.into_iter().zip(mark) {
            if m {
                panels.push(fresh.next().expect("left half"));
                panels.push(fresh.next().expect("right half"));
            } else {
                panels.push(p);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_panel_is_exact_for_low_degree_polynomials() {
        let (v, _, _) = gk21(&|x: f64| x.powi(20) - 3.0 * x.powi(7), 0.0, 1.0);
        assert!((v - (1.0 / 21.0 - 3.0 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn scalar_oscillatory() {
        let tol = Tolerance::new(1e-12, Basis::L1);
        let est = integrate(&|x: f64| (30.0 * x).cos(), 0.0, 1.0, &tol).unwrap();
        assert!((est.value - (30.0f64).sin() / 30.0).abs() < 1e-13);
    }

    #[test]
    fn scalar_endpoint_singularity() {
        let tol = Tolerance::new(1e-10, Basis::Value);
        let est = integrate(&|x: f64| x.sqrt().ln(), 0.0, 1.0, &tol).unwrap();
        assert!((est.value + 0.5).abs() < 1e-9);
    }

    #[test]
    fn vector_components_meet_their_own_tolerance() {
        let dim = 40;
        let f = |x: f64, out: &mut [f64]| {
            for (k, o) in out.iter_mut().enumerate() {
                *o = x.powi(k as i32) * (-x).exp();
            }
        };
        let basis = vec![Basis::Value; dim];
        let est = integrate_vec(&f, dim, 0.0, 60.0, 4, 1e-12, 1e-300, &basis, 4000).unwrap();
        let mut fact = 1.0;
        for k in 0..dim {
            if k > 0 {
                fact *= k as f64;
            }
            // ∫_0^60 x^k e^{-x} dx ≈ k! for k small enough that the tail is negligible.
            if k < 10 {
                assert!((est.value[k] - fact).abs() <= 1e-11 * fact, "k={k}");
            }
        }
    }

    #[test]
    fn vector_reports_failing_component() {
        let f = |x: f64, out: &mut [f64]| {
            out[0] = x;
            out[1] = 1.0 / x;
        };
        let err = integrate_vec(&f, 2, 0.0, 1.0, 1, 1e-10, 1e-300, &[Basis::Value; 2], 64).unwrap_err();
        match err {
            Error::Quadrature { component, .. } => assert_eq!(component, 1),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn vector_result_independent_of_thread_count() {
        let dim = 30;
        let f = |x: f64, out: &mut [f64]| {
            let z = (-0.3 * x).exp();
            let mut w = z;
            for o in out.iter_mut() {
                *o = (-(x.exp()) * 0.01).exp() * w;
                w *= 1.0 - z;
            }
        };
        let basis = vec![Basis::Value; dim];
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| integrate_vec(&f, dim, 0.0, 9.0, 8, 1e-10, 1e-300, &basis, 4000).unwrap())
        };
        let a = run(1);
        let b = run(4);
        for k in 0..dim {
            assert_eq!(a.value[k].to_bits(), b.value[k].to_bits());
        }
    }
}
