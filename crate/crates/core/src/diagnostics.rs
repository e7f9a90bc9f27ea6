//! Indicator terms of the increment equations, growth-law fits and the
//! sublog family.

use crate::afamily::{eval_xi, xi_real_zeros, AFunctionSpec};
use crate::error::{Error, Result};
use crate::minseq::{DoubleRootPoint, Evaluator, SequenceRun};
use crate::pochhammer;
use rayon::prelude::*;
use std::f64::consts::{E, PI};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndicatorRecord {
    pub n: usize,
    /// P_{n+1}^+(t_n/β_n).
    pub pochhammer_term: f64,
    /// β_n·∂Ξ_{n+1}/∂β at (t_n, β_n).
    pub beta_deriv_term: f64,
    /// Ξ*(t_n + τ_n).
    pub xi_star: Option<f64>,
    /// Size of the latest t-jump at or before n; absent before the first jump.
    pub tau: Option<f64>,
    /// Smallest-|τ| solution of beta_deriv_term = Ξ*(t_n + τ) within half
    /// the local Ξ-zero spacing.
    pub tau_phase: Option<f64>,
    /// pochhammer_term / (beta_deriv_term/β_n).
    pub q_value: f64,
    /// Ξ''_{n+1}(t_n, β_n).
    pub d_tt: f64,
    /// b_{n+1}(β_n).
    pub b_next: f64,
}

/// Real zeros of Ξ, used for the τ window.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroCache {
    pub zeros: Vec<f64>,
    pub t_max: f64,
}

/// Window margin beyond the largest t of interest.
const ZERO_MARGIN: f64 = 10.0;
const TAU_SCAN: usize = 16;
const TAU_TOL: f64 = 1e-10;

impl ZeroCache {
    pub fn new(spec: &AFunctionSpec, t_max: f64) -> Result<Self> {
        let t_max = t_max + ZERO_MARGIN;
        Ok(Self {
            zeros: xi_real_zeros(spec, t_max)?,
            t_max,
        })
    }

    /// Spacing of the zeros around t. Beyond the last zero the last gap is
    /// used; with fewer than two zeros, π (the spacing of cos t).
    pub fn local_spacing(&self, t: f64) -> f64 {
        let z = &self.zeros;
        if z.len() < 2 {
            return PI;
        }
        let i = z.partition_point(|&x| x <= t);
        let i = i.clamp(1, z.len() - 1);
        z[i] - z[i - 1]
    }
}

fn xi_star(spec: &AFunctionSpec, t: f64) -> Result<f64> {
    Ok(eval_xi(spec, t)?.star)
}

/// Smallest-|τ| solution of Ξ*(t + τ) = target with |τ| ≤ half_window.
pub fn extract_tau(spec: &AFunctionSpec, t: f64, target: f64, half_window: f64) -> Result<Option<f64>> {
    let g = |tau: f64| xi_star(spec, t + tau).map(|v| v - target);
    let h = half_window / TAU_SCAN as f64;
    let g0 = g(0.0)?;
    if g0 == 0.0 {
        return Ok(Some(0.0));
    }
    let (mut gp, mut gm) = (g0, g0);
    for j in 1..=TAU_SCAN {
        let (a, b) = ((j - 1) as f64 * h, j as f64 * h);
        let np = g(b)?;
        let nm = g(-b)?;
        let hit_p = (gp < 0.0) != (np < 0.0) || np == 0.0;
        let hit_m = (gm < 0.0) != (nm < 0.0) || nm == 0.0;
        let root_p = if hit_p { Some(bisect(&g, a, b, gp)?) } else { None };
        let root_m = if hit_m { Some(bisect(&g, -a, -b, gm)?) } else { None };
        match (root_p, root_m) {
            (Some(p), Some(m)) => return Ok(Some(if p <= -m { p } else { m })),
            (Some(r), None) | (None, Some(r)) => return Ok(Some(r)),
            (None, None) => {}
        }
        gp = np;
        gm = nm;
    }
    Ok(None)
}

fn bisect(g: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, mut ga: f64) -> Result<f64> {
    while (b - a).abs() > TAU_TOL {
        let m = 0.5 * (a + b);
        let gm = g(m)?;
        if gm == 0.0 {
            return Ok(m);
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

fn indicator_with(ev: &mut Evaluator, zeros: &ZeroCache, point: &DoubleRootPoint, tau: Option<f64>) -> Result<IndicatorRecord> {
    let n1 = point.n + 1;
    let (beta, t) = (point.beta, point.t);
    let e = ev.eval(n1, t, beta)?;
    let b_next = ev.table(n1, beta)?.b[n1];
    let pochhammer_term = pochhammer::eval_pair(n1, t / beta).p_plus;
    let beta_deriv_term = beta * e.d_beta.expect("tables carry derivatives");
    let tau_phase = extract_tau(ev.spec(), t, beta_deriv_term, 0.5 * zeros.local_spacing(t))?;
    let xi_star = tau.map(|tau| xi_star(ev.spec(), t + tau)).transpose()?;
    Ok(IndicatorRecord {
        n: point.n,
        pochhammer_term,
        beta_deriv_term,
        xi_star,
        tau,
        tau_phase,
        q_value: pochhammer_term / (beta_deriv_term / beta),
        d_tt: e.d_tt,
        b_next,
    })
}

/// Indicator terms at one converged point. Without the run history τ_n is
/// absent; see [`indicators_batch`].
pub fn indicators(spec: &AFunctionSpec, point: &DoubleRootPoint) -> Result<IndicatorRecord> {
    let zeros = ZeroCache::new(spec, point.t)?;
    let mut ev = Evaluator::new(spec)?;
    indicator_with(&mut ev, &zeros, point, None)
}

/// Size of the latest t-jump at or before each point of a consecutive run.
pub fn jump_sizes(points: &[DoubleRootPoint]) -> Vec<Option<f64>> {
    let mut cur = None;
    let mut prev_t: Option<f64> = None;
    points
        .iter()
        .map(|p| {
            if p.jumped {
                if let Some(t0) = prev_t {
                    cur = Some(p.t - t0);
                }
            }
            prev_t = Some(p.t);
            cur
        })
        .collect()
}

/// Indicator terms at every point of a consecutive run, in parallel, with
/// one shared zero set.
pub fn indicators_batch(spec: &AFunctionSpec, points: &[DoubleRootPoint]) -> Result<Vec<IndicatorRecord>> {
    let t_max = points.iter().map(|p| p.t).fold(0.0, f64::max);
    let zeros = ZeroCache::new(spec, t_max)?;
    let taus = jump_sizes(points);
    points
        .par_iter()
        .zip(taus)
        .map_init(
            || Evaluator::new(spec),
            |ev, (p, tau)| indicator_with(ev.as_mut().map_err(|e| e.clone())?, &zeros, p, tau),
        )
        .collect()
}

/// β_n ≈ a·(log(n+1))^p + c over [n_lo, n_hi].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub a: f64,
    pub p: f64,
    pub c: f64,
    pub rms_residual: f64,
    pub n_lo: usize,
    pub n_hi: usize,
    pub points: usize,
}

impl FitResult {
    /// Model value, only inside the fitted range.
    pub fn eval(&self, n: usize) -> Option<f64> {
        (self.n_lo..=self.n_hi).contains(&n).then(|| model(self.a, self.p, self.c, n))
    }

    pub fn report(&self) -> String {
        format!(
            "model: beta_n = a*log(n+1)^p + c\na = {}\np = {}\nc = {}\nrange = [{}, {}]\npoints = {}\nrms = {}\n",
            self.a, self.p, self.c, self.n_lo, self.n_hi, self.points, self.rms_residual
        )
    }
}

pub fn model(a: f64, p: f64, c: f64, n: usize) -> f64 {
    a * ((n + 1) as f64).ln().powf(p) + c
}

const FIT_MIN_POINTS: usize = 10;
const P_LO: f64 = 0.3;
const P_HI: f64 = 2.0;
const GOLDEN_ITERS: usize = 100;

/// Linear least squares for (a, c) at fixed p; returns (rms, a, c).
fn inner_fit(data: &[(f64, f64)], p: f64) -> (f64, f64, f64) {
    let m = data.len() as f64;
    let xs: Vec<f64> = data.iter().map(|(l, _)| l.powf(p)).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = data.iter().map(|(_, y)| y).sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, (_, y)) in xs.iter().zip(data) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let a = sxy / sxx;
    let c = my - a * mx;
    let ss: f64 = xs.iter().zip(data).map(|(x, (_, y))| (a * x + c - y).powi(2)).sum();
    ((ss / m).sqrt(), a, c)
}

/// Fit over (n, β_n) pairs within [n_lo, n_hi].
pub fn fit_log_power_points(points: &[(usize, f64)], n_lo: usize, n_hi: usize) -> Result<FitResult> {
    if n_lo > n_hi {
        return Err(Error::Usage(format!("empty fit range [{n_lo}, {n_hi}]")));
    }
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, _)| (n_lo..=n_hi).contains(n))
        .map(|&(n, b)| (((n + 1) as f64).ln(), b))
        .collect();
    if data.len() < FIT_MIN_POINTS {
        return Err(Error::Usage(format!(
            "fit needs at least {FIT_MIN_POINTS} points in [{n_lo}, {n_hi}], got {}",
            data.len()
        )));
    }
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (P_LO, P_HI);
    for _ in 0..GOLDEN_ITERS {
        let m1 = hi - gr * (hi - lo);
        let m2 = lo + gr * (hi - lo);
        if inner_fit(&data, m1).0 < inner_fit(&data, m2).0 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let p = 0.5 * (lo + hi);
    let (rms, a, c) = inner_fit(&data, p);
    if !(a > 0.0) || !rms.is_finite() {
        return Err(Error::Usage(format!("degenerate fit in [{n_lo}, {n_hi}]: a = {a}")));
    }
    Ok(FitResult {
        a,
        p,
        c,
        rms_residual: rms,
        n_lo,
        n_hi,
        points: data.len(),
    })
}

pub fn fit_log_power(run: &SequenceRun, n_lo: usize, n_hi: usize) -> Result<FitResult> {
    let pts: Vec<(usize, f64)> = run.points.iter().map(|p| (p.n, p.beta)).collect();
    fit_log_power_points(&pts, n_lo, n_hi)
}

/// Fits over windows [n_lo, n_hi] with n_hi doubling up to the end of the run.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport {
    pub fits: Vec<FitResult>,
    pub a_monotone: bool,
    pub p_monotone: bool,
    pub c_monotone: bool,
}

fn monotone(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] >= w[0]) || xs.windows(2).all(|w| w[1] <= w[0])
}

pub fn fit_drift(run: &SequenceRun, n_lo: usize, first_hi: usize) -> Result<DriftReport> {
    let last = run.points.last().map_or(0, |p| p.n);
    let mut his = Vec::new();
    let mut hi = first_hi;
    while hi < last {
        his.push(hi);
        hi *= 2;
    }
    his.push(last);
    let fits = his.into_iter().map(|hi| fit_log_power(run, n_lo, hi)).collect::<Result<Vec<_>>>()?;
    let col = |f: fn(&FitResult) -> f64| fits.iter().map(f).collect::<Vec<_>>();
    Ok(DriftReport {
        a_monotone: monotone(&col(|f| f.a)),
        p_monotone: monotone(&col(|f| f.p)),
        c_monotone: monotone(&col(|f| f.c)),
        fits,
    })
}

impl DriftReport {
    pub fn render(&self) -> String {
        let mut s = String::from("n_lo,n_hi,a,p,c,rms\n");
        for f in &self.fits {
            s.push_str(&format!("{},{},{},{},{},{}\n", f.n_lo, f.n_hi, f.a, f.p, f.c, f.rms_residual));
        }
        s.push_str(&format!(
            "# monotone a={} p={} c={}\n",
            self.a_monotone, self.p_monotone, self.c_monotone
        ));
        s
    }
}

const NEWTON_REL: f64 = 1e-12;

fn newton_right(l: f64, mut x: f64, g: impl Fn(f64) -> (f64, f64)) -> f64 {
    while g(x).0 <= l {
        x *= 2.0;
    }
    for _ in 0..200 {
        let (v, d) = g(x);
        let dx = (v - l) / d;
        x -= dx;
        if dx.abs() <= NEWTON_REL * x {
            break;
        }
    }
    x
}

/// I with I·log I = log n.
pub fn sublog(n: f64) -> Result<f64> {
    if !(n > 1.0 && n.is_finite()) {
        return Err(Error::Usage(format!("sublog needs n > 1, got {n}")));
    }
    let l = n.ln();
    Ok(newton_right(l, E.max(l + 1.0), |i| (i * i.ln(), i.ln() + 1.0)))
}

/// I with I·log log I = log n.
pub fn sublogxl(n: f64) -> Result<f64> {
    if !(n > E && n.is_finite()) {
        return Err(Error::Usage(format!("sublogxl needs n > e, got {n}")));
    }
    let l = n.ln();
    Ok(newton_right(l, E + l, |i| {
        let li = i.ln();
        (i * li.ln(), li.ln() + 1.0 / li)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sublog_fixed_point() {
        let v = sublog(E.powf(E)).unwrap();
        assert!((v - E).abs() < 1e-12);
        assert!(sublog(1.0).is_err());
        assert!(sublogxl(2.0).is_err());
    }

    #[test]
    fn sublog_residuals() {
        for n in [3.0, 1e3, 1e6, 1e12] {
            let l: f64 = f64::ln(n);
            let i = sublog(n).unwrap();
            assert!((l - i * i.ln()).abs() <= 1e-12 * l);
            let j = sublogxl(n).unwrap();
            assert!((l - j * j.ln().ln()).abs() <= 1e-12 * l, "n={n}");
        }
    }

    #[test]
    fn fit_recovers_exact_model() {
        let pts: Vec<(usize, f64)> = (4..=100).map(|n| (n, model(1.3, 0.8, -1.1, n))).collect();
        let f = fit_log_power_points(&pts, 4, 100).unwrap();
        assert!((f.a - 1.3).abs() < 1e-5 && (f.p - 0.8).abs() < 1e-5 && (f.c + 1.1).abs() < 1e-5, "{f:?}");
        assert_eq!(f.eval(3), None);
        assert!(fit_log_power_points(&pts, 4, 10).is_err());
        assert!(fit_log_power_points(&pts, 50, 40).is_err());
    }

    #[test]
    fn tau_for_cosine_star() {
        // Ξ*(t) = 4cos t for the unit compact kernel.
        let spec = AFunctionSpec::compact_const(1.0);
        let t = 10.0;
        let tau = extract_tau(&spec, t, 4.0 * (t + 0.3).cos(), PI / 2.0).unwrap().unwrap();
        assert!((tau - 0.3).abs() < 1e-8, "{tau}");
        assert_eq!(extract_tau(&spec, t, 5.0, PI / 2.0).unwrap(), None);
    }
}
