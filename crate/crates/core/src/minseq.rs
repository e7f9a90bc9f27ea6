//! Minimal β-sequences: double roots of Ξ_n(t, β) continued in n.

use crate::afamily::{AFunctionSpec, Case};
use crate::approximant::{self, all_roots, eval_approximant, extract_poly, is_real_nonneg, ApproximantEval, EXTRACT_MAX_N};
use crate::coeffs::{coeff_table, CoefficientTable};
use crate::error::{Error, Result};
use crate::pochhammer;
use serde::{Deserialize, Serialize};
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Residual tolerance on |Ξ_n| relative to Σ|b_k P_k^+|.
    pub tol_f: f64,
    /// Residual tolerance on |Ξ'_n| relative to Σ|b_k dP_k^+|/β.
    pub tol_df: f64,
    pub max_newton_iters: usize,
    /// Step in t of the jump scan; `None` means 0.1·β of the incumbent.
    pub jump_scan_step: Option<f64>,
    /// Extent of the jump scan; `None` means 5·β + 20.
    pub jump_scan_max: Option<f64>,
    /// Step-halving limit per Newton step.
    pub damping: u32,
    pub seed_beta_hi: f64,
    pub seed_beta_steps: usize,
    /// Joint 2×2 Newton instead of the alternating β-then-t update.
    pub joint_newton: bool,
    /// Also search for a jump when the Pochhammer term changes sign.
    pub sign_trigger: bool,
    /// Use the asymptotic increment form for the prediction above the threshold.
    pub asymptotic_mode: bool,
    pub asymptotic_threshold: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_f: 1e-10,
            tol_df: 1e-10,
            max_newton_iters: 50,
            jump_scan_step: None,
            jump_scan_max: None,
            damping: 8,
            seed_beta_hi: 10.0,
            seed_beta_steps: 60,
            joint_newton: false,
            sign_trigger: true,
            asymptotic_mode: false,
            asymptotic_threshold: 10_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("solver: {m}")));
        if !(self.tol_f >= 1e-14 && self.tol_f.is_finite()) || !(self.tol_df >= 1e-14 && self.tol_df.is_finite()) {
            return bad("tol_f and tol_df must be finite and >= 1e-14");
        }
        if self.max_newton_iters == 0 || self.seed_beta_steps == 0 || self.asymptotic_threshold == 0 {
            return bad("iteration counts must be positive");
        }
        if !(self.seed_beta_hi > 0.0 && self.seed_beta_hi.is_finite()) {
            return bad("seed_beta_hi must be positive");
        }
        for v in [self.jump_scan_step, self.jump_scan_max].into_iter().flatten() {
            if !(v > 0.0 && v.is_finite()) {
                return bad("jump scan step and extent must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Min,
    Max,
}

impl Kind {
    pub fn from_curvature(d_tt: f64) -> Kind {
        if d_tt > 0.0 {
            Kind::Min
        } else {
            Kind::Max
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Kind::Min => 1.0,
            Kind::Max => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Min => "min",
            Kind::Max => "max",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleRootPoint {
    pub n: usize,
    pub beta: f64,
    pub t: f64,
    pub u: f64,
    pub kind: Kind,
    pub jumped: bool,
    pub newton_iters: usize,
    /// |Ξ_n| / Σ|b_k P_k^+|.
    pub residual_f: f64,
    /// |Ξ'_n| / (Σ|b_k dP_k^+|/β).
    pub residual_df: f64,
}

/// Coefficient tables for one spec, with a small cache keyed on (n, β).
pub struct Evaluator {
    spec: AFunctionSpec,
    cache: Vec<CoefficientTable>,
}

const CACHE_LEN: usize = 6;

impl Evaluator {
    pub fn new(spec: &AFunctionSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec: *spec,
            cache: Vec::with_capacity(CACHE_LEN),
        })
    }

    pub fn spec(&self) -> &AFunctionSpec {
        &self.spec
    }

    pub fn table(&mut self, n: usize, beta: f64) -> Result<&CoefficientTable> {
        if let Some(i) = self.cache.iter().position(|t| t.n == n && t.beta.to_bits() == beta.to_bits()) {
            return Ok(&self.cache[i]);
        }
        let t = coeff_table(&self.spec, n, beta, true)?;
        if self.cache.len() == CACHE_LEN {
            self.cache.remove(0);
        }
        self.cache.push(t);
        Ok(self.cache.last().expect("just pushed"))
    }

    pub fn eval(&mut self, n: usize, t: f64, beta: f64) -> Result<ApproximantEval> {
        let table = self.table(n, beta)?;
        eval_approximant(table, n, t)
    }

    pub fn real_roots_only(&mut self, n: usize, beta: f64) -> Result<bool> {
        let table = self.table(n, beta)?;
        approximant::real_roots_only(table, n)
    }
}

fn residual_norm(e: &ApproximantEval) -> f64 {
    let rf = e.value.abs() / e.scale_f;
    let rdf = if e.scale_df > 0.0 { e.d_t.abs() / e.scale_df } else { e.d_t.abs() };
    rf.max(rdf)
}

fn converged(e: &ApproximantEval, cfg: &SolverConfig) -> bool {
    e.value.abs() <= cfg.tol_f * e.scale_f && e.d_t.abs() <= cfg.tol_df * e.scale_df
}

fn make_point(n: usize, beta: f64, t: f64, e: &ApproximantEval, iters: usize) -> DoubleRootPoint {
    DoubleRootPoint {
        n,
        beta,
        t,
        u: t / beta,
        kind: Kind::from_curvature(e.d_tt),
        jumped: false,
        newton_iters: iters,
        residual_f: e.value.abs() / e.scale_f,
        residual_df: if e.scale_df > 0.0 { e.d_t.abs() / e.scale_df } else { e.d_t.abs() },
    }
}

fn in_domain(beta: f64, t: f64) -> bool {
    beta > 0.0 && t > 0.0 && beta.is_finite() && t.is_finite()
}

/// Damped Newton on Ξ_n = Ξ'_n = 0 from (β0, t0).
pub fn newton_polish(spec: &AFunctionSpec, n: usize, beta0: f64, t0: f64, cfg: &SolverConfig) -> Result<DoubleRootPoint> {
    cfg.validate()?;
    let mut ev = Evaluator::new(spec)?;
    polish(&mut ev, n, beta0, t0, cfg)
}

fn polish(ev: &mut Evaluator, n: usize, beta0: f64, t0: f64, cfg: &SolverConfig) -> Result<DoubleRootPoint> {
    if !in_domain(beta0, t0) {
        return Err(Error::DivergedOutOfDomain { beta: beta0, t: t0 });
    }
    let (mut beta, mut t) = (beta0, t0);
    let mut e = ev.eval(n, t, beta)?;
    let mut r = residual_norm(&e);
    for it in 0..=cfg.max_newton_iters {
        if converged(&e, cfg) {
            return Ok(make_point(n, beta, t, &e, it));
        }
        if it == cfg.max_newton_iters || !r.is_finite() {
            break;
        }
        let d_beta = e.d_beta.expect("tables carry derivatives");
        let (db, dt) = if cfg.joint_newton {
            let j_bt = e.d_t_beta.expect("tables carry derivatives");
            // [Ξ_β  Ξ_t ; Ξ'_β  Ξ''] (dβ, dt) = −(Ξ, Ξ')
            let det = d_beta * e.d_tt - e.d_t * j_bt;
            ((-e.value * e.d_tt + e.d_t * e.d_t) / det, (-d_beta * e.d_t + j_bt * e.value) / det)
        } else {
            let db = -e.value / d_beta;
            let b1 = beta + db;
            if !in_domain(b1, t) {
                return Err(Error::DivergedOutOfDomain { beta: b1, t });
            }
            let e1 = ev.eval(n, t, b1)?;
            (db, -e1.d_t / e1.d_tt)
        };
        if !db.is_finite() || !dt.is_finite() {
            break;
        }
        let mut accepted = None;
        let mut outside = None;
        let mut lambda = 1.0;
        for _ in 0..=cfg.damping {
            let (bc, tc) = (beta + lambda * db, t + lambda * dt);
            if in_domain(bc, tc) {
                let ec = ev.eval(n, tc, bc)?;
                let rc = residual_norm(&ec);
                if rc < r {
                    accepted = Some((bc, tc, ec, rc));
                    break;
                }
            } else if outside.is_none() {
                outside = Some((bc, tc));
            }
            lambda *= 0.5;
        }
        match (accepted, outside) {
            (Some((bc, tc, ec, rc)), _) => {
                beta = bc;
                t = tc;
                e = ec;
                r = rc;
            }
            (None, Some((bc, tc))) => return Err(Error::DivergedOutOfDomain { beta: bc, t: tc }),
            (None, None) => break,
        }
    }
    Err(Error::NotConverged {
        iters: cfg.max_newton_iters,
    })
}

/// Bracket of the coalescence in β and the seed t from the scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeedBracket {
    /// Largest β found with a non-real root.
    pub beta_lo: f64,
    /// Smallest β found with all roots real.
    pub beta_hi: f64,
    /// Midpoint of the closest pair of real t-roots at `beta_hi`.
    pub t_mid: f64,
}

const SEED_DESCENT: f64 = 0.9;
const SEED_BETA_FLOOR: f64 = 1e-4;
const SEED_WIDTH: f64 = 1e-12;

/// Scans β downward from `seed_beta_hi` until Ξ_{n0} loses a real root pair,
/// then bisects the transition.
pub fn seed_bracket(spec: &AFunctionSpec, n0: usize, cfg: &SolverConfig) -> Result<SeedBracket> {
    cfg.validate()?;
    if n0 > EXTRACT_MAX_N {
        return Err(Error::Usage(format!("seed needs n0 <= {EXTRACT_MAX_N}, got {n0}")));
    }
    if n0 < 4 {
        return Err(Error::SeedFailed(format!("n0 = {n0}: at most one root pair, no coalescence")));
    }
    let mut ev = Evaluator::new(spec)?;
    let mut hi = cfg.seed_beta_hi;
    if !ev.real_roots_only(n0, hi)? {
        return Err(Error::SeedFailed(format!("roots of Xi_{n0} are not all real at beta = {hi}")));
    }
    let mut lo = hi;
    loop {
        lo *= SEED_DESCENT;
        if lo < SEED_BETA_FLOOR {
            return Err(Error::SeedFailed(format!("{}: no coalescence at n = {n0} down to beta = {SEED_BETA_FLOOR}", spec.case)));
        }
        if !ev.real_roots_only(n0, lo)? {
            break;
        }
        hi = lo;
    }
    for _ in 0..cfg.seed_beta_steps {
        if hi - lo <= SEED_WIDTH {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if ev.real_roots_only(n0, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let poly = extract_poly(ev.table(n0, hi)?, n0)?;
    let mut ts: Vec<f64> = all_roots(&poly)?
        .into_iter()
        .filter(|u| is_real_nonneg(*u))
        .map(|u| u.re.max(0.0).sqrt())
        .collect();
    ts.sort_by(|a, b| a.total_cmp(b));
    let (i, gap) = ts
        .windows(2)
        .enumerate()
        .map(|(i, w)| (i, w[1] - w[0]))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::SeedFailed("fewer than two real roots at the transition".into()))?;
    if ts[0] < 0.5 * gap {
        return Err(Error::SeedFailed(format!(
            "coalescence at t = 0 (u-root {:.3e} crossing zero) at beta = {hi}",
            ts[0] * ts[0]
        )));
    }
    Ok(SeedBracket {
        beta_lo: lo,
        beta_hi: hi,
        t_mid: 0.5 * (ts[i] + ts[i + 1]),
    })
}

/// First double root at degree n0.
pub fn seed(spec: &AFunctionSpec, n0: usize, cfg: &SolverConfig) -> Result<DoubleRootPoint> {
    let br = seed_bracket(spec, n0, cfg)?;
    let mut ev = Evaluator::new(spec)?;
    polish(&mut ev, n0, br.beta_hi, br.t_mid, cfg).map_err(|e| Error::SeedFailed(format!("polish from scan failed: {e}")))
}

/// First-order prediction of (β_{n+1}, t_{n+1}) from a converged point.
pub fn predict(ev: &mut Evaluator, point: &DoubleRootPoint, cfg: &SolverConfig) -> Result<(f64, f64)> {
    let n1 = point.n + 1;
    let (beta, t) = (point.beta, point.t);
    let e = ev.eval(n1, t, beta)?;
    let d_beta = e.d_beta.expect("tables carry derivatives");
    let (db, dt) = if cfg.asymptotic_mode && point.n >= cfg.asymptotic_threshold {
        let b_next = ev.table(n1, beta)?.b[n1];
        let p = pochhammer::eval_pair(n1, t / beta);
        let q = p.p_plus / d_beta;
        let dlog_q = (p.dp_plus / beta) / p.p_plus - e.d_t_beta.expect("tables carry derivatives") / d_beta;
        (-b_next * q, -(b_next * p.p_plus / e.d_tt) * dlog_q)
    } else {
        let db = -e.value / d_beta;
        let e2 = ev.eval(n1, t, beta + db)?;
        (db, -e2.d_t / e.d_tt)
    };
    let (bp, tp) = (beta + db, t + dt);
    Ok(if in_domain(bp, tp) { (bp, tp) } else { (beta, t) })
}

/// Scans t upward from `t_from` at fixed β for a converged double root at
/// degree n. With `incumbent` set, only a point of the opposite kind counts.
pub fn t_jump_search(
    spec: &AFunctionSpec,
    n: usize,
    beta_guess: f64,
    t_from: f64,
    incumbent: Option<Kind>,
    cfg: &SolverConfig,
) -> Result<DoubleRootPoint> {
    cfg.validate()?;
    let mut ev = Evaluator::new(spec)?;
    jump_search(&mut ev, n, beta_guess, t_from, incumbent, cfg).map(|(p, _)| p)
}

/// Returns the point and the number of t trials used.
fn jump_search(
    ev: &mut Evaluator,
    n: usize,
    beta: f64,
    t_from: f64,
    incumbent: Option<Kind>,
    cfg: &SolverConfig,
) -> Result<(DoubleRootPoint, usize)> {
    let step = cfg.jump_scan_step.unwrap_or(0.1 * beta);
    let extent = cfg.jump_scan_max.unwrap_or(5.0 * beta + 20.0);
    let mut j = 1usize;
    while j as f64 * step <= extent {
        let t_try = t_from + j as f64 * step;
        if let Ok(mut p) = polish(ev, n, beta, t_try, cfg) {
            if p.t > t_from && incumbent.map_or(true, |k| p.kind != k) {
                p.jumped = true;
                return Ok((p, j));
            }
        }
        j += 1;
    }
    Err(Error::JumpNotFound { n })
}

fn sign_changed(a: f64, b: f64) -> bool {
    (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0)
}

/// Largest t step accepted from the local continuation.
fn local_dt_max(beta: f64) -> f64 {
    0.5 * (beta + 1.0)
}

/// Solves degree n+1 from the incumbent `point`; `previous` is the point
/// before it, if any, for the Pochhammer sign trigger.
pub fn advance_from(
    ev: &mut Evaluator,
    point: &DoubleRootPoint,
    previous: Option<&DoubleRootPoint>,
    cfg: &SolverConfig,
) -> Result<DoubleRootPoint> {
    let n1 = point.n + 1;
    let local = predict(ev, point, cfg).and_then(|(bp, tp)| polish(ev, n1, bp, tp, cfg));
    let local = local
        .ok()
        .filter(|p| p.kind == point.kind && p.t > point.t && p.t - point.t <= local_dt_max(point.beta));
    let mut trigger = local.is_none();
    if cfg.sign_trigger {
        if let Some(prev) = previous {
            let now = pochhammer::eval_pair(n1, point.u).p_plus;
            let before = pochhammer::eval_pair(point.n, prev.u).p_plus;
            trigger |= sign_changed(now, before);
        }
    }
    if trigger {
        match jump_search(ev, n1, point.beta, point.t, Some(point.kind), cfg) {
            Ok((p, _)) => return Ok(p),
            Err(e) => return local.ok_or(e),
        }
    }
    Ok(local.expect("no trigger implies a local point"))
}

/// One continuation step without history (the sign trigger is inactive).
pub fn advance(spec: &AFunctionSpec, point: &DoubleRootPoint, cfg: &SolverConfig) -> Result<DoubleRootPoint> {
    cfg.validate()?;
    let mut ev = Evaluator::new(spec)?;
    advance_from(&mut ev, point, None, cfg)
}

/// Whether the point is the minimal β at its degree: all roots real at
/// β(1+ε), not all real at β(1−ε). Above degree 60 a local test at
/// δ = 1e-4·β replaces the full root set.
pub fn verify_minimality(spec: &AFunctionSpec, point: &DoubleRootPoint, epsilon: f64, cfg: &SolverConfig) -> Result<bool> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Usage(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    cfg.validate()?;
    let mut ev = Evaluator::new(spec)?;
    let n = point.n;
    if n <= EXTRACT_MAX_N {
        let above = ev.real_roots_only(n, point.beta * (1.0 + epsilon))?;
        let below = ev.real_roots_only(n, point.beta * (1.0 - epsilon))?;
        return Ok(above && !below);
    }
    let delta = 1e-4 * point.beta;
    let s = point.kind.sign();
    let v_hi = extremum_value(&mut ev, n, point.t, point.beta + delta)?;
    let v_lo = extremum_value(&mut ev, n, point.t, point.beta - delta)?;
    Ok(s * v_hi < 0.0 && s * v_lo > 0.0)
}

fn extremum_value(ev: &mut Evaluator, n: usize, t0: f64, beta: f64) -> Result<f64> {
    let mut t = t0;
    for _ in 0..50 {
        let e = ev.eval(n, t, beta)?;
        let dt = -e.d_t / e.d_tt;
        t += dt;
        if dt.abs() <= 1e-14 * t.abs() {
            break;
        }
    }
    Ok(ev.eval(n, t, beta)?.value)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum RunStatus {
    Complete,
    Partial { n: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceRun {
    pub spec: AFunctionSpec,
    pub config: SolverConfig,
    pub n0: usize,
    pub n_max: usize,
    pub points: Vec<DoubleRootPoint>,
    pub jump_indices: Vec<usize>,
    /// Degrees where β decreased without a jump.
    pub decrease_indices: Vec<usize>,
    pub status: RunStatus,
    pub provenance: Provenance,
}

impl SequenceRun {
    pub fn point(&self, n: usize) -> Option<&DoubleRootPoint> {
        let first = self.points.first()?.n;
        self.points.get(n.checked_sub(first)?)
    }

    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Complete
    }
}

/// Kernel parameters as written to the checkpoint header.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub w: f64,
    pub a: f64,
    pub k: u32,
    pub series_terms: usize,
    pub x_cutoff_rel: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub n0: usize,
    pub n_max: usize,
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub emit: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_n_lo: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_n_hi: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_first_hi: Option<usize>,
}

impl RunSettings {
    pub fn new(n0: usize, n_max: usize, solver: SolverConfig) -> Self {
        Self {
            n0,
            n_max,
            solver,
            output_dir: None,
            emit: Vec::new(),
            fit_n_lo: None,
            fit_n_hi: None,
            drift_first_hi: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub case: Case,
    pub params: Params,
    pub config: RunSettings,
    pub version: String,
    pub started_unix: u64,
}

impl CheckpointHeader {
    pub fn new(spec: &AFunctionSpec, settings: RunSettings) -> Self {
        Self {
            case: spec.case,
            params: Params {
                w: spec.w,
                a: spec.a,
                k: spec.k,
                series_terms: spec.series_terms,
                x_cutoff_rel: spec.x_cutoff_rel,
            },
            config: settings,
            version: VERSION.to_string(),
            started_unix: unix_now(),
        }
    }

    pub fn spec(&self) -> AFunctionSpec {
        AFunctionSpec {
            case: self.case,
            w: self.params.w,
            a: self.params.a,
            k: self.params.k,
            series_terms: self.params.series_terms,
            x_cutoff_rel: self.params.x_cutoff_rel,
        }
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

struct Sink {
    out: Option<BufWriter<File>>,
}

impl Sink {
    fn line<T: Serialize>(&mut self, v: &T) -> Result<()> {
        if let Some(w) = self.out.as_mut() {
            let s = serde_json::to_string(v).map_err(|e| Error::Io(e.to_string()))?;
            w.write_all(s.as_bytes())?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        Ok(())
    }
}

fn finish(header: &CheckpointHeader, points: Vec<DoubleRootPoint>, status: RunStatus) -> SequenceRun {
    let jump_indices = points.iter().filter(|p| p.jumped).map(|p| p.n).collect();
    let decrease_indices = points
        .windows(2)
        .filter(|w| !w[1].jumped && w[1].beta < w[0].beta)
        .map(|w| w[1].n)
        .collect();
    SequenceRun {
        spec: header.spec(),
        config: header.config.solver,
        n0: header.config.n0,
        n_max: header.config.n_max,
        points,
        jump_indices,
        decrease_indices,
        status,
        provenance: Provenance {
            version: header.version.clone(),
            started_unix: header.started_unix,
            finished_unix: unix_now(),
        },
    }
}

fn continue_run(
    header: &CheckpointHeader,
    mut points: Vec<DoubleRootPoint>,
    sink: &mut Sink,
    progress: &mut dyn FnMut(&DoubleRootPoint),
) -> Result<SequenceRun> {
    let spec = header.spec();
    let cfg = header.config.solver;
    let mut ev = Evaluator::new(&spec)?;
    let n_max = header.config.n_max;
    while let Some(last) = points.last().copied() {
        if last.n >= n_max {
            break;
        }
        let prev = points.len().checked_sub(2).map(|i| points[i]);
        match advance_from(&mut ev, &last, prev.as_ref(), &cfg) {
            Ok(p) => {
                sink.line(&p)?;
                progress(&p);
                points.push(p);
            }
            Err(e) => {
                let status = RunStatus::Partial {
                    n: last.n + 1,
                    reason: e.to_string(),
                };
                return Ok(finish(header, points, status));
            }
        }
    }
    Ok(finish(header, points, RunStatus::Complete))
}

/// Seeds at n0 and continues to n_max, appending every point to the
/// checkpoint (JSON lines, header first) when a path is given.
pub fn run_sequence(
    spec: &AFunctionSpec,
    n0: usize,
    n_max: usize,
    config: &SolverConfig,
    checkpoint_path: Option<&Path>,
) -> Result<SequenceRun> {
    let header = CheckpointHeader::new(spec, RunSettings::new(n0, n_max, *config));
    start_run(&header, checkpoint_path, &mut |_| {})
}

/// As [`run_sequence`] with a prepared header and a per-point callback.
pub fn start_run(
    header: &CheckpointHeader,
    checkpoint_path: Option<&Path>,
    progress: &mut dyn FnMut(&DoubleRootPoint),
) -> Result<SequenceRun> {
    let spec = header.spec();
    spec.validate()?;
    header.config.solver.validate()?;
    if header.config.n0 >= header.config.n_max {
        return Err(Error::Config(format!(
            "n0 ({}) must be below n_max ({})",
            header.config.n0, header.config.n_max
        )));
    }
    let mut sink = Sink {
        out: checkpoint_path.map(File::create).transpose()?.map(BufWriter::new),
    };
    sink.line(header)?;
    let first = seed(&spec, header.config.n0, &header.config.solver)?;
    sink.line(&first)?;
    progress(&first);
    continue_run(header, vec![first], &mut sink, progress)
}

/// Parsed checkpoint contents.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub points: Vec<DoubleRootPoint>,
    /// Byte length of the valid prefix (a torn final line is excluded).
    pub valid_len: usize,
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path)?;
    parse_checkpoint(&text)
}

pub fn parse_checkpoint(text: &str) -> Result<Checkpoint> {
    let mut header: Option<CheckpointHeader> = None;
    let mut points: Vec<DoubleRootPoint> = Vec::new();
    let mut offset = 0usize;
    let mut valid_len = 0usize;
    for (i, raw) in text.split_inclusive('\n').enumerate() {
        let line_no = i + 1;
        offset += raw.len();
        let terminated = raw.ends_with('\n');
        let line = raw.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            valid_len = offset;
            continue;
        }
        let parsed = if header.is_none() {
            serde_json::from_str::<CheckpointHeader>(line).map(|h| header = Some(h))
        } else {
            serde_json::from_str::<DoubleRootPoint>(line).map(|p| points.push(p))
        };
        match parsed {
            Ok(()) => valid_len = offset,
            Err(_) if !terminated && header.is_some() => break,
            Err(e) => {
                return Err(Error::Checkpoint {
                    line: line_no,
                    msg: e.to_string(),
                })
            }
        }
        if let [.., a, b] = points.as_slice() {
            if b.n != a.n + 1 {
                return Err(Error::Checkpoint {
                    line: line_no,
                    msg: format!("degree {} does not follow {}", b.n, a.n),
                });
            }
        }
    }
    let header = header.ok_or(Error::Checkpoint {
        line: 1,
        msg: "missing header".into(),
    })?;
    Ok(Checkpoint {
        header,
        points,
        valid_len,
    })
}

/// Outcome of [`resume`].
#[derive(Clone, Debug, PartialEq)]
pub struct Resumed {
    pub header: CheckpointHeader,
    pub run: SequenceRun,
    /// False when nothing was left to do.
    pub advanced: bool,
}

/// Continues a checkpointed run up to `n_max` (default: the header's),
/// rewriting the checkpoint with the updated header.
pub fn resume(path: &Path, n_max: Option<usize>, progress: &mut dyn FnMut(&DoubleRootPoint)) -> Result<Resumed> {
    let ck = read_checkpoint(path)?;
    let mut header = ck.header;
    let target = n_max.unwrap_or(header.config.n_max);
    let last_n = ck.points.last().map(|p| p.n);
    if let Some(last) = last_n {
        if target <= last {
            let run = finish(&header, ck.points, RunStatus::Complete);
            return Ok(Resumed {
                header,
                run,
                advanced: false,
            });
        }
    }
    header.config.n_max = target;
    let file = OpenOptions::new().write(true).truncate(true).open(path)?;
    let mut sink = Sink {
        out: Some(BufWriter::new(file)),
    };
    sink.line(&header)?;
    let points = if ck.points.is_empty() {
        let first = seed(&header.spec(), header.config.n0, &header.config.solver)?;
        progress(&first);
        vec![first]
    } else {
        ck.points
    };
    for p in &points {
        sink.line(p)?;
    }
    let run = continue_run(&header, points, &mut sink, progress)?;
    Ok(Resumed {
        header,
        run,
        advanced: true,
    })
}
