//! CSV, plot-data and report writers. Floats use the shortest decimal
//! representation that parses back to the same value.

use crate::diagnostics::{FitResult, IndicatorRecord};
use crate::error::{Error, Result};
use crate::minseq::DoubleRootPoint;
use std::fmt::Write as _;
use std::path::Path;

/// Shortest round-trip decimal; exponent form outside [1e-5, 1e16).
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub const SEQUENCE_HEADER: &str = "n,beta,t,u,kind,jumped,newton_iters,residual_f,residual_df";
pub const INDICATOR_HEADER: &str = "n,pochhammer_term,beta_deriv_term,xi_star,tau,q_value,d_tt,b_next";

pub fn sequence_row(p: &DoubleRootPoint) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        p.n,
        fmt_f64(p.beta),
        fmt_f64(p.t),
        fmt_f64(p.u),
        p.kind.name(),
        p.jumped,
        p.newton_iters,
        fmt_f64(p.residual_f),
        fmt_f64(p.residual_df)
    )
}

pub fn sequence_csv(points: &[DoubleRootPoint]) -> String {
    let mut s = format!("{SEQUENCE_HEADER}\n");
    for p in points {
        s.push_str(&sequence_row(p));
        s.push('\n');
    }
    s
}

pub fn indicators_csv(records: &[IndicatorRecord]) -> String {
    let mut s = format!("{INDICATOR_HEADER}\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.n,
            fmt_f64(r.pochhammer_term),
            fmt_f64(r.beta_deriv_term),
            opt(r.xi_star),
            opt(r.tau),
            fmt_f64(r.q_value),
            fmt_f64(r.d_tt),
            fmt_f64(r.b_next)
        );
    }
    s
}

/// Two whitespace-separated columns.
pub fn plot_data(points: &[DoubleRootPoint], y: impl Fn(&DoubleRootPoint) -> f64) -> String {
    let mut s = String::new();
    for p in points {
        let _ = writeln!(s, "{} {}", p.n, fmt_f64(y(p)));
    }
    s
}

/// (n, β_n) pairs from a sequence CSV.
pub fn read_sequence_csv(text: &str) -> Result<Vec<(usize, f64)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == SEQUENCE_HEADER => {}
        _ => return Err(Error::Usage(format!("sequence CSV must start with '{SEQUENCE_HEADER}'"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let bad = || Error::Usage(format!("sequence CSV line {}: malformed row", i + 1));
        let n = cols.next().and_then(|c| c.parse().ok()).ok_or_else(bad)?;
        let beta = cols.next().and_then(|c| c.parse().ok()).ok_or_else(bad)?;
        out.push((n, beta));
    }
    Ok(out)
}

pub fn fit_report(fit: &FitResult) -> String {
    fit.report()
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::write(dir.join(name), contents).map_err(|e| Error::Io(format!("{}: {e}", dir.join(name).display())))
}
