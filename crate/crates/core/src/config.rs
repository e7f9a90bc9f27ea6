//! Run configuration: UTF-8 lines of `key = value`, `#` comments, dotted
//! keys for the `params.` and `solver.` sections. Kernel parameters may
//! also be given flat (`w = 1`).

use crate::afamily::{AFunctionSpec, Case};
use crate::error::{Error, Result};
use crate::minseq::{RunSettings, SolverConfig};
use std::collections::BTreeSet;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Emit {
    Sequence,
    Indicators,
    Fit,
    Plotdata,
    Drift,
}

impl Emit {
    pub fn name(self) -> &'static str {
        match self {
            Emit::Sequence => "sequence",
            Emit::Indicators => "indicators",
            Emit::Fit => "fit",
            Emit::Plotdata => "plotdata",
            Emit::Drift => "drift",
        }
    }

    pub fn from_name(s: &str) -> Option<Emit> {
        [Emit::Sequence, Emit::Indicators, Emit::Fit, Emit::Plotdata, Emit::Drift]
            .into_iter()
            .find(|e| e.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub spec: AFunctionSpec,
    pub n0: usize,
    pub n_max: usize,
    pub solver: SolverConfig,
    pub output_dir: PathBuf,
    pub emit: BTreeSet<Emit>,
    /// Fit range, defaulting to [n0, n_max].
    pub fit_n_lo: Option<usize>,
    pub fit_n_hi: Option<usize>,
    /// First window end of the drift report.
    pub drift_first_hi: usize,
}

/// Starting degree when `n0` is not given: the lowest degree with a
/// coalescence for the compact kernels, 10 elsewhere.
pub fn default_n0(case: Case) -> usize {
    if case.is_compact() {
        4
    } else {
        10
    }
}

const DEFAULT_DRIFT_FIRST_HI: usize = 100;

fn required_params(case: Case) -> &'static [&'static str] {
    match case {
        Case::CompactConst | Case::CompactLinear => &["w"],
        Case::BesselSym | Case::ExpPlain => &["a"],
        Case::RamanujanTau | Case::DirichletFive => &["k"],
        Case::CompactCos | Case::RiemannTheta => &[],
    }
}

const OPTIONAL_PARAMS: [&str; 2] = ["series_terms", "x_cutoff_rel"];

fn err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| err(line, format!("{key}: cannot parse '{v}'")))
}

fn boolean(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(err(line, format!("{key}: expected true or false, got '{v}'"))),
    }
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"').and_then(|v| v.strip_suffix('"')).unwrap_or(v)
}

/// Builds a spec from `key=value` parameter pairs, requiring exactly the
/// parameters the case uses.
pub fn spec_from_params<'a>(case: Case, params: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<AFunctionSpec> {
    let mut spec = AFunctionSpec::new(case);
    let required = required_params(case);
    let mut seen = BTreeSet::new();
    for (k, v) in params {
        if !required.contains(&k) && !OPTIONAL_PARAMS.contains(&k) {
            return Err(Error::Config(format!("parameter '{k}' does not apply to {case}")));
        }
        if !seen.insert(k.to_string()) {
            return Err(Error::Config(format!("parameter '{k}' given twice")));
        }
        let parse_err = || Error::Config(format!("parameter {k}: cannot parse '{v}'"));
        match k {
            "w" => spec.w = v.parse().map_err(|_| parse_err())?,
            "a" => spec.a = v.parse().map_err(|_| parse_err())?,
            "k" => spec.k = v.parse().map_err(|_| parse_err())?,
            "series_terms" => spec.series_terms = v.parse().map_err(|_| parse_err())?,
            "x_cutoff_rel" => spec.x_cutoff_rel = v.parse().map_err(|_| parse_err())?,
            _ => unreachable!("filtered above"),
        }
    }
    if let Some(missing) = required.iter().find(|k| !seen.contains(**k)) {
        return Err(Error::Config(format!("{case} needs parameter '{missing}'")));
    }
    spec.validate()?;
    Ok(spec)
}

pub fn parse_case(name: &str) -> Result<Case> {
    Case::from_name(name).ok_or_else(|| {
        let all: Vec<&str> = Case::ALL.iter().map(|c| c.name()).collect();
        Error::Config(format!("unknown case '{name}' (expected one of {})", all.join(", ")))
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut case = None;
        let mut params: Vec<(String, String)> = Vec::new();
        let mut n0 = None;
        let mut n_max = None;
        let mut solver = SolverConfig::default();
        let mut output_dir = PathBuf::from("out");
        let mut emit = BTreeSet::from([Emit::Sequence]);
        let (mut fit_n_lo, mut fit_n_hi) = (None, None);
        let mut drift_first_hi = DEFAULT_DRIFT_FIRST_HI;
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| err(line, format!("expected key = value, got '{body}'")))?;
            let (key, value) = (key.trim(), unquote(value.trim()));
            if !seen.insert(key.to_string()) {
                return Err(err(line, format!("duplicate key '{key}'")));
            }
            let pkey = key.strip_prefix("params.").unwrap_or(key);
            if let Some(skey) = key.strip_prefix("solver.") {
                let s = &mut solver;
                match skey {
                    "tol_f" => s.tol_f = num(line, key, value)?,
                    "tol_df" => s.tol_df = num(line, key, value)?,
                    "max_newton_iters" => s.max_newton_iters = num(line, key, value)?,
                    "jump_scan_step" => s.jump_scan_step = Some(num(line, key, value)?),
                    "jump_scan_max" => s.jump_scan_max = Some(num(line, key, value)?),
                    "damping" => s.damping = num(line, key, value)?,
                    "seed_beta_hi" => s.seed_beta_hi = num(line, key, value)?,
                    "seed_beta_steps" => s.seed_beta_steps = num(line, key, value)?,
                    "joint_newton" => s.joint_newton = boolean(line, key, value)?,
                    "sign_trigger" => s.sign_trigger = boolean(line, key, value)?,
                    "asymptotic_mode" => s.asymptotic_mode = boolean(line, key, value)?,
                    "asymptotic_threshold" => s.asymptotic_threshold = num(line, key, value)?,
                    _ => return Err(err(line, format!("unknown solver key '{skey}'"))),
                }
                continue;
            }
            match key {
                "case" => case = Some(parse_case(value)?),
                "n0" => n0 = Some(num(line, key, value)?),
                "n_max" => n_max = Some(num(line, key, value)?),
                "output_dir" => output_dir = PathBuf::from(value),
                "emit" => {
                    emit = BTreeSet::new();
                    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        emit.insert(Emit::from_name(item).ok_or_else(|| err(line, format!("unknown emit '{item}'")))?);
                    }
                }
                "fit.n_lo" => fit_n_lo = Some(num(line, key, value)?),
                "fit.n_hi" => fit_n_hi = Some(num(line, key, value)?),
                "drift.first_hi" => drift_first_hi = num(line, key, value)?,
                _ if required_params_any(pkey) => params.push((pkey.to_string(), value.to_string())),
                _ => return Err(err(line, format!("unknown key '{key}'"))),
            }
        }
        let case = case.ok_or_else(|| Error::Config("missing key 'case'".into()))?;
        let spec = spec_from_params(case, params.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        let n_max = n_max.ok_or_else(|| Error::Config("missing key 'n_max'".into()))?;
        let n0 = n0.unwrap_or_else(|| default_n0(case));
        if n0 >= n_max {
            return Err(Error::Config(format!("n0 ({n0}) must be below n_max ({n_max})")));
        }
        solver.validate()?;
        if drift_first_hi == 0 {
            return Err(Error::Config("drift.first_hi must be positive".into()));
        }
        Ok(RunConfig {
            spec,
            n0,
            n_max,
            solver,
            output_dir,
            emit,
            fit_n_lo,
            fit_n_hi,
            drift_first_hi,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn settings(&self) -> RunSettings {
        RunSettings {
            n0: self.n0,
            n_max: self.n_max,
            solver: self.solver,
            output_dir: Some(self.output_dir.display().to_string()),
            emit: self.emit.iter().map(|e| e.name().to_string()).collect(),
            fit_n_lo: self.fit_n_lo,
            fit_n_hi: self.fit_n_hi,
            drift_first_hi: Some(self.drift_first_hi),
        }
    }
}

fn required_params_any(k: &str) -> bool {
    matches!(k, "w" | "a" | "k") || OPTIONAL_PARAMS.contains(&k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_dotted_and_flat_keys() {
        let c = RunConfig::parse(
            "# unit compact kernel\ncase = compact_const\nparams.w = 1.0\nn_max = 40 # short\nsolver.tol_f = 1e-12\nemit = sequence, fit\n",
        )
        .unwrap();
        assert_eq!(c.n0, 4);
        assert_eq!(c.solver.tol_f, 1e-12);
        assert_eq!(c.emit, BTreeSet::from([Emit::Sequence, Emit::Fit]));
        let d = RunConfig::parse("case = \"bessel_sym\"\na = 0.005\nn0 = 4\nn_max = 10\n").unwrap();
        assert_eq!(d.spec.a, 0.005);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "case = sinc\nn_max = 10\n",
            "case = compact_const\nn_max = 10\n",
            "case = compact_const\nw = 1\na = 2\nn_max = 10\n",
            "case = compact_const\nw = 1\nn0 = 10\nn_max = 10\n",
            "case = compact_const\nw = 1\nn_max = 10\nsolver.tol = 1\n",
            "case = compact_const\nw = 1\nn_max = 10\nn_max = 11\n",
            "case = compact_const\nw = 1\nn_max = ten\n",
            "case = compact_const\nw = 1\nn_max = 10\nemit = pictures\n",
        ] {
            assert!(matches!(RunConfig::parse(text), Err(Error::Config(_))), "{text}");
        }
    }
}
