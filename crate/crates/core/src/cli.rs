//! Command-line front end. Exit codes: 0 complete, 1 configuration or usage
//! error, 2 numerical failure or partial run. Every failure ends with one
//! JSON object on stderr.

use crate::afamily::eval_xi;
use crate::approximant::{all_roots, extract_poly, is_real_nonneg, t_roots};
use crate::coeffs::coeff_table;
use crate::config::{parse_case, spec_from_params, Emit, RunConfig};
use crate::diagnostics::{fit_drift, fit_log_power, fit_log_power_points, indicators_batch};
use crate::error::{Error, Result};
use crate::minseq::{read_checkpoint, resume, start_run, CheckpointHeader, RunStatus, SequenceRun};
use crate::output::{self, fmt_f64};
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const CHECKPOINT_FILE: &str = "checkpoint.jsonl";
pub const THREADS_ENV: &str = "BETASEQ_THREADS";

#[derive(Parser, Debug)]
#[command(name = "betaseq", version, about = "Minimal beta-sequences of Pochhammer approximants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a sequence from a config file.
    Run { config: PathBuf },
    /// Continue a run from its checkpoint.
    Resume {
        checkpoint: PathBuf,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Evaluate Ξ, Ξ' and Ξ*: `xi CASE [param=value ...] t=T[,T...]`.
    Xi { case: String, args: Vec<String> },
    /// All t-roots of Ξ_n at β: `roots CASE [param=value ...] n=N beta=B`.
    Roots { case: String, args: Vec<String> },
    /// Fit β_n = a·log(n+1)^p + c to a sequence CSV.
    Fit { csv: PathBuf, n_lo: usize, n_hi: usize },
    /// Indicator CSV for the points of a checkpoint.
    Indicators { checkpoint: PathBuf },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Usage(_) | Error::SeedFailed(_) | Error::Checkpoint { .. } | Error::Io(_) => 1,
        _ => 2,
    }
}

fn report(err: &mut dyn Write, e: &Error) -> i32 {
    let code = exit_code(e);
    let v = serde_json::json!({ "error": e.kind(), "message": e.to_string(), "exit_code": code });
    let _ = writeln!(err, "{v}");
    code
}

/// Sizes the global rayon pool from `BETASEQ_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Parses `args` and runs the command; returns the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{e}");
            return report(err, &Error::Usage(e.kind().to_string()));
        }
    };
    let res = match cli.command {
        Command::Run { config } => cmd_run(&config, out, err),
        Command::Resume { checkpoint, n_max } => cmd_resume(&checkpoint, n_max, out, err),
        Command::Xi { case, args } => cmd_xi(&case, &args, out),
        Command::Roots { case, args } => cmd_roots(&case, &args, out),
        Command::Fit { csv, n_lo, n_hi } => cmd_fit(&csv, n_lo, n_hi, out),
        Command::Indicators { checkpoint } => cmd_indicators(&checkpoint, out),
    };
    match res {
        Ok(code) => code,
        Err(e) => report(err, &e),
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn finish_run(run: &SequenceRun, header: &CheckpointHeader, dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    write_outputs(run, header, dir)?;
    let first = run.points.first().map_or(0, |p| p.n);
    let last = run.points.last().map_or(0, |p| p.n);
    writeln!(out, "{} n={first}..{last} jumps={:?}", run.spec.case, run.jump_indices).map_err(io)?;
    match &run.status {
        RunStatus::Complete => Ok(0),
        RunStatus::Partial { n, reason } => {
            let v = serde_json::json!({ "status": "partial", "n": n, "reason": reason, "exit_code": 2 });
            writeln!(err, "{v}").map_err(io)?;
            Ok(2)
        }
    }
}

pub fn cmd_run(config: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = RunConfig::load(config)?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::Io(format!("{}: {e}", cfg.output_dir.display())))?;
    let header = CheckpointHeader::new(&cfg.spec, cfg.settings());
    let run = start_run(&header, Some(&cfg.output_dir.join(CHECKPOINT_FILE)), &mut |_| {})?;
    finish_run(&run, &header, &cfg.output_dir, out, err)
}

pub fn cmd_resume(checkpoint: &Path, n_max: Option<usize>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let r = resume(checkpoint, n_max, &mut |_| {})?;
    if !r.advanced {
        writeln!(out, "nothing to do").map_err(io)?;
        return Ok(0);
    }
    let dir = checkpoint.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    finish_run(&r.run, &r.header, dir, out, err)
}

/// Writes the emitted outputs of a run into `dir`.
pub fn write_outputs(run: &SequenceRun, header: &CheckpointHeader, dir: &Path) -> Result<()> {
    let s = &header.config;
    let emit: Vec<Emit> = s.emit.iter().filter_map(|e| Emit::from_name(e)).collect();
    let pts = &run.points;
    if emit.contains(&Emit::Sequence) {
        output::write(dir, "sequence.csv", &output::sequence_csv(pts))?;
    }
    if emit.contains(&Emit::Plotdata) {
        output::write(dir, "beta_vs_n.dat", &output::plot_data(pts, |p| p.beta))?;
        output::write(dir, "t_vs_n.dat", &output::plot_data(pts, |p| p.t))?;
        output::write(dir, "u_vs_n.dat", &output::plot_data(pts, |p| p.u))?;
    }
    if emit.contains(&Emit::Indicators) {
        let ind = indicators_batch(&run.spec, pts)?;
        output::write(dir, "indicators.csv", &output::indicators_csv(&ind))?;
    }
    let last = pts.last().map_or(s.n0, |p| p.n);
    if emit.contains(&Emit::Fit) {
        let text = match fit_log_power(run, s.fit_n_lo.unwrap_or(s.n0), s.fit_n_hi.unwrap_or(last)) {
            Ok(f) => output::fit_report(&f),
            Err(e) => format!("error = {e}\n"),
        };
        output::write(dir, "fit.txt", &text)?;
    }
    if emit.contains(&Emit::Drift) {
        let text = match fit_drift(run, s.fit_n_lo.unwrap_or(s.n0), s.drift_first_hi.unwrap_or(100)) {
            Ok(d) => d.render(),
            Err(e) => format!("error = {e}\n"),
        };
        output::write(dir, "drift.txt", &text)?;
    }
    Ok(())
}

/// Splits `key=value` arguments.
fn pairs(args: &[String]) -> Result<Vec<(&str, &str)>> {
    args.iter()
        .map(|a| a.split_once('=').ok_or_else(|| Error::Usage(format!("expected key=value, got '{a}'"))))
        .collect()
}

fn take<'a>(kv: &mut Vec<(&'a str, &'a str)>, key: &str) -> Vec<&'a str> {
    let (hit, rest): (Vec<_>, Vec<_>) = kv.iter().partition(|(k, _)| *k == key);
    *kv = rest;
    hit.into_iter().map(|(_, v)| v).collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Usage(format!("{key}: cannot parse '{v}'")))
}

pub fn cmd_xi(case: &str, args: &[String], out: &mut dyn Write) -> Result<i32> {
    let mut kv = pairs(args)?;
    let ts: Vec<f64> = take(&mut kv, "t")
        .into_iter()
        .flat_map(|v| v.split(','))
        .map(|v| parse_num("t", v))
        .collect::<Result<_>>()?;
    if ts.is_empty() {
        return Err(Error::Usage("xi needs at least one t=...".into()));
    }
    let spec = spec_from_params(parse_case(case)?, kv)?;
    writeln!(out, "t,value,dvalue,star").map_err(io)?;
    for t in ts {
        let x = eval_xi(&spec, t)?;
        writeln!(out, "{},{},{},{}", fmt_f64(t), fmt_f64(x.value), fmt_f64(x.dvalue), fmt_f64(x.star)).map_err(io)?;
    }
    Ok(0)
}

pub fn cmd_roots(case: &str, args: &[String], out: &mut dyn Write) -> Result<i32> {
    let mut kv = pairs(args)?;
    let one = |vals: Vec<&str>, key: &str| -> Result<String> {
        match vals.as_slice() {
            [v] => Ok(v.to_string()),
            _ => Err(Error::Usage(format!("roots needs exactly one {key}=..."))),
        }
    };
    let n: usize = parse_num("n", &one(take(&mut kv, "n"), "n")?)?;
    let beta: f64 = parse_num("beta", &one(take(&mut kv, "beta"), "beta")?)?;
    let spec = spec_from_params(parse_case(case)?, kv)?;
    let table = coeff_table(&spec, n, beta, false)?;
    let poly = extract_poly(&table, n)?;
    let us = if poly.degree() == 0 { Vec::new() } else { all_roots(&poly)? };
    let mut ts = t_roots(&us);
    ts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    writeln!(out, "re,im").map_err(io)?;
    for z in &ts {
        writeln!(out, "{},{}", fmt_f64(z.re), fmt_f64(z.im)).map_err(io)?;
    }
    writeln!(out, "real_only={}", us.iter().all(|u| is_real_nonneg(*u))).map_err(io)?;
    Ok(0)
}

pub fn cmd_fit(csv: &Path, n_lo: usize, n_hi: usize, out: &mut dyn Write) -> Result<i32> {
    let text = std::fs::read_to_string(csv).map_err(|e| Error::Usage(format!("{}: {e}", csv.display())))?;
    let pts = output::read_sequence_csv(&text)?;
    let fit = fit_log_power_points(&pts, n_lo, n_hi)?;
    write!(out, "{}", output::fit_report(&fit)).map_err(io)?;
    Ok(0)
}

pub fn cmd_indicators(checkpoint: &Path, out: &mut dyn Write) -> Result<i32> {
    let ck = read_checkpoint(checkpoint)?;
    let ind = indicators_batch(&ck.header.spec(), &ck.points)?;
    write!(out, "{}", output::indicators_csv(&ind)).map_err(io)?;
    Ok(0)
}
