//! Command-line front end for `pauli_qfi`: point evaluations, CSV sweeps,
//! verification suites and Monte Carlo runs.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid parameters or a failed
//! verification suite.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pauli_qfi::correlations::{discord_protocol, is_separable_ppt, rho_final_two_qubit, PPT_TOL};
use pauli_qfi::mc::{run_experiment, ExperimentConfig};
use pauli_qfi::protocol::{evaluate, ProtocolPoint};
use pauli_qfi::qfi::qfi_independent_opt;
use pauli_qfi::verify::{run_all, run_suite, Suite};
use rayon::prelude::*;

pub const CSV_HEADER: &str = "n,m,r,lambda,H_ind,H_corr,gain,discord,min_pt_eig,separable";

const SWEEP_ABOUT: &str = "\
Evaluate a (lambda, r) grid and write CSV.

Columns, in order:
  n, m, r, lambda   grid point
  H_ind             optimal independent-protocol QFI
  H_corr            correlated-protocol QFI (empty at r = 1)
  gain              H_corr / H_ind (empty at r = 0 and r = 1)
  discord           two-qubit discord in bits (n = 2 only)
  min_pt_eig        smallest partial-transpose eigenvalue (n = 2 only)
  separable         PPT verdict, true/false (n = 2 only)

Rows are lambda-major, then r. Numbers carry 12 significant digits.";

#[derive(Debug, Parser)]
#[command(
    name = "pauli-qfi",
    version,
    about = "Fisher information of mixed-state Pauli-channel estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate both protocols at one point.
    Qfi(QfiArgs),
    #[command(about = "Evaluate a (lambda, r) grid and write CSV", long_about = SWEEP_ABOUT)]
    Sweep(SweepArgs),
    /// Run the consistency suites and print one PASS/FAIL line each.
    Verify(VerifyArgs),
    /// Simulate y-basis measurements and compare the spread with the Cramer-Rao bound.
    Mc(McArgs),
}

#[derive(Debug, Args)]
pub struct QfiArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 0.95)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub lambda_step: f64,
    #[arg(long, default_value_t = 0.0)]
    pub r_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 0.02)]
    pub r_step: f64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One of oracle, bounds, coefficients, separability, discord, stationary, nmr,
    /// extended-channel, uprep. All suites when omitted.
    #[arg(long)]
    pub suite: Option<String>,
    /// Largest qubit count for the dense oracle comparison.
    #[arg(long, default_value_t = 5)]
    pub n_max: usize,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 100_000)]
    pub shots: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-trial estimates CSV; written to stdout when omitted, with the
    /// summary moved to stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Io(io::Error),
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Domain(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(e) => write!(f, "I/O error: {e}"),
            CliError::Domain(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<pauli_qfi::Error> for CliError {
    fn from(e: pauli_qfi::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Number with 12 significant digits in the shortest form that parses back
/// to the rounded value.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if a == 0.0 {
        "0".into()
    } else if (1e-5..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub n: usize,
    pub m: usize,
    pub r: f64,
    pub lambda: f64,
    pub h_ind: Option<f64>,
    pub h_corr: Option<f64>,
    pub gain: Option<f64>,
    pub discord: Option<f64>,
    pub min_pt_eig: Option<f64>,
    pub separable: Option<bool>,
}

impl SweepRecord {
    pub fn csv_row(&self) -> String {
        [
            self.n.to_string(),
            self.m.to_string(),
            fmt_num(self.r),
            fmt_num(self.lambda),
            opt_num(self.h_ind),
            opt_num(self.h_corr),
            opt_num(self.gain),
            opt_num(self.discord),
            opt_num(self.min_pt_eig),
            self.separable.map(|s| s.to_string()).unwrap_or_default(),
        ]
        .join(",")
    }
}

/// One grid point. Columns that need `r < 1` are left empty at `r = 1`.
pub fn sweep_record(n: usize, m: usize, r: f64, lambda: f64) -> CliResult<SweepRecord> {
    let mut rec = SweepRecord {
        n,
        m,
        r,
        lambda,
        h_ind: None,
        h_corr: None,
        gain: None,
        discord: None,
        min_pt_eig: None,
        separable: None,
    };
    if r == 1.0 {
        // validate n and m against a mixed point, then fill what r = 1 allows
        ProtocolPoint::new(n, m, 0.5, lambda)?;
        rec.h_ind = match qfi_independent_opt(r, lambda, m) {
            Ok(h) => Some(h),
            Err(pauli_qfi::Error::PureStateCorner) => None,
            Err(e) => return Err(e.into()),
        };
        return Ok(rec);
    }
    let eval = evaluate(&ProtocolPoint::new(n, m, r, lambda)?)?;
    rec.h_ind = Some(eval.h_ind);
    rec.h_corr = Some(eval.h_corr);
    rec.gain = eval.gain;
    if n == 2 {
        rec.discord = Some(discord_protocol(r, lambda, m)?.q);
        let ppt = is_separable_ppt(&rho_final_two_qubit(r, lambda, m)?, PPT_TOL)?;
        rec.min_pt_eig = Some(ppt.min_eigenvalue);
        rec.separable = Some(ppt.separable);
    }
    Ok(rec)
}

/// `min + k step` for every `k` with the value not above `max` (within a
/// relative 1e-9 of a step). Empty when `max < min`.
pub fn grid(name: &str, min: f64, max: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(step > 0.0 && step.is_finite() && min.is_finite() && max.is_finite()) {
        return Err(CliError::Domain(format!(
            "{name} range needs finite bounds and step > 0"
        )));
    }
    if max < min {
        return Ok(Vec::new());
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| min + k as f64 * step).collect())
}

fn open_output(path: Option<&Path>) -> CliResult<Option<BufWriter<File>>> {
    path.map(|p| File::create(p).map(BufWriter::new).map_err(CliError::Io))
        .transpose()
}

pub fn cmd_qfi(args: &QfiArgs, out: &mut dyn Write) -> CliResult<()> {
    let eval = evaluate(&ProtocolPoint::new(args.n, args.m, args.r, args.lambda)?)?;
    writeln!(
        out,
        "H_ind={} H_corr={} gain={} bound={}",
        fmt_num(eval.h_ind),
        fmt_num(eval.h_corr),
        eval.gain.map(fmt_num).unwrap_or_else(|| "undefined".into()),
        fmt_num(eval.bound.unwrap_or(f64::INFINITY)),
    )?;
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> CliResult<()> {
    let lambdas = grid("lambda", args.lambda_min, args.lambda_max, args.lambda_step)?;
    let rs = grid("r", args.r_min, args.r_max, args.r_step)?;
    let points: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| rs.iter().map(move |&r| (l, r)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(l, r)| sweep_record(args.n, args.m, r, l).map(|rec| rec.csv_row()))
        .collect::<CliResult<Vec<String>>>()?;

    let mut file = open_output(args.out.as_deref())?;
    let sink: &mut dyn Write = match file.as_mut() {
        Some(f) => f,
        None => out,
    };
    writeln!(sink, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(sink, "{row}")?;
    }
    sink.flush()?;
    Ok(())
}

/// Returns whether every suite passed.
pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> CliResult<bool> {
    let reports = match &args.suite {
        Some(name) => {
            let suite = Suite::from_name(name).ok_or_else(|| {
                let known: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                CliError::Domain(format!(
                    "unknown suite '{name}'; expected one of {}",
                    known.join(", ")
                ))
            })?;
            vec![run_suite(suite, args.n_max)?]
        }
        None => run_all(args.n_max)?,
    };
    for rep in &reports {
        writeln!(out, "{rep}")?;
    }
    Ok(reports.iter().all(|r| r.passed))
}

pub fn cmd_mc(args: &McArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let cfg = ExperimentConfig {
        r: args.r,
        lambda_true: args.lambda,
        m: args.m,
        trials: args.trials,
        shots_per_trial: args.shots,
        seed: args.seed,
    };
    let res = run_experiment(&cfg)?;
    let summary = format!(
        "mean={} variance={} crb={} ratio={} fisher={} clamped={}",
        fmt_num(res.mean),
        fmt_num(res.sample_variance),
        fmt_num(res.crb),
        fmt_num(res.variance_ratio()),
        fmt_num(res.fisher_classical),
        res.clamped
    );
    let mut file = open_output(args.out.as_deref())?;
    let (csv, summary_sink): (&mut dyn Write, &mut dyn Write) = match file.as_mut() {
        Some(f) => (f, out),
        None => (out, err),
    };
    writeln!(csv, "trial,lambda_hat")?;
    for (k, e) in res.estimates.iter().enumerate() {
        writeln!(csv, "{k},{}", fmt_num(*e))?;
    }
    csv.flush()?;
    writeln!(summary_sink, "{summary}")?;
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Qfi(a) => cmd_qfi(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Verify(a) => match cmd_verify(a, out) {
            Ok(true) => Ok(()),
            Ok(false) => Err(CliError::Domain("verification failed".into())),
            Err(e) => Err(e),
        },
        Command::Mc(a) => cmd_mc(a, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(1.6), "1.6");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0 * 1e-7), "6.66666666667e-8");
        assert_eq!(fmt_num(-0.25), "-0.25");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
    }

    #[test]
    fn grid_counts() {
        assert_eq!(grid("r", 0.0, 1.0, 0.02).unwrap().len(), 51);
        assert_eq!(grid("l", 0.05, 0.95, 0.01).unwrap().len(), 91);
        assert!(grid("l", 0.5, 0.4, 0.1).unwrap().is_empty());
        assert_eq!(grid("l", 0.3, 0.3, 0.1).unwrap(), vec![0.3]);
        assert!(grid("l", 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn edge_rows() {
        let pure = sweep_record(2, 1, 1.0, 0.3).unwrap();
        assert!(pure.h_ind.is_some() && pure.h_corr.is_none() && pure.gain.is_none());
        assert_eq!(pure.csv_row().matches(',').count(), 9);
        let corner = sweep_record(2, 1, 1.0, 0.0).unwrap();
        assert!(corner.h_ind.is_none());
        let flat = sweep_record(2, 1, 0.0, 0.3).unwrap();
        assert_eq!(flat.gain, None);
        assert_eq!(flat.h_corr, Some(0.0));
        let three = sweep_record(3, 2, 0.4, 0.2).unwrap();
        assert!(three.discord.is_none() && three.separable.is_none());
        assert!(three.csv_row().ends_with(",,,"));
        assert!(sweep_record(2, 3, 0.4, 0.2).is_err());
    }
}
