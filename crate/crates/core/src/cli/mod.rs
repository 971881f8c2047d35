//! Command-line front end: `solgeo check|surface|case|frame`.
//!
//! Exit codes: 0 every check passed, 1 a check failed, 2 usage or input
//! error.

mod commands;
pub mod config;
pub mod report;

pub use commands::{cmd_case, cmd_check, cmd_frame, cmd_surface};
pub use config::{FrameOpts, RunConfig, Tolerances};
pub use report::{Check, LevelStat, Report};

use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;

use crate::error::SolgeoError;
use config::{parse_kv_f64, parse_kv_path};

#[derive(Debug, Parser)]
#[command(name = "solgeo", version, about = "Zero-curvature, soliton-equation and surface checks on regular grids")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Residual, reduction, spectral-parameter or Lax checks.
    Check(CheckArgs),
    /// Reconstruct a surface from its fundamental forms.
    Surface(SurfaceArgs),
    /// Write the fields of a built-in case.
    Case(CaseArgs),
    /// Propagate a frame with constant coefficients.
    Frame(FrameArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Equation or case parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_kv_f64)]
    params: Vec<(String, f64)>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "KEY=VALUE", value_parser = parse_kv_f64)]
    tols: Vec<(String, f64)>,
    /// Points per axis at the coarsest level.
    #[arg(long)]
    n: Option<usize>,
    /// Number of refinement levels.
    #[arg(long)]
    refine: Option<usize>,
    /// Finite-difference order (2 or 4).
    #[arg(long)]
    accuracy: Option<usize>,
    /// Seed for randomised case data.
    #[arg(long)]
    seed: Option<u64>,
    /// Leave wall times out of the report.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
    /// Zero-curvature system, e.g. mlxii, bogomolny, sdym4.
    #[arg(long)]
    system: Option<String>,
    /// Soliton equation, e.g. ds, zi, ishimori, m3q.
    #[arg(long)]
    eq: Option<String>,
    /// Spectral-parameter kind: sdym_xi or mlxii_complex.
    #[arg(long)]
    lambda: Option<String>,
    /// Equation whose Lax pair is tested: zi or zii.
    #[arg(long)]
    lax: Option<String>,
    /// Built-in case supplying the fields.
    #[arg(long)]
    case: Option<String>,
    /// Input field file, repeatable.
    #[arg(long = "input", value_name = "NAME=PATH", value_parser = parse_kv_path)]
    inputs: Vec<(String, PathBuf)>,
    /// Derivatives for closed-form cases: analytic or fd.
    #[arg(long)]
    mode: Option<String>,
    /// Report path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SurfaceArgs {
    #[command(flatten)]
    common: Common,
    /// Built-in surface: plane, cylinder or sphere-patch.
    #[arg(long)]
    case: Option<String>,
    /// Fundamental-form field file, repeatable.
    #[arg(long = "input", value_name = "NAME=PATH", value_parser = parse_kv_path)]
    inputs: Vec<(String, PathBuf)>,
    /// OBJ mesh of the finest level.
    #[arg(long)]
    obj: Option<PathBuf>,
    /// Directory for the position field.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Report path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CaseArgs {
    #[command(flatten)]
    common: Common,
    name: String,
    /// Output directory.
    #[arg(long = "out")]
    out_dir: PathBuf,
    /// Report path (stdout when absent).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FrameArgs {
    #[command(flatten)]
    common: Common,
    /// Curvature.
    #[arg(long)]
    k: Option<f64>,
    /// Torsion.
    #[arg(long)]
    tau: Option<f64>,
    /// Third frame coefficient.
    #[arg(long)]
    sigma: Option<f64>,
    /// Signature of the first frame vector, +1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Step size.
    #[arg(long)]
    h: Option<f64>,
    /// Number of steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Frame vectors per step as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Report path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn merge_common(c: &Common, command: &str) -> Result<RunConfig, SolgeoError> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.command = command.to_string();
    cfg.params.extend(c.params.iter().cloned());
    cfg.set_tolerances(&c.tols)?;
    cfg.n = c.n.or(cfg.n);
    cfg.refine = c.refine.unwrap_or(cfg.refine);
    cfg.accuracy = c.accuracy.unwrap_or(cfg.accuracy);
    cfg.seed = c.seed.unwrap_or(cfg.seed);
    cfg.timing &= !c.no_timing;
    Ok(cfg)
}

fn set<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

fn execute(cmd: Cmd) -> Result<(Report, Option<PathBuf>), SolgeoError> {
    match cmd {
        Cmd::Check(a) => {
            let mut cfg = merge_common(&a.common, "check")?;
            set(&mut cfg.system, a.system);
            set(&mut cfg.eq, a.eq);
            set(&mut cfg.lambda, a.lambda);
            set(&mut cfg.lax, a.lax);
            set(&mut cfg.case, a.case);
            set(&mut cfg.mode, a.mode);
            set(&mut cfg.out, a.out);
            cfg.inputs.extend(a.inputs);
            Ok((cmd_check(&cfg)?, cfg.out))
        }
        Cmd::Surface(a) => {
            let mut cfg = merge_common(&a.common, "surface")?;
            set(&mut cfg.case, a.case);
            set(&mut cfg.obj, a.obj);
            set(&mut cfg.out_dir, a.out_dir);
            set(&mut cfg.out, a.out);
            cfg.inputs.extend(a.inputs);
            Ok((cmd_surface(&cfg)?, cfg.out))
        }
        Cmd::Case(a) => {
            let mut cfg = merge_common(&a.common, "case")?;
            cfg.case = Some(a.name);
            cfg.out_dir = Some(a.out_dir);
            set(&mut cfg.out, a.report);
            Ok((cmd_case(&cfg)?, cfg.out))
        }
        Cmd::Frame(a) => {
            let mut cfg = merge_common(&a.common, "frame")?;
            let f = &mut cfg.frame;
            f.k = a.k.unwrap_or(f.k);
            f.tau = a.tau.unwrap_or(f.tau);
            f.sigma = a.sigma.unwrap_or(f.sigma);
            f.beta = a.beta.unwrap_or(f.beta);
            f.h = a.h.unwrap_or(f.h);
            f.steps = a.steps.unwrap_or(f.steps);
            set(&mut cfg.csv, a.csv);
            set(&mut cfg.out, a.out);
            Ok((cmd_frame(&cfg)?, cfg.out))
        }
    }
}

/// Cap the global thread pool from `SOLGEO_THREADS`.
fn init_threads() -> Result<(), SolgeoError> {
    let Ok(v) = std::env::var("SOLGEO_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| SolgeoError::Domain(format!("SOLGEO_THREADS must be a positive integer, got '{v}'")))?;
    // a pool built earlier in the process keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn exit_code(e: &SolgeoError) -> i32 {
    match e {
        SolgeoError::Numerical(_) | SolgeoError::Constraint { .. } => 1,
        _ => 2,
    }
}

/// Parse arguments, run, write the report and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return 2;
    }
    match execute(cli.cmd).and_then(|(r, out)| r.write(out.as_deref()).map(|_| r)) {
        Ok(r) => {
            eprint!("{}", r.summary());
            if r.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
