//! Batch front end: argument parsing, configuration, and report files.
//!
//! Exit codes: 0 when every assertion of the run holds, 2 when one fails
//! (or a numerical routine errors out), 1 for usage, configuration and i/o
//! errors.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{execute, Outcome};
pub use config::ExperimentConfig;

use crate::error::LabError;
use crate::solvers::Geometry;

#[derive(Debug, Parser)]
#[command(name = "ma-lab", version, about = "Monge-Ampère energy laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Damped fixed point for (dd^c u)^n = k e^{-u} dV / ∫ e^{-u} dV.
    Solve,
    /// Fixed-point runs over a list of k.
    KScan,
    /// Projected descent on F = e/(n+1) - ln ∫ e^{-u} dV (k = 1, radial).
    Variational,
    /// Inequality checks on seeded samples.
    InequalitySuite,
    /// Mollify-and-solve approximation of a circle measure.
    ApproxDemo,
    /// Truncated densities min(f, j) for f = 1/|z|.
    TruncationDemo,
    /// Sup-norm stability of the planar Dirichlet problem.
    StabilityProbe,
    /// Fixed-point against variational solution at k = 1.
    CrossCheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::KScan => "k-scan",
            Command::Variational => "variational",
            Command::InequalitySuite => "inequality-suite",
            Command::ApproxDemo => "approx-demo",
            Command::TruncationDemo => "truncation-demo",
            Command::StabilityProbe => "stability-probe",
            Command::CrossCheck => "cross-check",
        }
    }
}

/// Comma-separated floats; a newtype so that clap treats it as one value.
#[derive(Debug, Clone)]
struct FloatList(Vec<f64>);

fn parse_list(s: &str) -> Result<FloatList, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(FloatList)
}

/// Flags override the values from `--config`, which override the defaults.
#[derive(Debug, Args)]
struct Flags {
    /// JSON file with any subset of the configuration fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    /// radial | planar-disk
    #[arg(long, global = true)]
    geometry: Option<String>,
    #[arg(long, global = true)]
    k: Option<f64>,
    /// Comma-separated list.
    #[arg(long, global = true, value_parser = parse_list)]
    k_list: Option<FloatList>,
    #[arg(long, global = true)]
    eta: Option<f64>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    t_min: Option<f64>,
    #[arg(long, global = true)]
    nodes: Option<usize>,
    #[arg(long, global = true)]
    resolution: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// holder-p1 | holder-p2 | mass-holder | subadditivity | exp-energy |
    /// exp-mass | m1 | l1-family | all
    #[arg(long, global = true)]
    suite: Option<String>,
    #[arg(long, global = true)]
    b: Option<f64>,
    #[arg(long, global = true, value_parser = parse_list)]
    eps_list: Option<FloatList>,
    #[arg(long, global = true, value_parser = parse_list)]
    levels: Option<FloatList>,
    /// Output directory for the JSON and CSV reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

fn effective_config(command: Command, flags: Flags) -> Result<ExperimentConfig, LabError> {
    let mut c = match &flags.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    c.command = command.name().to_string();
    if let Some(g) = flags.geometry {
        c.geometry = g.parse::<Geometry>()?;
    }
    macro_rules! set {
        ($($flag:ident => $($field:ident).+),* $(,)?) => {
            $(if let Some(v) = flags.$flag { c.$($field).+ = v; })*
        };
    }
    set!(
        n => n, k => k, eta => eta, max_iter => max_iter,
        t_min => grid.t_min, nodes => grid.nodes, resolution => grid.resolution,
        seed => seed, samples => samples, suite => suite, b => b,
        out => output,
    );
    for (flag, field) in [
        (flags.k_list, &mut c.k_list),
        (flags.eps_list, &mut c.eps_list),
        (flags.levels, &mut c.levels),
    ] {
        if let Some(FloatList(v)) = flag {
            *field = v;
        }
    }
    if let Some(t) = flags.tol {
        c.tol = Some(t);
    }
    c.validate()?;
    Ok(c)
}

/// Parses `args` (program name first), runs the command, writes the reports
/// and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let config = match effective_config(cli.command, cli.flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let outcome = match execute(&config) {
        Ok(o) => o,
        Err(e @ (LabError::InvalidArgument(_) | LabError::Unsupported(_))) => {
            eprintln!("error: {e}");
            return 1;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = outcome.write(&config.output, &config.command, &config) {
        eprintln!("error: {e}");
        return 1;
    }
    for line in &outcome.summary {
        println!("{line}");
    }
    if outcome.passed {
        0
    } else {
        2
    }
}
