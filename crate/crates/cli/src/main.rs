//! `uqcm`: fidelity tables, machine-equivalence checks, asymmetric sweeps and
//! the summation-identity grid, as JSON or CSV.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 bad usage or I/O error.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use uqcm::fidelity::fidelity_table;
use uqcm::machines::{CloneSpec, MachineKind};
use uqcm::parallel::with_jobs;
use uqcm::verify::{
    asymmetric_point, asymmetric_sweep, identity_grid, is_monotone_tradeoff, sweep_ratios,
    verify_equivalence, IdentityGrid, EQUIVALENCE_TOL,
};

use report::{IdentityCheckReport, Report, SweepReport, TableReport};

#[derive(Debug, Parser)]
#[command(name = "uqcm", version, about = "Universal quantum cloning machines: numeric checks and closed forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Output encoding.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write here instead of stdout. Relative paths resolve against
    /// UQCM_OUT_DIR when it is set.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Default output directory; without --output, reports go to
    /// `<dir>/<command>.<format>`.
    #[arg(long, env = "UQCM_OUT_DIR", global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially. Defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Args)]
struct SpecArgs {
    /// Qudit dimension.
    #[arg(long = "d")]
    d: usize,
    /// Number of input copies.
    #[arg(long = "n")]
    n: usize,
    /// Number of output copies.
    #[arg(long = "m")]
    m: usize,
}

impl SpecArgs {
    fn spec(&self) -> uqcm::Result<CloneSpec> {
        CloneSpec::new(self.d, self.n, self.m)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// F_L for L = 1..M, numeric and closed form.
    Table {
        #[command(flatten)]
        spec: SpecArgs,
        /// Report only this L.
        #[arg(long = "l")]
        l: Option<usize>,
        #[arg(long, default_value = "unified")]
        machine: MachineKind,
        /// Largest accepted |numeric - closed|.
        #[arg(long, default_value_t = EQUIVALENCE_TOL)]
        tolerance: f64,
    },
    /// Compare the three machines, their dense forms and covariance on random inputs.
    Verify {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Largest accepted distance.
        #[arg(long, default_value_t = EQUIVALENCE_TOL)]
        tolerance: f64,
    },
    /// Single-copy fidelities of the asymmetric 1 -> 2 machine.
    AsymSweep {
        #[arg(long = "d")]
        d: usize,
        /// Weight on the first output; with --beta, evaluates one point.
        #[arg(long, requires = "beta", conflicts_with_all = ["sweep_points", "max_ratio"])]
        alpha: Option<f64>,
        #[arg(long, requires = "alpha")]
        beta: Option<f64>,
        /// Number of beta/alpha ratios in the sweep.
        #[arg(long, default_value_t = 21)]
        sweep_points: usize,
        /// Largest beta/alpha ratio in the sweep.
        #[arg(long, default_value_t = 2.0)]
        max_ratio: f64,
    },
    /// Check the single-copy summation identity exactly over a grid.
    IdentityCheck {
        #[arg(long, default_value_t = 5)]
        max_n: usize,
        #[arg(long, default_value_t = 5)]
        max_m: usize,
        #[arg(long, default_value_t = 4)]
        max_d: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Table { .. } => "table",
            Command::Verify { .. } => "verify",
            Command::AsymSweep { .. } => "asym-sweep",
            Command::IdentityCheck { .. } => "identity-check",
        }
    }
}

enum Failure {
    Usage(String),
}

impl From<uqcm::Error> for Failure {
    fn from(e: uqcm::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn run_command(command: &Command, seed: u64, mode: uqcm::Execution) -> Result<Report, Failure> {
    Ok(match command {
        Command::Table { spec, l, machine, tolerance } => {
            let spec = spec.spec()?;
            if let Some(l) = *l {
                if l < 1 || l > spec.m() {
                    return Err(Failure::Usage(format!("--l must be in 1..={}, got {l}", spec.m())));
                }
            }
            let mut table = fidelity_table(&spec, None, *machine, seed, mode)?;
            if let Some(l) = *l {
                table.rows.retain(|r| r.l == l);
            }
            Report::Table(TableReport::new(table, *tolerance))
        }
        Command::Verify { spec, trials, tolerance } => {
            let mut report = verify_equivalence(&spec.spec()?, *trials, seed, mode)?;
            report.tolerance = *tolerance;
            report.passed = report.max_distance < *tolerance;
            if let Some(w) = &report.warning {
                eprintln!("warning: {w}");
            }
            Report::Verify(report)
        }
        Command::AsymSweep { d, alpha, beta, sweep_points, max_ratio } => {
            CloneSpec::new(*d, 1, 2)?;
            let points = match (alpha, beta) {
                (Some(a), Some(b)) => vec![asymmetric_point(*d, *a, *b, seed)?],
                _ => asymmetric_sweep(*d, &sweep_ratios(*sweep_points, *max_ratio)?, seed, mode)?,
            };
            let monotone = (points.len() > 1).then(|| is_monotone_tradeoff(&points));
            Report::Sweep(SweepReport { d: *d, seed, monotone, points })
        }
        Command::IdentityCheck { max_n, max_m, max_d } => {
            let grid = IdentityGrid { max_n: *max_n, max_m: *max_m, max_d: *max_d };
            Report::Identity(IdentityCheckReport::new(grid, identity_grid(&grid, mode)?))
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = &cli.common;
    let result = match common.jobs {
        Some(jobs) => with_jobs(jobs, |mode| run_command(&cli.command, common.seed, mode))
            .map_err(Failure::from)
            .and_then(|r| r),
        None => run_command(&cli.command, common.seed, uqcm::Execution::default()),
    };
    let report = match result {
        Ok(r) => r,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };

    let destination = match (&common.output, &common.out_dir) {
        (Some(path), Some(dir)) if path.is_relative() => Some(dir.join(path)),
        (Some(path), _) => Some(path.clone()),
        (None, Some(dir)) => Some(dir.join(format!("{}.{}", cli.command.name(), common.format.extension()))),
        (None, None) => None,
    };
    if let Err(e) = report.write(common.format, destination.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        eprintln!("verification failed");
        ExitCode::from(1)
    }
}
