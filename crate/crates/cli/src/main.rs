//! `cbs`: compute, verify and sweep operator-sum norm bounds.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error,
//! 3 numerical failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use cbs_core::bounds::{self, DEFAULT_GRID};
use cbs_core::harness::{self, InstanceKind, InstanceSpec, VerifyOptions};
use cbs_core::io::{self, InputDigest, IoError, Mode, Problem, ReportDocument};
use cbs_core::vectors;
use cbs_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cbs", version, about = "Norm bounds for weighted sums of complex operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the full bound catalog on a problem file.
    Bound {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[command(flatten)]
        common: Common,
        /// Also write the loaded problem back out.
        #[arg(long)]
        echo: Option<PathBuf>,
    },
    /// Check every inequality on a problem file or a generated instance.
    Verify {
        #[arg(long, conflicts_with_all = ["kind", "dim", "count"])]
        input: Option<PathBuf>,
        #[arg(long, value_enum, requires = "input")]
        mode: Option<ModeArg>,
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Write catalog slack ratios for a run of seeded instances as CSV.
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        /// Number of consecutive seeds, starting at --seed.
        #[arg(long, default_value_t = 1)]
        instances: u64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Hölder exponents, comma-separated.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Relative tolerance for norm comparisons.
    #[arg(long, default_value_t = harness::DEFAULT_VERIFY_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpecArgs {
    #[arg(long)]
    kind: Option<InstanceKind>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Operators,
    Vectors,
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Bound {
            input,
            mode,
            common,
            echo,
        } => cmd_bound(&input, mode, &common, echo.as_ref()),
        Command::Verify {
            input,
            mode,
            spec,
            common,
        } => cmd_verify(input.as_ref(), mode, &spec, &common),
        Command::Sweep {
            spec,
            instances,
            common,
        } => cmd_sweep(&spec, instances, &common),
    }
}

fn grid(common: &Common) -> Result<Vec<f64>, Failure> {
    let g = common.grid.clone().unwrap_or_else(|| DEFAULT_GRID.to_vec());
    bounds::holder_grid(&g)?;
    Ok(g)
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Failure::Input(format!("--tol must be positive, got {tol}")))
    }
}

fn load(input: &PathBuf, mode: Option<ModeArg>) -> Result<(io::ProblemFile, Problem), Failure> {
    let file = io::load_problem(input)?;
    let expected = mode.map(|m| match m {
        ModeArg::Operators => Mode::Operators,
        ModeArg::Vectors => Mode::Vectors,
    });
    if let (Some(want), Some(got)) = (expected, file.mode()) {
        if want != got {
            return Err(Failure::Input(format!(
                "--mode {} given, but the file is in {} mode",
                want.as_str(),
                got.as_str()
            )));
        }
    }
    let problem = file.to_problem()?;
    Ok((file, problem))
}

fn emit(text: &[u8], out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text)
                .map_err(|e| Failure::Input(format!("stdout: {e}")))
        }
    }
}

fn cmd_bound(input: &PathBuf, mode: Option<ModeArg>, common: &Common, echo: Option<&PathBuf>) -> Outcome {
    check_tol(common.tol)?;
    let grid = grid(common)?;
    let (file, problem) = load(input, mode)?;
    if let Some(path) = echo {
        io::write_problem(&file, path)?;
    }
    let catalog = match &problem {
        Problem::Operators { weights, family } => bounds::catalog(weights, family, &grid)?,
        Problem::Vectors { weights, family, .. } => vectors::gram_catalog(weights, family, 1.0, &grid)?,
    };
    let report = ReportDocument::for_bounds(InputDigest::for_problem(&problem), &catalog, common.tol);
    emit(report.to_json()?.as_bytes(), common.out.as_ref())?;
    Ok(true)
}

fn spec_from(args: &SpecArgs) -> Result<InstanceSpec, Failure> {
    match (args.kind, args.dim, args.count) {
        (Some(kind), Some(dim), Some(count)) => {
            let spec = InstanceSpec::new(kind, dim, count, args.seed);
            spec.validate()?;
            Ok(spec)
        }
        _ => Err(Failure::Input("--kind, --dim and --count are all required".into())),
    }
}

fn cmd_verify(input: Option<&PathBuf>, mode: Option<ModeArg>, args: &SpecArgs, common: &Common) -> Outcome {
    check_tol(common.tol)?;
    let opts = VerifyOptions {
        tol: common.tol,
        grid: grid(common)?,
        probe_seed: args.seed,
        ..VerifyOptions::default()
    };
    let report = match input {
        Some(path) => {
            let (_, problem) = load(path, mode)?;
            let result = match &problem {
                Problem::Operators { weights, family } => harness::verify_instance(weights, family, &opts)?,
                Problem::Vectors { weights, family, .. } => harness::verify_vectors(weights, family, &opts)?,
            };
            ReportDocument::for_verification(InputDigest::for_problem(&problem), &result)
        }
        None => {
            let spec = spec_from(args)?;
            let result = harness::verify_spec(&spec, &opts)?;
            ReportDocument::for_verification(InputDigest::for_spec(&spec), &result)
        }
    };
    emit(report.to_json()?.as_bytes(), common.out.as_ref())?;
    Ok(report.all_hold)
}

fn cmd_sweep(args: &SpecArgs, instances: u64, common: &Common) -> Outcome {
    let grid = grid(common)?;
    let base = spec_from(args)?;
    let specs: Vec<InstanceSpec> = (0..instances)
        .map(|k| InstanceSpec {
            seed: base.seed.wrapping_add(k),
            ..base
        })
        .collect();
    let rows = harness::slack_sweep(&specs, &grid)?;
    let mut buf = Vec::new();
    harness::write_sweep_csv(&rows, &mut buf).map_err(|e| Failure::Input(e.to_string()))?;
    emit(&buf, common.out.as_ref())?;
    Ok(true)
}
