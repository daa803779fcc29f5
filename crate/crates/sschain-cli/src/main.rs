//! `sschain`: plot-ready data for self-similar chain dynamics.
//!
//! Five subcommands cover the library surface: `dispersion` samples the
//! lacunary dispersion curve to CSV, `fractal-dim` estimates its box-counting
//! dimension, `density` tabulates the low-frequency oscillator density,
//! `simulate` integrates chain waves and logs energy drift, and `continuum`
//! compares the scale series against its continuum approximation.
//!
//! Exit codes: 0 success, 2 validation failure (every violated constraint is
//! listed), 3 computational budget exhausted, 4 unstable time step, 1 i/o or
//! other runtime failure. Output files are written to a temporary file and
//! renamed into place, so a failing run never leaves partial output. Byte
//! output is deterministic for fixed inputs; `SSCHAIN_THREADS` caps sampling
//! parallelism without affecting results.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "sschain",
    version,
    about = "Self-similar chain toolkit: dispersion curves, fractal dimension, \
             oscillator density, wave simulation, continuum comparison"
)]
struct Cli {
    /// JSON file supplying defaults for any flag; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the chain dispersion curve omega^2(kh) to CSV.
    Dispersion(DispersionArgs),
    /// Estimate the box-counting dimension of the dispersion curve (JSON).
    FractalDim(FractalDimArgs),
    /// Tabulate the low-frequency oscillator density rho(omega) to CSV.
    Density(DensityArgs),
    /// Integrate chain waves; write snapshot CSVs and an energy log.
    Simulate(SimulateArgs),
    /// Compare the scale-series Laplacian against its continuum form (JSON).
    Continuum(ContinuumArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
pub enum SpacingArg {
    Linear,
    Log,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
pub enum IntegratorArg {
    /// Per-mode rotation, exact up to rounding; no step-size restriction.
    Exact,
    /// Velocity-Verlet on the truncated real-space force law.
    Verlet,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
pub enum FieldArg {
    Gaussian,
    Lorentzian,
    Constant,
}

#[derive(Args)]
pub struct DispersionArgs {
    /// Scale ratio N (> 1). Default 1.5.
    #[arg(long = "N")]
    pub n: Option<f64>,
    /// Scaling exponent delta, admissible in (0, 2).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Base length h (> 0). Default 1.
    #[arg(long)]
    pub h: Option<f64>,
    /// Smallest kh sampled. Default 0.
    #[arg(long)]
    pub kh_min: Option<f64>,
    /// Largest kh sampled. Default 30.
    #[arg(long)]
    pub kh_max: Option<f64>,
    /// Number of samples. Default 4096.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Sample spacing. Default linear.
    #[arg(long, value_enum)]
    pub spacing: Option<SpacingArg>,
    /// Relative tolerance of each certified value (absolute floor tol/1000).
    /// Default 1e-10.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output CSV path. Default dispersion.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct FractalDimArgs {
    /// Scale ratio N (> 1). Default 1.5.
    #[arg(long = "N")]
    pub n: Option<f64>,
    /// Scaling exponent delta, admissible in (0, 2).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Base length h (> 0). Default 1.
    #[arg(long)]
    pub h: Option<f64>,
    /// Smallest kh sampled. Default 0.01.
    #[arg(long)]
    pub kh_min: Option<f64>,
    /// Largest kh sampled. Default 100.
    #[arg(long)]
    pub kh_max: Option<f64>,
    /// Number of samples. Default 65536.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Sample spacing. Default log.
    #[arg(long, value_enum)]
    pub spacing: Option<SpacingArg>,
    /// Dyadic box-size levels in the count ladder. Default 10.
    #[arg(long)]
    pub scales: Option<usize>,
    /// Relative tolerance of each certified value (absolute floor tol/1000).
    /// Default 1e-6.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output JSON path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Estimate a straight line instead of the dispersion curve; the
    /// reported dimension must come out 1 if the counting pipeline is sound.
    #[arg(long)]
    pub selftest: bool,
}

#[derive(Args)]
pub struct DensityArgs {
    /// Scaling exponent delta, admissible in (0, 2).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Base length h (> 0). Default 1.
    #[arg(long)]
    pub h: Option<f64>,
    /// Continuum parameter epsilon in (0, 0.1]. Default 1e-3.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Smallest frequency tabulated. Default 0.
    #[arg(long)]
    pub omega_min: Option<f64>,
    /// Largest frequency tabulated. Default 1.
    #[arg(long)]
    pub omega_max: Option<f64>,
    /// Number of rows. Default 200.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Relative tolerance for the continuum constant. Default 1e-10.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output CSV path. Default density.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Periodic domain length. Default 40.
    #[arg(long = "L")]
    pub l: Option<f64>,
    /// Grid points, a power of two >= 8. Default 256.
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Scale ratio N (> 1). Default 1.5.
    #[arg(long = "N")]
    pub n: Option<f64>,
    /// Scaling exponent delta, admissible in (0, 2).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Base length h (> 0). Default 1.
    #[arg(long)]
    pub h: Option<f64>,
    /// Center of the initial Gaussian displacement packet. Default L/2.
    #[arg(long)]
    pub packet_center: Option<f64>,
    /// Width of the initial packet. Default 3.
    #[arg(long)]
    pub packet_width: Option<f64>,
    /// Amplitude of the initial packet; 0 gives the zero field. Default 1.
    #[arg(long)]
    pub packet_amplitude: Option<f64>,
    /// Time step. Default 0.05.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Number of steps. Default 1000.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Steps between snapshots. Default 100.
    #[arg(long)]
    pub snap_every: Option<usize>,
    /// Time integrator. Default exact.
    #[arg(long, value_enum)]
    pub integrator: Option<IntegratorArg>,
    /// Relative tolerance for mode frequencies (absolute floor tol/1000).
    /// Default 1e-10.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Directory receiving snapshot_NNNNNN.csv files and energy.json.
    /// Default sim-out.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct ContinuumArgs {
    /// Scaling exponent delta, admissible in (0, 2).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Base length h (> 0). Default 1.
    #[arg(long)]
    pub h: Option<f64>,
    /// Continuum parameter epsilon in (0, 0.1]. Default 1e-3.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Test field the operators act on. Default gaussian.
    #[arg(long, value_enum)]
    pub field: Option<FieldArg>,
    /// Evaluation point. Default 0.
    #[arg(long)]
    pub x: Option<f64>,
    /// Relative tolerance (absolute floor tol/1000). Default 1e-6.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output JSON path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// CLI failure: a library error (validation, budget, stability), an i/o
/// failure, or a malformed/incomplete configuration.
#[derive(Debug)]
pub enum CliError {
    Lib(sschain::Error),
    Io(std::io::Error),
    Config(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o failure: {e}"),
            CliError::Config(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<sschain::Error> for CliError {
    fn from(e: sschain::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(sschain::Error::BudgetExhausted { .. }) => 3,
            CliError::Lib(sschain::Error::UnstableDt { .. }) => 4,
            CliError::Lib(_) | CliError::Config(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match config::load(cli.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let outcome = match cli.command {
        Command::Dispersion(args) => commands::dispersion(args, &cfg),
        Command::FractalDim(args) => commands::fractal_dim(args, &cfg),
        Command::Density(args) => commands::density(args, &cfg),
        Command::Simulate(args) => commands::simulate(args, &cfg),
        Command::Continuum(args) => commands::continuum(args, &cfg),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
