//! Command-line entry point for the minimal-annulus toolkit.
//!
//! Exit codes: 0 all checks within tolerance, 1 a check failed, 2 invalid
//! configuration, 3 I/O error.

mod commands;
mod formats;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::BadConfig(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "annuli",
    about = "Finite-type minimal annuli: potentials, flows, spectral curves, dressing and surfaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Obj,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Projection {
    Ambient4,
    Stereo3,
}

/// Options shared by every subcommand.
#[derive(Args, Clone)]
pub struct CommonOpts {
    /// Input file (potential JSON or spectral-polynomial JSON).
    #[arg(long)]
    pub input: Option<String>,
    /// Output path for the main artifact; reports go to stdout otherwise.
    #[arg(long)]
    pub output: Option<String>,
    /// Algebraic tolerance for pass/fail decisions.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_alg: f64,
    /// PDE/quadrature tolerance for pass/fail decisions.
    #[arg(long, default_value_t = 1e-6)]
    pub tol_pde: f64,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Output format where applicable.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Grid specification "x0:x1:hx,y0:y1:hy".
#[derive(Args, Clone)]
pub struct GridOpt {
    #[arg(long, default_value = "0:1:0.01,0:1:0.01")]
    pub grid: String,
}

impl GridOpt {
    pub fn parse(&self) -> Result<annuli_core::flow::GridSpec, CliError> {
        let parts: Vec<&str> = self.grid.split(',').collect();
        if parts.len() != 2 {
            return Err(CliError::BadConfig(format!(
                "grid must be `x0:x1:hx,y0:y1:hy`, got `{}`",
                self.grid
            )));
        }
        let axis = |s: &str| -> Result<[f64; 3], CliError> {
            let v: Vec<&str> = s.split(':').collect();
            if v.len() != 3 {
                return Err(CliError::BadConfig(format!("bad grid axis `{s}`")));
            }
            let mut out = [0.0; 3];
            for (k, t) in v.iter().enumerate() {
                out[k] = t
                    .parse()
                    .map_err(|_| CliError::BadConfig(format!("bad number `{t}` in grid")))?;
            }
            if out[2] <= 0.0 {
                return Err(CliError::BadConfig("grid step must be positive".into()));
            }
            Ok(out)
        };
        let x = axis(parts[0])?;
        let y = axis(parts[1])?;
        Ok(annuli_core::flow::GridSpec {
            x0: x[0],
            x1: x[1],
            hx: x[2],
            y0: y[0],
            y1: y[1],
            hy: y[2],
        })
    }
}

/// Parses "re" or "re,im" into a complex number.
pub fn parse_c64(s: &str) -> Result<C64, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || CliError::BadConfig(format!("bad complex number `{s}` (use `re` or `re,im`)"));
    match parts.len() {
        1 => Ok(C64::new(parts[0].trim().parse().map_err(|_| bad())?, 0.0)),
        2 => Ok(C64::new(
            parts[0].trim().parse().map_err(|_| bad())?,
            parts[1].trim().parse().map_err(|_| bad())?,
        )),
        _ => Err(bad()),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate a potential file against the P_g(δ) invariants.
    Validate {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Print the Pinkall–Sterling hierarchy up to level N.
    Hierarchy {
        #[command(flatten)]
        common: CommonOpts,
        /// Number of levels to generate.
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Integrate the Lax flow and extended frame over a grid.
    Frame {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        grid: GridOpt,
        /// λ samples (repeatable), "re" or "re,im".
        #[arg(long = "lambda", allow_hyphen_values = true)]
        lambdas: Vec<String>,
    },
    /// Assemble and export the immersion at a unit-circle λ₀.
    Surface {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        grid: GridOpt,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        lambda0: String,
        #[arg(long, value_enum, default_value_t = Projection::Stereo3)]
        projection: Projection,
    },
    /// Solve the period-closing conditions for a spectral polynomial.
    Closing {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Apply the isospectral action with parameter t ∈ C^g.
    Flow {
        #[command(flatten)]
        common: CommonOpts,
        /// Components of t (repeatable), "re" or "re,im"; length must be g.
        #[arg(long = "t", allow_hyphen_values = true)]
        t: Vec<String>,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Dress a reduced potential with a simple factor, or move a bubbleton.
    Dress {
        #[command(flatten)]
        common: CommonOpts,
        /// The simple-factor pole α₀ (off the unit circle).
        #[arg(long, allow_hyphen_values = true)]
        alpha0: String,
        /// Line L′ as four reals "v0re,v0im,v1re,v1im"; when present the
        /// input is treated as the reduced potential and gets dressed.
        #[arg(long, allow_hyphen_values = true)]
        line: Option<String>,
        /// Bubbleton action parameter β.
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
    },
    /// Built-in presets of the circle-foliated family.
    Family {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        genus: usize,
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        c: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        d: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { common } => commands::validate(&common),
        Command::Hierarchy { common, levels } => commands::hierarchy(&common, levels),
        Command::Frame {
            common,
            grid,
            lambdas,
        } => commands::frame(&common, &grid, &lambdas),
        Command::Surface {
            common,
            grid,
            lambda0,
            projection,
        } => commands::surface(&common, &grid, &lambda0, projection),
        Command::Closing { common } => commands::closing(&common),
        Command::Flow { common, t, steps } => commands::iso_flow(&common, &t, steps),
        Command::Dress {
            common,
            alpha0,
            line,
            beta,
        } => commands::dress(&common, &alpha0, line.as_deref(), beta.as_deref()),
        Command::Family {
            common,
            genus,
            alpha,
            beta,
            c,
            d,
        } => commands::family(&common, genus, alpha, beta, c, d),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("annuli: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
