use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "heun-spectra",
    version,
    about = "Bound states of V(r) = A/r^4 - Z/r by shooting, Floquet connection and exact quasi-polynomial conditions"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the result to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Plain `key=value` file with defaults; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Shooting,
    Floquet,
    Both,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Shooting => "shooting",
            Method::Floquet => "floquet",
            Method::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    #[value(name = "1")]
    Levels,
    #[value(name = "2")]
    Laurent,
    #[value(name = "3")]
    Indices,
    #[value(name = "4")]
    Quasipoly,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy of the bound state with n nodes.
    Energy(EnergyArgs),
    /// Lowest levels over a grid of A and l.
    Spectrum(SpectrumArgs),
    /// Floquet indices, Laurent coefficients and connection data.
    Floquet(FloquetArgs),
    /// Normalised wave function samples.
    Wavefunction(WavefunctionArgs),
    /// Parameters admitting elementary (quasi-polynomial) solutions.
    Quasipoly(QuasipolyArgs),
    /// Recompute the bundled reference tables and report differences.
    Tables(TablesArgs),
    /// Cross-check one bound state with both solvers and invariants.
    Validate(StateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    /// Strength of the inverse-quartic term.
    #[arg(long = "A", allow_negative_numbers = true)]
    pub a: f64,
    /// Angular momentum.
    #[arg(long)]
    pub l: u32,
    /// Number of nodes.
    #[arg(long)]
    pub n: usize,
    /// Coulomb charge.
    #[arg(long = "Z", allow_negative_numbers = true)]
    pub z: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    /// Comma-separated values of A.
    #[arg(long = "A", value_delimiter = ',', required = true)]
    pub a: Vec<f64>,
    /// Comma-separated angular momenta.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub l: Vec<u32>,
    /// Number of levels per (A, l).
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[arg(long = "Z", allow_negative_numbers = true)]
    pub z: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
}

#[derive(Debug, Clone, Args)]
pub struct FloquetArgs {
    #[arg(long = "A", allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long)]
    pub l: u32,
    /// Energy at which to compute the indices.
    #[arg(
        long = "E",
        allow_negative_numbers = true,
        conflicts_with = "n",
        required_unless_present = "n"
    )]
    pub e: Option<f64>,
    /// Solve for the bound state with n nodes first.
    #[arg(long)]
    pub n: Option<usize>,
    /// Half-width of the printed coefficient window.
    #[arg(long = "N")]
    pub half_width: Option<usize>,
    #[arg(long = "Z", allow_negative_numbers = true)]
    pub z: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct WavefunctionArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long)]
    pub zmin: f64,
    #[arg(long)]
    pub zmax: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "log")]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Args)]
pub struct QuasipolyArgs {
    /// Degree plus one of the polynomial factor; fixes E = -Z^2/(4 p^2).
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub l: u32,
    #[arg(long = "Z", allow_negative_numbers = true)]
    pub z: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TablesArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub which: Which,
    /// Directory receiving the recomputed tables as CSV files.
    #[arg(long)]
    pub dir: Option<PathBuf>,
}
