use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "dlambda", version, about = "Forward double-Λ frequency conversion: protocols, efficiencies, checks")]
pub struct Cli {
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads; defaults to the available parallelism. Never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// RK4 steps per unit optical depth (at least 1).
    #[arg(long, global = true, default_value_t = 10.0)]
    pub steps_per_unit: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate the fields through the medium and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Write conversion efficiency against optical density as CSV.
    Efficiency(EfficiencyArgs),
    /// Run the cross-check suite and write a JSON report.
    Verify(VerifyArgs),
    /// Direct search over piecewise-linear mixing-angle profiles.
    Search(SearchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum ProtocolKind {
    Optimal,
    Constant,
    Adiabatic,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Closed,
    Numeric,
    Both,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Centre of the logistic ramp; α/2 when omitted.
    #[arg(long)]
    pub zeta0: Option<f64>,

    /// Width of the logistic ramp; α/20 when omitted.
    #[arg(long)]
    pub zbar: Option<f64>,

    /// Two-column ζ θ table for the custom protocol.
    #[arg(long)]
    pub profile_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "optimal")]
    pub protocol: ProtocolKind,

    /// Optical density; for a custom profile, the table's last ζ when omitted.
    #[arg(long)]
    pub alpha: Option<f64>,

    #[command(flatten)]
    pub profile: ProfileArgs,
}

#[derive(Debug, Args)]
pub struct EfficiencyArgs {
    /// Protocols to include, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "optimal,constant")]
    pub protocol: Vec<ProtocolKind>,

    /// Smallest α; alpha-max / alpha-steps when omitted.
    #[arg(long)]
    pub alpha_min: Option<f64>,

    #[arg(long, default_value_t = 100.0)]
    pub alpha_max: f64,

    #[arg(long, default_value_t = 200)]
    pub alpha_steps: usize,

    #[arg(long, value_enum, default_value = "both")]
    pub method: Method,

    #[command(flatten)]
    pub profile: ProfileArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Optical densities to check, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
    pub alpha: Vec<f64>,

    /// Seed for the random-profile dominance check.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Random profiles per optical density.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 100.0)]
    pub alpha: f64,

    #[arg(long, default_value_t = 64)]
    pub segments: usize,

    /// Total objective evaluations across all starts.
    #[arg(long, default_value_t = 40_000)]
    pub budget: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Where to write the best profile table; next to --out as
    /// `<stem>.profile.txt` when omitted.
    #[arg(long)]
    pub profile_out: Option<PathBuf>,
}
