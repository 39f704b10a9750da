use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "hpl", version, about = "Optimal pointers for joint σx/σz measurement by homodyne detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recompute the reported constants and compare them with the published values.
    Reproduce {
        /// Horizon parameter β = √(1 − e^{−t}); references only apply at 1.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        json: bool,
    },
    /// Write a density grid as CSV.
    Density {
        /// endpoint, pointer_x or pointer_z
        #[arg(long)]
        which: String,
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value_t = hpl_core::pointer_density::FIGURE_NODES)]
        n: usize,
        /// Horizon t; omit for t → ∞.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample endpoints and write them with a summary.
    Simulate {
        /// endpoint_exact or filter_paths
        #[arg(long)]
        method: String,
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = hpl_core::simulate::DEFAULT_DT)]
        dt: f64,
        #[arg(long, default_value_t = hpl_core::simulate::DEFAULT_T)]
        t: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the oracle suites.
    Verify {
        /// fast or full
        #[arg(long, default_value = "fast")]
        level: String,
        #[arg(long)]
        json: bool,
        #[arg(long, hide = true, default_value_t = 0.0)]
        perturb_i: f64,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct StateArgs {
    /// Bloch vector "px,py,pz".
    #[arg(long, allow_hyphen_values = true)]
    pub bloch: Option<String>,
    /// minus_x, plus_x, up_z (excited), down_z (ground) or tracial.
    #[arg(long)]
    pub preset: Option<String>,
}
