//! Command-line surface. Every tunable is optional here so that a config file can supply it;
//! defaults are applied only after flags and file values are merged.

use clap::{Args, Parser, Subcommand, ValueEnum};
use nodal_core::zero_set_mc::CounterMethod;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "nodal", version, about = "Variance of random real algebraic zero sets")]
pub struct Cli {
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML file with one section per command; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Universal constants and the positivity table for all r <= n <= n-max.
    Constants(ConstantsArgs),
    /// D_{n,r}(t) over a t-grid.
    Dnr(CurveArgs),
    /// E[odet X odet Y] over a t-grid, next to its small- and large-t limits.
    Moments(CurveArgs),
    /// Kostlan ensemble: second chaos, root-count simulation, Kac-Rice variance, Crofton length.
    #[command(subcommand)]
    Kostlan(KostlanCommand),
    /// Deterministic identity suite of the limit covariance model.
    LimitCheck,
    /// Re-run a manifest and compare output bytes.
    Replay(ReplayArgs),
}

#[derive(Debug, Subcommand)]
pub enum KostlanCommand {
    Chaos(ChaosArgs),
    Simulate(SimulateArgs),
    Kacrice(KacriceArgs),
    Crofton(CroftonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Fresh samples at every grid point.
    Independent,
    /// One set of samples shared across the grid (smooth curves).
    Crn,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples_per_node: Option<u64>,
    #[arg(long)]
    pub nodes_per_panel: Option<usize>,
    #[arg(long)]
    pub panels: Option<usize>,
    #[arg(long)]
    pub t_split: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    /// `log:lo:hi:count`, `lin:lo:hi:count` or a comma list.
    #[arg(long)]
    pub t_grid: Option<String>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChaosArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    /// Degrees, comma separated; real values are allowed.
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<usize>>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// auto, companion or scan.
    #[arg(long)]
    pub method: Option<CounterMethod>,
    /// Also write root-count histograms as JSON.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub histogram: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KacriceArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<usize>>,
    #[arg(long)]
    pub samples_per_node: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also simulate this many root counts per degree and emit a comparison table (n = r = 1).
    #[arg(long)]
    pub with_simulation: Option<u64>,
    #[arg(long)]
    pub method: Option<CounterMethod>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CroftonArgs {
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<usize>>,
    #[arg(long)]
    pub samples: Option<u64>,
    /// Random lines per sampled curve.
    #[arg(long)]
    pub slices: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub method: Option<CounterMethod>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Where to write the regenerated outputs (default: next to the manifest).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
