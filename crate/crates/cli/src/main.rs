// `!(x > 0.0)` is the idiom that also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use meandim_core::spaces::DEFAULT_POINT_BUDGET;

use output::Status;

#[derive(Parser, Debug)]
#[command(name = "meandim", version, about = "Mean dimension with potential on finite periodic models")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every randomized routine; overrides a scenario's own seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Largest number of points a system may have.
    #[arg(long, global = true, default_value_t = DEFAULT_POINT_BUDGET)]
    pub budget: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Greedy,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricArg {
    Max,
    Avg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariantArg {
    Small,
    Standard,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodebookArg {
    Orbit,
    Full,
    File,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyArg {
    Balls,
    Subsets,
}

/// A config file path, or inline JSON when the value starts with `{`.
pub type ConfigArg = String;

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Covering numbers with potential on (d_N, S_N phi).
    Cover {
        #[arg(long)]
        system: ConfigArg,
        #[arg(long)]
        phi: ConfigArg,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hausdorff dimension at scale on (d_N or the average metric, S_N phi).
    Hausdorff {
        #[arg(long)]
        system: ConfigArg,
        #[arg(long)]
        phi: ConfigArg,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, value_enum, default_value = "max")]
        metric: MetricArg,
        /// A number, or `auto` for the smallest positive distance.
        #[arg(long, default_value = "auto")]
        grain: String,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nerve-based upper bounds on the width dimension with potential.
    Widim {
        #[arg(long)]
        system: ConfigArg,
        #[arg(long)]
        phi: ConfigArg,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, value_enum, default_value = "standard")]
        variant: VariantArg,
        /// Candidate families up to this size are searched exhaustively.
        #[arg(long, default_value_t = meandim_core::nerve::DEFAULT_EXHAUSTIVE_SETS)]
        exhaustive_sets: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rate-distortion curves by Blahut-Arimoto.
    Rd {
        #[arg(long)]
        system: ConfigArg,
        #[arg(long)]
        measure: ConfigArg,
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long, value_enum, default_value = "orbit")]
        codebook: CodebookArg,
        /// JSON file `{"schema_version": 1, "tuples": [[id, ...], ...]}` for `--codebook file`.
        #[arg(long)]
        codebook_file: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frostman measure by linear programming, with the dual fractional cover.
    Frostman {
        #[arg(long)]
        system: ConfigArg,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        grain: f64,
        #[arg(long, value_enum, default_value = "balls")]
        family: FamilyArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dynamical Voronoi tiling chart around one point.
    Tiling {
        #[arg(long)]
        system: ConfigArg,
        #[arg(long)]
        psi: ConfigArg,
        #[arg(long)]
        point: String,
        #[arg(long)]
        horizon: i64,
        /// Also check equivariance under this shift in exact arithmetic.
        #[arg(long)]
        shift: Option<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a scenario and checks the inequality chain cell by cell.
    VerifyChain {
        #[arg(long)]
        scenario: PathBuf,
        /// Only this block length.
        #[arg(long = "N")]
        n: Option<usize>,
        /// Only this scale.
        #[arg(long)]
        eps: Option<f64>,
        /// Overrides the scenario's output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Quantized Hilbert-cube example with potential x_0.
    ExampleHilbert {
        #[arg(long, default_value_t = 16)]
        levels: usize,
        #[arg(long, default_value_t = 5)]
        period: usize,
        #[arg(long, default_value_t = 12)]
        window: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        k: Vec<usize>,
        /// Number of scales strictly between 1/levels and 0.2.
        #[arg(long, default_value_t = 8)]
        grid: usize,
        #[arg(long, default_value = "out/hilbert")]
        out_dir: PathBuf,
    },
    /// Quick end-to-end checks of every module against closed forms and brute force.
    Selftest {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli.global, &cli.command) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Violations) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
