mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::UsageError;

#[derive(Parser, Debug)]
#[command(
    name = "ropuf-tdma",
    version,
    about = "RO-PUF seeded PRBS slot assignment analysis"
)]
struct Cli {
    /// Print extra diagnostics to stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Collision probability for n = 1..=nodes at a given PRBS order.
    Collision {
        #[arg(long, default_value_t = 9)]
        order: u32,
        /// Largest node count in the table.
        #[arg(long, default_value_t = 40)]
        nodes: u64,
        /// Add a Monte Carlo estimate with this many trials per row.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Largest node count with collision probability below 0.5, per order.
    NodesSupported {
        #[arg(long, default_value_t = 5)]
        order_min: u32,
        #[arg(long, default_value_t = 17)]
        order_max: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Signature of every seed plus the windowed minimum deviation.
    SeedSweep {
        #[arg(long, default_value_t = 9)]
        order: u32,
        #[arg(long, default_value_t = ropuf_tdma::dispersion::DEFAULT_WINDOW)]
        window: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Windowed minimum deviation and cost scales across PRBS orders.
    CompareOrders {
        /// Comma-separated list of orders.
        #[arg(long, value_delimiter = ',', default_values_t = (5..=17).collect::<Vec<u32>>())]
        orders: Vec<u32>,
        #[arg(long, default_value_t = ropuf_tdma::dispersion::DEFAULT_WINDOW)]
        window: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the implant network simulation.
    Simulate(commands::SimulateArgs),
    /// Pairwise response of a traditional multi-RO PUF.
    RopufBaseline {
        /// Number of ring oscillators (M).
        #[arg(long, default_value_t = 9)]
        ros: usize,
        #[arg(long, default_value_t = ropuf_tdma::hardware::RO1_NOMINAL_HZ)]
        freq: f64,
        #[arg(long, default_value_t = ropuf_tdma::hardware::DEFAULT_SIGMA_FRACTION)]
        sigma: f64,
        /// Counting window in seconds.
        #[arg(long, default_value_t = 0.01)]
        count_window: f64,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Collision {
            order,
            nodes,
            trials,
            rng_seed,
            output,
        } => commands::collision(order, nodes, trials, rng_seed, &output),
        Command::NodesSupported {
            order_min,
            order_max,
            output,
        } => commands::nodes_supported(order_min, order_max, &output),
        Command::SeedSweep {
            order,
            window,
            output,
        } => commands::seed_sweep(order, window, &output),
        Command::CompareOrders {
            orders,
            window,
            output,
        } => commands::compare_orders(&orders, window, &output),
        Command::Simulate(args) => commands::simulate(&args, cli.verbose),
        Command::RopufBaseline {
            ros,
            freq,
            sigma,
            count_window,
            rng_seed,
            output,
        } => commands::ropuf_baseline(ros, freq, sigma, count_window, rng_seed, &output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
