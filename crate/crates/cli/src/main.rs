//! `slidegym` command-line driver.
//!
//! Exit codes: 0 on success, 1 on a domain error (unsolvable state, search
//! budget exhausted, ...), 2 on a configuration error (bad flags, missing
//! files, unreadable images).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use slidegym::GridDims;

use crate::config::RunArgs;

#[derive(Debug, Parser)]
#[command(name = "slidegym", version, about = "Sliding-puzzle environment engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate every reachable state by breadth-first search.
    Enumerate {
        #[arg(long, default_value = "3x3")]
        dims: GridDims,
        /// Directory for the JSON report and depth histogram.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Solve one state optimally with IDA*.
    Solve {
        /// State as `H,W:t0,t1,...` (row-major, 0 = blank).
        state: String,
        /// Node-expansion budget.
        #[arg(long, default_value_t = slidegym::solver::DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Run a policy on parallel environments and write logs and metrics.
    Play {
        #[command(flatten)]
        run: RunArgs,
        /// random, solver, memorizer, or scripted:<ACTION,...>.
        #[arg(long, default_value = "random")]
        policy: String,
        #[arg(long, default_value_t = slidegym::solver::DEFAULT_NODE_BUDGET)]
        budget: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Out-of-distribution evaluation on augmented and held-out images.
    EvalOod {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "solver")]
        policy: String,
        #[arg(long, default_value_t = slidegym::solver::DEFAULT_NODE_BUDGET)]
        budget: u64,
        /// Directory of unseen images for the hard protocol.
        #[arg(long)]
        heldout_dir: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Render a state on an image to PNG.
    Render {
        state: String,
        /// Source image path, or `-` for stdin.
        #[arg(long)]
        image: PathBuf,
        /// Output PNG path, or `-` for stdout.
        #[arg(long, default_value = "-")]
        out: PathBuf,
        #[arg(long)]
        render_size: Option<usize>,
        #[arg(long, default_value = "none")]
        augment: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// black, source, or noise:<seed>.
        #[arg(long, default_value = "black")]
        blank_fill: String,
    },
    /// Apply augmentations to a PNG.
    Augment {
        /// Comma-separated augmentations.
        augment: String,
        #[arg(long, default_value = "-")]
        input: PathBuf,
        #[arg(long, default_value = "-")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Export rendered observations with one-hot state labels.
    ExportProbe {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Enumerate { dims, out } => commands::enumerate(dims, &out),
        Command::Solve { state, budget } => commands::solve(&state, budget),
        Command::Play {
            run,
            policy,
            budget,
            out,
        } => commands::play(&run, &policy, budget, &out),
        Command::EvalOod {
            run,
            policy,
            budget,
            heldout_dir,
            out,
        } => commands::eval_ood(&run, &policy, budget, heldout_dir.as_deref(), &out),
        Command::Render {
            state,
            image,
            out,
            render_size,
            augment,
            seed,
            blank_fill,
        } => commands::render(&state, &image, &out, render_size, &augment, seed, &blank_fill),
        Command::Augment {
            augment,
            input,
            out,
            seed,
        } => commands::augment(&augment, &input, &out, seed),
        Command::ExportProbe { run, samples, out } => commands::export_probe(&run, samples, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
