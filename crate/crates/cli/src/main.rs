use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use domd_core::algorithms::Algorithm;
use domd_core::config::ExperimentConfig;
use domd_core::exec::Executor;
use domd_core::trace;

#[derive(Parser)]
#[command(name = "domd", version, about = "Distributed online mirror descent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSV trace.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// madgc, single or central.
        #[arg(long)]
        algo: Option<String>,
        /// LIBSVM file; overrides `dataset`.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            seed,
            algo,
            dataset,
        } => {
            let mut cfg = ExperimentConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
            if let Some(dir) = out {
                cfg.out_dir = dir;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(name) = algo {
                cfg.algorithm = name.parse::<Algorithm>()?;
            }
            if let Some(path) = dataset {
                cfg.dataset = Some(path);
            }
            let done = trace::execute(&cfg, &Executor::from_env())?;
            let last = done.output.rows.last().and_then(|r| r.diagnostics.as_ref());
            match last {
                Some(d) => println!(
                    "{}: T={} cum_regret_y={:.6e} C_T={:.6e}",
                    done.path.display(),
                    done.output.rows.len(),
                    d.cumulative_regret_y,
                    d.path_length_so_far
                ),
                None => println!("{}: T={}", done.path.display(), done.output.rows.len()),
            }
            Ok(())
        }
    }
}
