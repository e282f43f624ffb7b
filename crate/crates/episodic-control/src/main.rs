//! Command-line harness: run one experiment config, or sweep it over
//! several neighbourhood sizes, and write CSV reports.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};

use episodic_control::harness;

#[derive(Parser)]
#[command(
    name = "episodic-control",
    version,
    about = "Episodic-control gridworld experiments with CSV reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a key=value config file.
    Run {
        /// Experiment config file.
        #[arg(long)]
        config: PathBuf,
        /// Directory the CSV reports are written into.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides the config's run seeds.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        seeds: Option<Vec<u64>>,
        /// Runs the whole experiment once per listed neighbourhood size and
        /// writes a sweep report instead of a single run.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        sweep_k: Option<Vec<usize>>,
    },
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, seeds, sweep_k } => {
            let mut experiment = harness::read_config(&config)
                .with_context(|| format!("reading config {}", config.display()))?;
            if let Some(seeds) = seeds {
                experiment.seeds = seeds;
                experiment.validate().context("applying --seeds override")?;
            }
            match sweep_k {
                Some(ks) => {
                    let sweep = harness::run_k_sweep(&experiment, &ks)?;
                    harness::write_sweep(&out, &sweep)?;
                    for row in &sweep.rows {
                        println!(
                            "k={}: final score {:.3} +/- {:.3}",
                            row.k, row.final_score_mean, row.final_score_sem
                        );
                    }
                    println!("wrote sweep report to {}", out.display());
                }
                None => {
                    let outcome = harness::run_experiment(&experiment)?;
                    harness::write_metrics(&out, &outcome)?;
                    for run in &outcome.runs {
                        match (&run.failure, run.rows.last()) {
                            (Some(message), _) => eprintln!(
                                "seed {}: failed after {} episodes: {message}",
                                run.seed,
                                run.rows.len()
                            ),
                            (None, Some(last)) => println!(
                                "seed {}: {} episodes, last reward {}, match rate {:.3}",
                                run.seed,
                                run.rows.len(),
                                last.total_reward,
                                last.match_rate
                            ),
                            (None, None) => {}
                        }
                    }
                    if let Some(last) = outcome.aggregate.last() {
                        println!(
                            "aggregate: final mean reward {:.3} +/- {:.3} over {} seeds",
                            last.mean_reward, last.sem_reward, last.n_seeds
                        );
                    } else {
                        println!("aggregate skipped: fewer than two seeds completed");
                    }
                    println!("wrote metrics to {}", out.display());
                }
            }
        }
    }
    Ok(())
}
