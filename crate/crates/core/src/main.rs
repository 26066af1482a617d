use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use fdmimo::cli::{parse_config, run_scenario, Overrides};
use fdmimo::config::Architecture;

#[derive(Clone, Copy, ValueEnum)]
enum ArchArg {
    Taps,
    Aux,
}

/// Monte Carlo simulator for full-duplex MIMO with reduced-complexity analog
/// self-interference cancellation.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    /// Scenario preset: fig4 ... fig13, or custom.
    #[arg(long)]
    preset: Option<String>,
    /// Number of Monte Carlo trials [default: 200, or the config value].
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed of the trial RNG streams.
    #[arg(long)]
    seed: Option<u64>,
    /// TOML configuration file (a previous run's meta.txt works too).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for results.csv and meta.txt.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Search every MUX/DEMUX placement instead of the heuristic one.
    #[arg(long)]
    enumerate_realizations: bool,
    /// Run a single proposed design with this canceller architecture.
    #[arg(long, value_enum)]
    architecture: Option<ArchArg>,
    /// Run a single proposed design with this many taps or AUX chains.
    #[arg(long)]
    n_elements: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let flags = Overrides {
        preset: args.preset,
        config: args.config,
        trials: args.trials,
        seed: args.seed,
        enumerate_realizations: args.enumerate_realizations,
        architecture: args.architecture.map(|a| match a {
            ArchArg::Taps => Architecture::Taps,
            ArchArg::Aux => Architecture::Aux,
        }),
        n_elements: args.n_elements,
    };
    let result = parse_config(&flags).and_then(|cfg| {
        let results = run_scenario(&cfg, &args.out)?;
        Ok((cfg, results))
    });
    match result {
        Ok((cfg, results)) => {
            for (panel, r) in &results {
                for p in &r.points {
                    let name = if panel.is_empty() { p.label.clone() } else { format!("{}@{panel}", p.label) };
                    println!(
                        "{name:>16}  P_k {:>5.1} dBm  met {:.3}  FD {:.3} bit/s/Hz",
                        p.p_k_dbm, p.prob_constraint_met, p.mean_fd
                    );
                }
            }
            println!(
                "{} trials, seed {}; wrote {}",
                cfg.sweep.n_trials,
                cfg.sweep.master_seed,
                args.out.join("results.csv").display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
