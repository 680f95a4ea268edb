use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ihtc_cli::{
    cmd_benchmark, cmd_mcmc, cmd_optimize, cmd_simulate, with_pool, CliError, ToolConfig,
};
use ihtc_core::Ihtc;

/// Interfacial heat transfer coefficient estimation for upward directional
/// solidification.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    /// Configuration file (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Top-level seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward-simulate the probe temperatures for one (A, B).
    Simulate {
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<f64>,
    },
    /// Run one optimizer on the configured experiment.
    Optimize {
        #[arg(long)]
        algorithm: String,
    },
    /// Run the configured Markov chains and pool them.
    Mcmc,
    /// Run all ten optimizers repeatedly and tabulate the results.
    Benchmark {
        #[arg(long)]
        replicates: Option<usize>,
    },
}

fn run(args: Args) -> Result<(), CliError> {
    let cfg = match &args.config {
        Some(p) => ToolConfig::load(p)?,
        None => {
            let cfg = ToolConfig::default();
            cfg.validate()?;
            cfg
        }
    };
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| cfg.resolve(&cfg.output.dir));
    let seed = args.seed.unwrap_or(cfg.seed);
    match args.command {
        Command::Simulate { a, b } => {
            let params = Ihtc::new(a.unwrap_or(cfg.simulate.a), b.unwrap_or(cfg.simulate.b));
            let path = cmd_simulate(&cfg, params, &out)?;
            println!("wrote {}", path.display());
        }
        Command::Optimize { algorithm } => {
            cfg.algorithms.get(&algorithm)?;
            let r = with_pool(&cfg, || cmd_optimize(&cfg, &algorithm, seed, &out))??;
            println!(
                "{} seed {}: best A = {:.4}, B = {:.6}, fitness {:.6} after {} iterations",
                r.algorithm,
                r.seed,
                r.best_params[0],
                r.best_params[1],
                r.best_fitness,
                r.iterations_used
            );
        }
        Command::Mcmc => {
            let m = with_pool(&cfg, || cmd_mcmc(&cfg, seed, &out))??;
            let s = &m.summary;
            println!(
                "pooled {} states: A = {:.2} ± {:.2}, B = {:.5} ± {:.5}",
                s.n_pooled, s.expected_value[0], s.std[0], s.expected_value[1], s.std[1]
            );
            println!("wrote {} files to {}", m.files.len(), out.display());
        }
        Command::Benchmark { replicates } => {
            let n = replicates.unwrap_or(cfg.benchmark.replicates);
            let b = with_pool(&cfg, || cmd_benchmark(&cfg, n, seed, &out))??;
            for a in &b.algorithms {
                println!(
                    "{:>4}  E {:.4}  std {:.4}  min {:.4}  max {:.4}",
                    a.name, a.errors.expected_value, a.errors.std, a.errors.min, a.errors.max
                );
            }
            println!("wrote {} files to {}", b.files.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
