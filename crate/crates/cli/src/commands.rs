//! The four pipelines. Each returns the files it wrote; all files are written
//! by the calling thread after the parallel work has finished.
//!
//! Number formats: temperatures and times `{:.6}`, optimizer metrics and
//! parameters `{:.8}`, chain states `{:.10e}`. Undefined statistics are
//! written as `nan`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ihtc_core::fvm::simulate;
use ihtc_core::mcmc::{pool_chains, pooled_samples, run_chains, MarkovChain, PosteriorSummary};
use ihtc_core::metaheuristics::{self, param_columns, RunResult};
use ihtc_core::stats::{
    doane_bin_count, error_metrics, histogram, summarize, ErrorSummary, SampleSummary,
};
use ihtc_core::{Ihtc, Real};
use rayon::prelude::*;

use crate::config::ToolConfig;
use crate::error::CliError;

/// Environment variable overriding the worker-pool size.
pub const WORKERS_ENV: &str = "IHTC_WORKERS";

/// Runs `f` on a pool sized by `IHTC_WORKERS`, then `workers` from the
/// config, then the number of available cores.
pub fn with_pool<R: Send>(cfg: &ToolConfig, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    let n = match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "{WORKERS_ENV}: expected a positive integer, got `{v}`"
                ))
            })?,
        Err(_) => cfg
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn ensure_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf, CliError> {
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn fmt_opt(v: Option<Real>) -> String {
    v.map_or_else(|| "nan".into(), |v| format!("{v:.8}"))
}

/// Forward simulation at `params`; writes `simulation.csv`.
pub fn cmd_simulate(cfg: &ToolConfig, params: Ihtc, out: &Path) -> Result<PathBuf, CliError> {
    params
        .validate()
        .map_err(|e| CliError::Config(format!("IHTC parameters: {e}")))?;
    let history = simulate(
        &cfg.alloy,
        &cfg.mesh.spec(),
        &cfg.boundary,
        &params,
        &cfg.simulate.probes,
    )
    .map_err(CliError::numerical)?;
    ensure_dir(out)?;
    let path = out.join("simulation.csv");
    history
        .save_csv(&path)
        .map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// One optimizer run; writes `<algorithm>_<seed>.csv`.
pub fn cmd_optimize(
    cfg: &ToolConfig,
    algorithm: &str,
    seed: u64,
    out: &Path,
) -> Result<RunResult<Real>, CliError> {
    let alg = cfg.algorithms.get(algorithm)?;
    let spec = cfg.fitness_spec()?;
    let result = metaheuristics::run(
        &alg,
        &cfg.search.space(),
        &cfg.run.config(seed),
        |x: &[Real]| spec.objective(x),
    )
    .map_err(CliError::numerical)?;
    ensure_dir(out)?;
    result.save_csv(out).map_err(|e| CliError::io(out, e))?;
    Ok(result)
}

pub struct McmcOutput {
    pub chains: Vec<MarkovChain<Real>>,
    pub summary: PosteriorSummary<Real>,
    pub files: Vec<PathBuf>,
}

/// Runs the configured chains and writes `chain_<k>.csv`, the pooled
/// `posterior_summary.toml`, `posterior_table.csv`, `chain_stats.csv` and
/// `posterior_histogram.csv`.
pub fn cmd_mcmc(cfg: &ToolConfig, seed: u64, out: &Path) -> Result<McmcOutput, CliError> {
    let spec = cfg.fitness_spec()?;
    let meas_std = cfg.mcmc.meas_std.unwrap_or(spec.experiment.noise_std);
    if meas_std <= 0.0 {
        return Err(CliError::Config(
            "[mcmc] meas_std: the experiment carries no noise level; set meas_std explicitly"
                .into(),
        ));
    }
    let chain_cfg = cfg.mcmc.chain_config(seed);
    let chains = run_chains(&chain_cfg, &cfg.mcmc.start_scales, &spec, meas_std)
        .map_err(CliError::numerical)?;
    let summary = pool_chains(&chains, chain_cfg.burn_in).map_err(CliError::numerical)?;
    let pooled = pooled_samples(&chains, chain_cfg.burn_in).map_err(CliError::numerical)?;

    ensure_dir(out)?;
    let mut files = Vec::new();
    for (k, c) in chains.iter().enumerate() {
        let path = out.join(format!("chain_{k}.csv"));
        c.save_csv(&path).map_err(|e| CliError::io(&path, e))?;
        files.push(path);
    }
    let path = out.join("posterior_summary.toml");
    summary
        .save_report(&path)
        .map_err(|e| CliError::io(&path, e))?;
    files.push(path);

    let names = param_columns(2);
    // Minimum and maximum are the 5th and 95th percentiles.
    let mut table = String::from("parameter,expected_value,std,minimum,maximum\n");
    for (j, name) in names.iter().enumerate() {
        writeln!(
            table,
            "{name},{:.8},{:.8},{:.8},{:.8}",
            summary.expected_value[j], summary.std[j], summary.pct05[j], summary.pct95[j]
        )
        .expect("string write");
    }
    files.push(write(out.join("posterior_table.csv"), &table)?);

    let mut stats = String::from("chain,start_scale,acceptance_rate,auto_burn_in\n");
    for (k, (c, s)) in chains.iter().zip(&cfg.mcmc.start_scales).enumerate() {
        writeln!(
            stats,
            "{k},{s:.4},{:.6},{}",
            c.acceptance_rate(),
            c.auto_burn_in()
        )
        .expect("string write");
    }
    files.push(write(out.join("chain_stats.csv"), &stats)?);

    let mut hist = String::from("parameter,bin,lower,upper,count\n");
    for (name, samples) in names.iter().zip(&pooled) {
        push_histogram(&mut hist, name, samples)?;
    }
    files.push(write(out.join("posterior_histogram.csv"), &hist)?);

    Ok(McmcOutput {
        chains,
        summary,
        files,
    })
}

/// Doane-binned rows `<prefix>,bin,lower,upper,count`.
fn push_histogram(buf: &mut String, prefix: &str, samples: &[Real]) -> Result<(), CliError> {
    let bins = if samples.len() >= 3 {
        doane_bin_count(samples).map_err(CliError::numerical)?
    } else {
        1
    };
    let h = histogram(samples, bins).map_err(CliError::numerical)?;
    for (b, c) in h.counts.iter().enumerate() {
        writeln!(
            buf,
            "{prefix},{b},{:.8},{:.8},{c}",
            h.edges[b],
            h.edges[b + 1]
        )
        .expect("string write");
    }
    Ok(())
}

/// Per-algorithm results of a benchmark.
pub struct AlgorithmRuns {
    pub name: &'static str,
    pub runs: Vec<RunResult<Real>>,
    pub errors: ErrorSummary<Real>,
    pub mean_iterations: Real,
    /// One summary per parameter; `None` with fewer than two replicates.
    pub params: Vec<Option<SampleSummary<Real>>>,
}

pub struct BenchmarkOutput {
    pub algorithms: Vec<AlgorithmRuns>,
    /// Objective at the synthetic truth, when the experiment is synthetic.
    pub noise_floor: Option<Real>,
    pub files: Vec<PathBuf>,
}

/// Seed of replicate `rep` of algorithm number `alg`.
pub fn derive_seed(seed: u64, alg: usize, rep: usize) -> u64 {
    seed.wrapping_add(alg as u64).wrapping_add(rep as u64)
}

/// Runs every algorithm `replicates` times and writes `runs.csv`,
/// `error_table.csv`, `parameter_table.csv`, `plot_mean_std.csv`,
/// `plot_kurtosis.csv`, `plot_histogram.csv` and, for synthetic
/// experiments, `reference.csv`.
pub fn cmd_benchmark(
    cfg: &ToolConfig,
    replicates: usize,
    seed: u64,
    out: &Path,
) -> Result<BenchmarkOutput, CliError> {
    if replicates == 0 {
        return Err(CliError::Config("replicates: must be >= 1".into()));
    }
    let spec = cfg.fitness_spec()?;
    let space = cfg.search.space();
    let algs = cfg.algorithms.all();
    let jobs: Vec<(usize, usize)> = (0..algs.len())
        .flat_map(|a| (0..replicates).map(move |r| (a, r)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(a, r)| {
            let run_cfg = cfg.run.config(derive_seed(seed, algs[a].index(), r));
            metaheuristics::run(&algs[a], &space, &run_cfg, |x: &[Real]| spec.objective(x))
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::numerical)?;

    let mut algorithms = Vec::new();
    let mut it = results.into_iter();
    for alg in &algs {
        let runs: Vec<RunResult<Real>> = it.by_ref().take(replicates).collect();
        let fitness: Vec<Real> = runs.iter().map(|r| r.best_fitness).collect();
        let errors = error_metrics(&fitness).map_err(CliError::numerical)?;
        let mean_iterations =
            runs.iter().map(|r| r.iterations_used as Real).sum::<Real>() / replicates as Real;
        let params = (0..2)
            .map(|j| {
                let v: Vec<Real> = runs.iter().map(|r| r.best_params[j]).collect();
                if v.len() >= 2 {
                    summarize(&v).map(Some).map_err(CliError::numerical)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        algorithms.push(AlgorithmRuns {
            name: alg.name(),
            runs,
            errors,
            mean_iterations,
            params,
        });
    }
    let noise_floor = cfg.synthetic_truth().map(|t| spec.fitness(&t));

    ensure_dir(out)?;
    let names = param_columns(2);
    let mut files = Vec::new();

    let mut runs = String::from(
        "algorithm,replicate,seed,best_A,best_B,best_fitness,iterations_used,evaluations\n",
    );
    for a in &algorithms {
        for (r, run) in a.runs.iter().enumerate() {
            writeln!(
                runs,
                "{},{r},{},{:.8},{:.8},{:.8},{},{}",
                a.name,
                run.seed,
                run.best_params[0],
                run.best_params[1],
                run.best_fitness,
                run.iterations_used,
                run.evaluations
            )
            .expect("string write");
        }
    }
    files.push(write(out.join("runs.csv"), &runs)?);

    let mut table = String::from("algorithm,sum,expected_value,std,max,min,mean_iterations\n");
    for a in &algorithms {
        let e = &a.errors;
        writeln!(
            table,
            "{},{:.8},{:.8},{:.8},{:.8},{:.8},{:.4}",
            a.name, e.sum, e.expected_value, e.std, e.max, e.min, a.mean_iterations
        )
        .expect("string write");
    }
    files.push(write(out.join("error_table.csv"), &table)?);

    let mut params = String::from("algorithm,parameter,expected_value,std,minimum,maximum,skewness,kurtosis,excess_kurtosis\n");
    let mut mean_std = String::from("algorithm,parameter,mean,mean_minus_std,mean_plus_std\n");
    let mut kurt = String::from("algorithm,parameter,kurtosis,excess_kurtosis\n");
    let mut hist = String::from("algorithm,parameter,bin,lower,upper,count\n");
    for a in &algorithms {
        for (j, name) in names.iter().enumerate() {
            match &a.params[j] {
                Some(s) => {
                    writeln!(
                        params,
                        "{},{name},{:.8},{:.8},{:.8},{:.8},{},{},{}",
                        a.name,
                        s.mean,
                        s.std,
                        s.pct05,
                        s.pct95,
                        fmt_opt(s.skewness),
                        fmt_opt(s.kurtosis_pearson),
                        fmt_opt(s.excess_kurtosis)
                    )
                    .expect("string write");
                    writeln!(
                        mean_std,
                        "{},{name},{:.8},{:.8},{:.8}",
                        a.name,
                        s.mean,
                        s.mean - s.std,
                        s.mean + s.std
                    )
                    .expect("string write");
                    writeln!(
                        kurt,
                        "{},{name},{},{}",
                        a.name,
                        fmt_opt(s.kurtosis_pearson),
                        fmt_opt(s.excess_kurtosis)
                    )
                    .expect("string write");
                }
                None => {
                    let v = a.runs[0].best_params[j];
                    writeln!(
                        params,
                        "{},{name},{v:.8},nan,{v:.8},{v:.8},nan,nan,nan",
                        a.name
                    )
                    .expect("string write");
                    writeln!(mean_std, "{},{name},{v:.8},nan,nan", a.name).expect("string write");
                    writeln!(kurt, "{},{name},nan,nan", a.name).expect("string write");
                }
            }
            let v: Vec<Real> = a.runs.iter().map(|r| r.best_params[j]).collect();
            push_histogram(&mut hist, &format!("{},{name}", a.name), &v)?;
        }
    }
    files.push(write(out.join("parameter_table.csv"), &params)?);
    files.push(write(out.join("plot_mean_std.csv"), &mean_std)?);
    files.push(write(out.join("plot_kurtosis.csv"), &kurt)?);
    files.push(write(out.join("plot_histogram.csv"), &hist)?);

    if let (Some(t), Some(floor)) = (cfg.synthetic_truth(), noise_floor) {
        let text = format!(
            "label,A,B,fitness\ntruth,{:.8},{:.8},{floor:.8}\n",
            t.a, t.b
        );
        files.push(write(out.join("reference.csv"), &text)?);
    }

    Ok(BenchmarkOutput {
        algorithms,
        noise_floor,
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_follow_the_documented_sum() {
        assert_eq!(derive_seed(100, 3, 7), 110);
        assert_eq!(derive_seed(u64::MAX, 1, 0), 0);
    }
}
