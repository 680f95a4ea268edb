//! Metropolis-Hastings random walk over `(A, B)` with a Gaussian prior.
//!
//! Proposals are multiplicative, `θ* = θ (1 + s n)`, and accepted with the
//! plain ratio `min(1, π(θ*) / π(θ))`. All arithmetic is in log space.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ihtc::IhtcParams;
use crate::inverse::FitnessSpec;
use crate::metaheuristics::{normal, unif};
use crate::scalar::Scalar;
use crate::stats::{summarize, SampleSummary};

pub const DEFAULT_PRIOR_MEAN: [f64; 2] = [6430.0, -0.153];
pub const DEFAULT_PRIOR_STD: [f64; 2] = [1000.0, 0.05];

/// Start multipliers of the seven reference chains.
pub const DEFAULT_START_SCALES: [f64; 7] = [0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    pub prior_mean: Vec<f64>,
    pub prior_std: Vec<f64>,
    pub n_states: usize,
    /// Chain start as a multiple of the prior mean.
    pub start_scale: f64,
    pub step_scale: f64,
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            prior_mean: DEFAULT_PRIOR_MEAN.to_vec(),
            prior_std: DEFAULT_PRIOR_STD.to_vec(),
            n_states: 40_000,
            start_scale: 1.0,
            step_scale: 0.005,
            burn_in: 2000,
            seed: 0,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.prior_mean.is_empty() || self.prior_mean.len() != self.prior_std.len() {
            return Err(Error::invalid(
                "chain config",
                "prior_mean and prior_std must be non-empty and of equal length",
            ));
        }
        if self.prior_mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("prior_mean"));
        }
        if self.prior_std.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid(
                "chain config",
                "prior_std must be > 0 elementwise",
            ));
        }
        if self.n_states <= self.burn_in {
            return Err(Error::invalid(
                "chain config",
                format!(
                    "n_states ({}) must exceed burn_in ({})",
                    self.n_states, self.burn_in
                ),
            ));
        }
        if !(self.step_scale.is_finite() && self.step_scale > 0.0) {
            return Err(Error::invalid("chain config", "step_scale must be > 0"));
        }
        if !self.start_scale.is_finite() {
            return Err(Error::NonFinite("start_scale"));
        }
        Ok(())
    }

    pub fn start<T: Scalar>(&self) -> Vec<T> {
        self.prior_mean
            .iter()
            .map(|&m| T::lit(m * self.start_scale))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain<T> {
    pub states: Vec<Vec<T>>,
    pub log_posterior: Vec<T>,
    /// `accepted[k]` tells whether state `k` came from an accepted move;
    /// the start state counts as accepted.
    pub accepted: Vec<bool>,
    pub seed: u64,
    pub stream: u64,
}

impl<T: Scalar> MarkovChain<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Fraction of accepted transitions.
    pub fn acceptance_rate(&self) -> f64 {
        if self.accepted.len() < 2 {
            return 0.0;
        }
        let n = self.accepted[1..].iter().filter(|&&a| a).count();
        n as f64 / (self.accepted.len() - 1) as f64
    }

    /// First index at which the running best log-posterior is within 1% of
    /// its final value.
    pub fn auto_burn_in(&self) -> usize {
        let mut best = T::neg_infinity();
        let running: Vec<T> = self
            .log_posterior
            .iter()
            .map(|&lp| {
                best = best.max(lp);
                best
            })
            .collect();
        let Some(&last) = running.last() else {
            return 0;
        };
        let tol = T::lit(0.01) * last.abs();
        running
            .iter()
            .position(|&b| (b - last).abs() <= tol)
            .unwrap_or(0)
    }

    /// Samples of parameter `j` after dropping `burn_in` states.
    pub fn component(&self, j: usize, burn_in: usize) -> Vec<T> {
        self.states.iter().skip(burn_in).map(|s| s[j]).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let dim = self.states.first().map_or(0, Vec::len);
        let mut header = vec!["state_index".to_string()];
        header.extend(crate::metaheuristics::param_columns(dim));
        header.extend(["log_posterior".into(), "accepted".into()]);
        out.write_record(&header).map_err(csv_err)?;
        for (k, s) in self.states.iter().enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(s.iter().map(|v| format!("{:.10e}", v.as_f64())));
            row.push(format!("{:.10e}", self.log_posterior[k].as_f64()));
            row.push(u8::from(self.accepted[k]).to_string());
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Pooled posterior statistics, one entry per parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorSummary<T> {
    pub expected_value: Vec<T>,
    pub std: Vec<T>,
    pub pct05: Vec<T>,
    pub pct95: Vec<T>,
    pub min: Vec<T>,
    pub max: Vec<T>,
    pub kurtosis: Vec<Option<T>>,
    pub excess_kurtosis: Vec<Option<T>>,
    pub skewness: Vec<Option<T>>,
    pub n_pooled: usize,
    pub burn_in: usize,
    pub acceptance_rates: Vec<f64>,
}

impl<T: Scalar> PosteriorSummary<T> {
    pub fn covers(&self, j: usize, value: T) -> bool {
        self.pct05[j] <= value && value <= self.pct95[j]
    }

    /// Key-value report with one section per parameter.
    pub fn write_report<W: Write>(&self, mut w: W) -> Result<()> {
        let opt = |v: Option<T>| v.map_or("nan".to_string(), |v| format!("{:.10e}", v.as_f64()));
        writeln!(w, "n_pooled = {}", self.n_pooled)?;
        writeln!(w, "burn_in = {}", self.burn_in)?;
        let rates: Vec<String> = self
            .acceptance_rates
            .iter()
            .map(|r| format!("{r:.6}"))
            .collect();
        writeln!(w, "acceptance_rates = [{}]", rates.join(", "))?;
        for (j, name) in crate::metaheuristics::param_columns(self.expected_value.len())
            .iter()
            .enumerate()
        {
            writeln!(w, "\n[{name}]")?;
            writeln!(
                w,
                "expected_value = {:.10e}",
                self.expected_value[j].as_f64()
            )?;
            writeln!(w, "std = {:.10e}", self.std[j].as_f64())?;
            writeln!(w, "max = {:.10e}", self.max[j].as_f64())?;
            writeln!(w, "min = {:.10e}", self.min[j].as_f64())?;
            writeln!(w, "pct05 = {:.10e}", self.pct05[j].as_f64())?;
            writeln!(w, "pct95 = {:.10e}", self.pct95[j].as_f64())?;
            writeln!(w, "skewness = {}", opt(self.skewness[j]))?;
            writeln!(w, "kurtosis = {}", opt(self.kurtosis[j]))?;
            writeln!(w, "excess_kurtosis = {}", opt(self.excess_kurtosis[j]))?;
        }
        Ok(())
    }

    pub fn save_report(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        self.write_report(&mut f)?;
        f.flush()?;
        Ok(())
    }
}

/// Unnormalised Gaussian log prior `-½ Σ ((θ - μ) / σ)²`.
pub fn log_prior<T: Scalar>(theta: &[T], config: &ChainConfig) -> Result<T> {
    if theta.len() != config.prior_mean.len() {
        return Err(Error::invalid(
            "theta",
            format!("expected {} components", config.prior_mean.len()),
        ));
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("theta"));
    }
    if config.prior_std.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::invalid("prior_std", "must be > 0"));
    }
    let s: T = theta
        .iter()
        .zip(config.prior_mean.iter().zip(&config.prior_std))
        .map(|(&x, (&m, &s))| {
            let z = (x - T::lit(m)) / T::lit(s);
            z * z
        })
        .sum();
    Ok(T::lit(-0.5) * s)
}

/// `-½ Σ r² / σ²` over every probe sample, `r = measured - simulated`.
/// Invalid parameters and failed solves give `-∞`.
pub fn log_likelihood<T: Scalar>(theta: &[T], spec: &FitnessSpec<T>, meas_std: T) -> Result<T> {
    if !(meas_std.is_finite() && meas_std > T::zero()) {
        return Err(Error::invalid(
            "meas_std",
            format!("must be > 0, got {meas_std}"),
        ));
    }
    let params = IhtcParams::from_slice(theta);
    if params.validate().is_err() {
        return Ok(T::neg_infinity());
    }
    let Ok(res) = spec.residuals(&params) else {
        return Ok(T::neg_infinity());
    };
    let ss: T = res.iter().flatten().map(|&r| r * r).sum();
    let ll = T::lit(-0.5) * ss / (meas_std * meas_std);
    Ok(if ll.is_finite() {
        ll
    } else {
        T::neg_infinity()
    })
}

/// Accepts with probability `min(1, exp(new - old))`.
pub fn mh_accept<T: Scalar, R: Rng + ?Sized>(
    log_post_new: T,
    log_post_old: T,
    rng: &mut R,
) -> bool {
    if log_post_new.is_nan() || log_post_new == T::neg_infinity() {
        return false;
    }
    if log_post_new >= log_post_old {
        return true;
    }
    let u: T = unif(rng);
    u < (log_post_new - log_post_old).exp()
}

/// `θ_prev (1 + s n)` with a fresh standard normal `n` per component.
pub fn propose<T: Scalar, R: Rng + ?Sized>(theta_prev: &[T], step_scale: T, rng: &mut R) -> Vec<T> {
    theta_prev
        .iter()
        .map(|&x| {
            let n: T = normal(rng);
            x + step_scale * n * x
        })
        .collect()
}

/// Runs one chain against an arbitrary log posterior, using stream
/// `stream` of the generator seeded by `config.seed`.
pub fn run_chain_with<T, F>(
    config: &ChainConfig,
    stream: u64,
    log_posterior: F,
) -> Result<MarkovChain<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> T,
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    let step = T::lit(config.step_scale);
    let mut x: Vec<T> = config.start();
    let mut lp = log_posterior(&x);
    if lp.is_nan() {
        lp = T::neg_infinity();
    }
    let mut states = Vec::with_capacity(config.n_states);
    let mut lps = Vec::with_capacity(config.n_states);
    let mut accepted = Vec::with_capacity(config.n_states);
    states.push(x.clone());
    lps.push(lp);
    accepted.push(true);
    for _ in 1..config.n_states {
        let cand = propose(&x, step, &mut rng);
        let ok = cand.iter().all(|v| v.is_finite()) && {
            let lp_new = log_posterior(&cand);
            // An infinitely bad start accepts any finite proposal.
            let take = if lp == T::neg_infinity() {
                lp_new.is_finite()
            } else {
                mh_accept(lp_new, lp, &mut rng)
            };
            if take {
                x = cand;
                lp = lp_new;
            }
            take
        };
        states.push(x.clone());
        lps.push(lp);
        accepted.push(ok);
    }
    Ok(MarkovChain {
        states,
        log_posterior: lps,
        accepted,
        seed: config.seed,
        stream,
    })
}

/// Log posterior `log prior + log likelihood` of the inverse problem.
pub fn log_posterior<T: Scalar>(
    theta: &[T],
    config: &ChainConfig,
    spec: &FitnessSpec<T>,
    meas_std: T,
) -> T {
    match (
        log_prior(theta, config),
        log_likelihood(theta, spec, meas_std),
    ) {
        (Ok(p), Ok(l)) => p + l,
        _ => T::neg_infinity(),
    }
}

pub fn run_chain<T: Scalar>(
    config: &ChainConfig,
    spec: &FitnessSpec<T>,
    meas_std: T,
) -> Result<MarkovChain<T>> {
    if !(meas_std.is_finite() && meas_std > T::zero()) {
        return Err(Error::invalid(
            "meas_std",
            format!("must be > 0, got {meas_std}"),
        ));
    }
    run_chain_with(config, 0, |th| log_posterior(th, config, spec, meas_std))
}

/// Runs one chain per start scale in parallel. Chain `k` uses stream `k`.
pub fn run_chains_with<T, F>(
    config: &ChainConfig,
    start_scales: &[f64],
    log_posterior: F,
) -> Result<Vec<MarkovChain<T>>>
where
    T: Scalar,
    F: Fn(&[T]) -> T + Sync,
{
    if start_scales.is_empty() {
        return Err(Error::Empty("start scales"));
    }
    start_scales
        .par_iter()
        .enumerate()
        .map(|(k, &s)| {
            let cfg = ChainConfig {
                start_scale: s,
                ..config.clone()
            };
            run_chain_with(&cfg, k as u64, &log_posterior)
        })
        .collect()
}

pub fn run_chains<T: Scalar>(
    config: &ChainConfig,
    start_scales: &[f64],
    spec: &FitnessSpec<T>,
    meas_std: T,
) -> Result<Vec<MarkovChain<T>>> {
    if !(meas_std.is_finite() && meas_std > T::zero()) {
        return Err(Error::invalid(
            "meas_std",
            format!("must be > 0, got {meas_std}"),
        ));
    }
    run_chains_with(config, start_scales, |th| {
        log_posterior(th, config, spec, meas_std)
    })
}

/// Concatenated post-burn-in samples, one vector per parameter.
pub fn pooled_samples<T: Scalar>(chains: &[MarkovChain<T>], burn_in: usize) -> Result<Vec<Vec<T>>> {
    let Some(first) = chains.first() else {
        return Err(Error::Empty("chain pool"));
    };
    let dim = first.states.first().map_or(0, Vec::len);
    if dim == 0 {
        return Err(Error::Empty("chain states"));
    }
    for c in chains {
        if burn_in >= c.len() {
            return Err(Error::invalid(
                "burn_in",
                format!("{burn_in} is not below the chain length {}", c.len()),
            ));
        }
    }
    Ok((0..dim)
        .map(|j| {
            chains
                .iter()
                .flat_map(|c| c.component(j, burn_in))
                .collect()
        })
        .collect())
}

pub fn pool_chains<T: Scalar>(
    chains: &[MarkovChain<T>],
    burn_in: usize,
) -> Result<PosteriorSummary<T>> {
    let pooled = pooled_samples(chains, burn_in)?;
    let sums = pooled
        .iter()
        .map(|v| summarize(v))
        .collect::<Result<Vec<SampleSummary<T>>>>()?;
    let pick = |f: fn(&SampleSummary<T>) -> T| sums.iter().map(f).collect::<Vec<T>>();
    Ok(PosteriorSummary {
        expected_value: pick(|s| s.mean),
        std: pick(|s| s.std),
        pct05: pick(|s| s.pct05),
        pct95: pick(|s| s.pct95),
        min: pick(|s| s.min),
        max: pick(|s| s.max),
        kurtosis: sums.iter().map(|s| s.kurtosis_pearson).collect(),
        excess_kurtosis: sums.iter().map(|s| s.excess_kurtosis).collect(),
        skewness: sums.iter().map(|s| s.skewness).collect(),
        n_pooled: pooled[0].len(),
        burn_in,
        acceptance_rates: chains.iter().map(MarkovChain::acceptance_rate).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::batch_means_se;

    #[test]
    fn prior_examples() {
        let cfg = ChainConfig::default();
        assert_eq!(log_prior(&[6430.0, -0.153], &cfg).unwrap(), 0.0);
        assert!((log_prior(&[7430.0f64, -0.153], &cfg).unwrap() + 0.5).abs() < 1e-12);
        let tight = ChainConfig {
            prior_std: vec![91.0, 0.004],
            ..ChainConfig::default()
        };
        assert!((log_prior(&[6430.0f64 + 91.0, -0.153], &tight).unwrap() + 0.5).abs() < 1e-12);
        assert!(log_prior(&[f64::NAN, 0.0], &cfg).is_err());
        assert!(log_prior(&[1.0], &cfg).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ChainConfig::default().validate().is_ok());
        let bad = [
            ChainConfig {
                burn_in: 40_000,
                ..Default::default()
            },
            ChainConfig {
                step_scale: 0.0,
                ..Default::default()
            },
            ChainConfig {
                prior_std: vec![1.0, 0.0],
                ..Default::default()
            },
            ChainConfig {
                prior_mean: vec![1.0],
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn accept_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            assert!(mh_accept(-1.0, -2.0, &mut rng));
            assert!(mh_accept(-3.0, -3.0, &mut rng));
            assert!(!mh_accept(f64::NEG_INFINITY, -3.0, &mut rng));
        }
        let n = 100_000;
        let hits = (0..n).filter(|_| mh_accept(-1.0, 0.0, &mut rng)).count();
        let rate = hits as f64 / n as f64;
        assert!((rate - (-1f64).exp()).abs() < 0.01, "{rate}");
    }

    #[test]
    fn proposal_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(propose(&[3.0, -2.0], 0.0, &mut rng), vec![3.0, -2.0]);
        let theta = [6301.0f64, -0.147];
        let n = 100_000;
        let mut rel: [Vec<f64>; 2] = [Vec::with_capacity(n), Vec::with_capacity(n)];
        for _ in 0..n {
            let p = propose(&theta, 0.005, &mut rng);
            for j in 0..2 {
                rel[j].push((p[j] - theta[j]) / theta[j]);
                assert_eq!(p[j].signum(), theta[j].signum());
            }
        }
        for r in &rel {
            let s = summarize(r).unwrap();
            assert!((s.std / 0.005 - 1.0).abs() < 0.02, "{}", s.std);
        }
    }

    #[test]
    fn flat_target_accepts_everything() {
        let cfg = ChainConfig {
            n_states: 500,
            burn_in: 0,
            ..Default::default()
        };
        let c = run_chain_with(&cfg, 0, |_: &[f64]| 0.0).unwrap();
        assert_eq!(c.acceptance_rate(), 1.0);
        assert_eq!(c.len(), 500);
    }

    #[test]
    fn rejection_keeps_state_and_determinism() {
        let cfg = ChainConfig {
            n_states: 2000,
            burn_in: 0,
            prior_mean: vec![10.0, -5.0],
            seed: 8,
            step_scale: 0.2,
            ..Default::default()
        };
        let target = |x: &[f64]| -0.5 * ((x[0] - 10.0).powi(2) + (x[1] + 5.0).powi(2));
        let a = run_chain_with(&cfg, 3, target).unwrap();
        let b = run_chain_with(&cfg, 3, target).unwrap();
        assert_eq!(a, b);
        let rate = a.acceptance_rate();
        assert!(rate > 0.0 && rate < 1.0, "{rate}");
        for k in 1..a.len() {
            let same = a.states[k]
                .iter()
                .zip(&a.states[k - 1])
                .all(|(x, y)| x.to_bits() == y.to_bits());
            assert_eq!(same, !a.accepted[k], "state {k}");
            assert!(a.states[k].iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn pooling_counts() {
        let cfg = ChainConfig {
            n_states: 1000,
            burn_in: 100,
            ..Default::default()
        };
        let chains = run_chains_with(&cfg, &DEFAULT_START_SCALES, |x: &[f64]| {
            log_prior(x, &cfg).unwrap()
        })
        .unwrap();
        let s = pool_chains(&chains, 100).unwrap();
        assert_eq!(s.n_pooled, 6300);
        assert_eq!(s.acceptance_rates.len(), 7);
        assert!(pool_chains(&chains, 1000).is_err());
        assert!(pool_chains::<f64>(&[], 0).is_err());

        let single = pool_chains(&chains[..1], 0).unwrap();
        let direct = summarize(&chains[0].component(0, 0)).unwrap();
        assert_eq!(single.expected_value[0], direct.mean);
        assert_eq!(single.n_pooled, 1000);
    }

    #[test]
    fn gaussian_target() {
        let (mu, sd) = ([1000.0, -500.0], [2.0, 1.0]);
        let cfg = ChainConfig {
            prior_mean: mu.to_vec(),
            prior_std: sd.to_vec(),
            n_states: 20_000,
            burn_in: 1000,
            step_scale: 0.005,
            seed: 21,
            ..Default::default()
        };
        let target = |x: &[f64]| {
            -0.5 * (0..2)
                .map(|j| ((x[j] - mu[j]) / sd[j]).powi(2))
                .sum::<f64>()
        };
        let chains =
            run_chains_with(&cfg, &[0.995, 0.998, 1.0, 1.0, 1.002, 1.005, 1.01], target).unwrap();
        let s = pool_chains(&chains, cfg.burn_in).unwrap();
        let pooled = pooled_samples(&chains, cfg.burn_in).unwrap();
        for j in 0..2 {
            let (se_mean, se_std) = batch_means_se(&pooled[j], 70).unwrap();
            assert!(
                (s.expected_value[j] - mu[j]).abs() < 3.0 * se_mean,
                "mean {j}: {} ± {se_mean}",
                s.expected_value[j]
            );
            assert!(
                (s.std[j] - sd[j]).abs() < 3.0 * se_std,
                "std {j}: {} ± {se_std}",
                s.std[j]
            );
        }
    }

    #[test]
    fn auto_burn_in_finds_plateau() {
        let chain = MarkovChain {
            states: vec![vec![0.0]; 5],
            log_posterior: vec![-1000.0, -500.0, -100.5, -100.0, -100.2],
            accepted: vec![true; 5],
            seed: 0,
            stream: 0,
        };
        assert_eq!(chain.auto_burn_in(), 2);
    }

    #[test]
    fn chain_csv_layout() {
        let cfg = ChainConfig {
            n_states: 3,
            burn_in: 0,
            ..Default::default()
        };
        let c = run_chain_with(&cfg, 0, |_: &[f64]| 0.0).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "state_index,A,B,log_posterior,accepted");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,6.4300000000e3,"));
        assert!(lines[1].ends_with(",1"));
    }
}
