//! Population-based optimizers behind one driver.
//!
//! Every algorithm starts from a uniform sample of the search box, moves its
//! population with its own update rules, projects each candidate back onto
//! the box and evaluates it exactly once. The driver tracks the best point
//! ever evaluated and stops after `max_iterations` or once the best vector
//! has stayed bitwise identical for `stall_limit` consecutive iterations.
//!
//! Randomness comes from one ChaCha8 generator per (iteration, particle)
//! pair, all derived from the run seed, so evaluating a generation in
//! parallel cannot change the trajectory.

mod ba;
mod da;
mod de;
mod fpa;
mod gwo;
mod hho;
pub mod levy;
mod mfo;
mod pso;
mod sca;
mod woa;

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use ba::BaParams;
pub use da::DaParams;
pub use de::DeParams;
pub use fpa::FpaParams;
pub use hho::HhoParams;
pub use levy::{levy_sigma, levy_step, LevyFlavor};
pub use mfo::MfoParams;
pub use pso::PsoParams;
pub use sca::ScaParams;
pub use woa::WoaParams;

/// Objective minimised by the optimizers. Must be total over the box.
pub trait Objective<T>: Fn(&[T]) -> T + Sync {}
impl<T, F: Fn(&[T]) -> T + Sync> Objective<T> for F {}

/// Lower-case algorithm names in their canonical order.
pub const ALGORITHM_NAMES: [&str; 10] = [
    "pso", "de", "ba", "fpa", "gwo", "mfo", "sca", "woa", "da", "hho",
];

/// Axis-aligned search box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> SearchSpace<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        let s = Self { lower, upper };
        s.validate()?;
        Ok(s)
    }

    /// `A` in [0, 10000] W/(m^2 K), `B` in [-0.5, -0.005].
    pub fn ihtc_default() -> Self {
        Self {
            lower: vec![T::zero(), T::lit(-0.5)],
            upper: vec![T::lit(10_000.0), T::lit(-0.005)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_empty() {
            return Err(Error::Empty("search space"));
        }
        if self.lower.len() != self.upper.len() {
            return Err(Error::invalid(
                "search space",
                "lower and upper differ in length",
            ));
        }
        for (j, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::NonFinite("search space bounds"));
            }
            if !(lo < hi) {
                return Err(Error::invalid(
                    "search space",
                    format!("dimension {j}: lower {lo} >= upper {hi}"),
                ));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn width(&self, j: usize) -> T {
        self.upper[j] - self.lower[j]
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| v >= lo && v <= hi)
    }

    /// Componentwise projection onto the box. NaN components go to the lower bound.
    pub fn clamp(&self, x: &[T]) -> Vec<T> {
        let mut y = x.to_vec();
        self.clamp_in_place(&mut y);
        y
    }

    pub fn clamp_in_place(&self, x: &mut [T]) {
        for (j, v) in x.iter_mut().enumerate() {
            *v = if v.is_nan() {
                self.lower[j]
            } else {
                v.max(self.lower[j]).min(self.upper[j])
            };
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        (0..self.dim())
            .map(|j| self.lower[j] + unif::<T, _>(rng) * self.width(j))
            .collect()
    }
}

/// Population size, iteration cap, stop rule and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub n_particles: usize,
    pub max_iterations: usize,
    pub stall_limit: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_particles: 20,
            max_iterations: 100,
            stall_limit: 10,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 2 {
            return Err(Error::invalid(
                "run config",
                format!("n_particles must be >= 2, got {}", self.n_particles),
            ));
        }
        if self.stall_limit < 1 || self.max_iterations < self.stall_limit {
            return Err(Error::invalid(
                "run config",
                format!(
                    "need max_iterations >= stall_limit >= 1, got {} / {}",
                    self.max_iterations, self.stall_limit
                ),
            ));
        }
        if self.n_particles >= u32::MAX as usize || self.max_iterations >= u32::MAX as usize {
            return Err(Error::invalid(
                "run config",
                "population or iteration count too large",
            ));
        }
        Ok(())
    }
}

/// Algorithm choice with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum AlgorithmConfig {
    Pso(PsoParams),
    De(DeParams),
    Ba(BaParams),
    Fpa(FpaParams),
    Gwo,
    Mfo(MfoParams),
    Sca(ScaParams),
    Woa(WoaParams),
    Da(DaParams),
    Hho(HhoParams),
}

impl AlgorithmConfig {
    /// Default hyperparameters for a lower- or mixed-case algorithm name.
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name.to_ascii_lowercase().as_str() {
            "pso" => Self::Pso(PsoParams::default()),
            "de" => Self::De(DeParams::default()),
            "ba" => Self::Ba(BaParams::default()),
            "fpa" => Self::Fpa(FpaParams::default()),
            "gwo" => Self::Gwo,
            "mfo" => Self::Mfo(MfoParams::default()),
            "sca" => Self::Sca(ScaParams::default()),
            "woa" => Self::Woa(WoaParams::default()),
            "da" => Self::Da(DaParams::default()),
            "hho" => Self::Hho(HhoParams::default()),
            _ => {
                return Err(Error::invalid(
                    "algorithm",
                    format!(
                        "unknown algorithm `{name}`; expected one of {}",
                        ALGORITHM_NAMES.join(", ")
                    ),
                ))
            }
        })
    }

    /// All ten algorithms with default hyperparameters, in canonical order.
    pub fn all() -> Vec<Self> {
        ALGORITHM_NAMES
            .iter()
            .map(|n| Self::from_name(n).expect("known name"))
            .collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Pso(_) => "pso",
            Self::De(_) => "de",
            Self::Ba(_) => "ba",
            Self::Fpa(_) => "fpa",
            Self::Gwo => "gwo",
            Self::Mfo(_) => "mfo",
            Self::Sca(_) => "sca",
            Self::Woa(_) => "woa",
            Self::Da(_) => "da",
            Self::Hho(_) => "hho",
        }
    }

    /// Position in [`ALGORITHM_NAMES`].
    pub fn index(&self) -> usize {
        ALGORITHM_NAMES
            .iter()
            .position(|n| *n == self.name())
            .expect("known name")
    }

    pub fn min_particles(&self) -> usize {
        match self {
            Self::De(_) => 6,
            Self::Gwo => 3,
            Self::Fpa(_) => 3,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Pso(p) => p.validate(),
            Self::De(p) => p.validate(),
            Self::Ba(p) => p.validate(),
            Self::Fpa(p) => p.validate(),
            Self::Gwo => Ok(()),
            Self::Mfo(p) => p.validate(),
            Self::Sca(p) => p.validate(),
            Self::Woa(p) => p.validate(),
            Self::Da(p) => p.validate(),
            Self::Hho(p) => p.validate(),
        }
    }
}

/// Outcome of one optimizer execution.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult<T> {
    pub algorithm: &'static str,
    pub best_params: Vec<T>,
    pub best_fitness: T,
    /// Iterations executed, stall window included.
    pub iterations_used: usize,
    /// Best-so-far fitness; entry 0 is the initial population, entry k is
    /// the value after iteration k.
    pub fitness_trace: Vec<T>,
    /// Best-so-far parameter vector, indexed like `fitness_trace`.
    pub best_trace: Vec<Vec<T>>,
    pub evaluations: usize,
    pub seed: u64,
}

impl<T: Scalar> RunResult<T> {
    /// One row per iteration (`iteration,best_A,best_B,best_fitness` for
    /// the two-parameter problem) followed by a `# summary` line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = std::io::BufWriter::new(out);
        write!(w, "iteration")?;
        for name in param_columns(self.best_params.len()) {
            write!(w, ",best_{name}")?;
        }
        writeln!(w, ",best_fitness")?;
        for (k, (x, f)) in self.best_trace.iter().zip(&self.fitness_trace).enumerate() {
            write!(w, "{k}")?;
            for v in x {
                write!(w, ",{:.8}", v.as_f64())?;
            }
            writeln!(w, ",{:.8}", f.as_f64())?;
        }
        writeln!(
            w,
            "# summary algorithm={} seed={} iterations_used={} evaluations={} best_fitness={:.8}",
            self.algorithm,
            self.seed,
            self.iterations_used,
            self.evaluations,
            self.best_fitness.as_f64()
        )?;
        w.flush()?;
        Ok(())
    }

    /// Writes `<dir>/<algorithm>_<seed>.csv` and returns its path.
    pub fn save_csv(&self, dir: impl AsRef<Path>) -> Result<std::path::PathBuf> {
        let path = dir
            .as_ref()
            .join(format!("{}_{}.csv", self.algorithm, self.seed));
        self.write_csv(std::fs::File::create(&path)?)?;
        Ok(path)
    }
}

/// Column suffixes: `A`, `B` in two dimensions, `x0`, `x1`, ... otherwise.
pub fn param_columns(dim: usize) -> Vec<String> {
    if dim == 2 {
        vec!["A".into(), "B".into()]
    } else {
        (0..dim).map(|j| format!("x{j}")).collect()
    }
}

/// Runs `algorithm` on `objective` over `space`.
pub fn run<T: Scalar, F: Objective<T>>(
    algorithm: &AlgorithmConfig,
    space: &SearchSpace<T>,
    config: &RunConfig,
    objective: F,
) -> Result<RunResult<T>> {
    space.validate()?;
    config.validate()?;
    algorithm.validate()?;
    if config.n_particles < algorithm.min_particles() {
        return Err(Error::invalid(
            "run config",
            format!(
                "{} needs at least {} particles, got {}",
                algorithm.name(),
                algorithm.min_particles(),
                config.n_particles
            ),
        ));
    }

    let mut ctx = Ctx::new(space, &objective, config);
    let init = ctx.map(0, |_, rng, probe| {
        let x = space.sample(rng);
        let f = probe.eval(&x);
        (x, f)
    });
    let (x, f) = init.into_iter().unzip();
    let mut pop = Population { x, f };
    let mut state = State::new(algorithm, &pop, &ctx);

    let mut fitness_trace = vec![ctx.best_f];
    let mut best_trace = vec![ctx.best_x.clone()];
    let mut stall = 0;
    let mut iterations_used = 0;
    for t in 1..=config.max_iterations {
        state.iterate(t, &mut pop, &mut ctx);
        iterations_used = t;
        let unchanged = same_bits(&ctx.best_x, best_trace.last().expect("non-empty"));
        fitness_trace.push(ctx.best_f);
        best_trace.push(ctx.best_x.clone());
        if unchanged {
            stall += 1;
            if stall >= config.stall_limit {
                break;
            }
        } else {
            stall = 0;
        }
    }

    Ok(RunResult {
        algorithm: algorithm.name(),
        best_params: ctx.best_x.clone(),
        best_fitness: ctx.best_f,
        iterations_used,
        fitness_trace,
        best_trace,
        evaluations: ctx.evaluations,
        seed: config.seed,
    })
}

fn same_bits<T: Scalar>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x.as_f64().to_bits() == y.as_f64().to_bits())
}

// Linear schedules shared by several algorithms. `t` counts iterations from 1.

/// Linearly decreasing coefficient of GWO and WOA: 2 at `t = 0`, 0 at `t = max`.
pub fn a_int<T: Scalar>(t: usize, max: usize) -> T {
    let two = T::lit(2.0);
    two - two * T::from_usize_lossy(t) / T::from_usize_lossy(max)
}

/// SCA amplitude `a - t a / k_max`.
pub fn sca_r<T: Scalar>(a: T, t: usize, k_max: usize) -> T {
    a - T::from_usize_lossy(t) * a / T::from_usize_lossy(k_max)
}

/// MFO flame count `floor(N - t (N - 1) / T + 0.5)`, at least 1.
pub fn mfo_flame_count(n_max: usize, t: usize, t_max: usize) -> usize {
    let n = n_max as f64;
    let v = (n - t as f64 * (n - 1.0) / t_max as f64 + 0.5).floor();
    (v.max(1.0) as usize).min(n_max)
}

/// HHO escaping energy `2 E0 (1 - t / k_max)`.
pub fn hho_energy<T: Scalar>(e0: T, t: usize, k_max: usize) -> T {
    T::lit(2.0) * e0 * (T::one() - T::from_usize_lossy(t) / T::from_usize_lossy(k_max))
}

#[inline]
pub(crate) fn unif<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.random::<f64>())
}

#[inline]
pub(crate) fn normal<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// Particle positions and their fitness.
#[derive(Debug, Clone)]
pub(crate) struct Population<T> {
    pub x: Vec<Vec<T>>,
    pub f: Vec<T>,
}

impl<T: Scalar> Population<T> {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn mean(&self) -> Vec<T> {
        let n = T::from_usize_lossy(self.len());
        (0..self.x[0].len())
            .map(|j| self.x.iter().map(|x| x[j]).sum::<T>() / n)
            .collect()
    }
}

/// Evaluates candidates for one particle and remembers the best it saw.
pub(crate) struct Probe<'a, T, F> {
    objective: &'a F,
    best: Option<(Vec<T>, T)>,
    count: usize,
}

impl<T: Scalar, F: Objective<T>> Probe<'_, T, F> {
    pub fn eval(&mut self, x: &[T]) -> T {
        let mut f = (self.objective)(x);
        if f.is_nan() {
            f = T::infinity();
        }
        self.count += 1;
        if self.best.as_ref().is_none_or(|(_, b)| f < *b) {
            self.best = Some((x.to_vec(), f));
        }
        f
    }
}

/// Shared run context: box, objective, seed and the best point so far.
pub(crate) struct Ctx<'a, T, F> {
    pub space: &'a SearchSpace<T>,
    objective: &'a F,
    pub seed: u64,
    pub n: usize,
    pub max_iterations: usize,
    pub best_x: Vec<T>,
    pub best_f: T,
    pub evaluations: usize,
}

/// Stream index reserved for draws shared by a whole generation.
pub(crate) const SHARED_STREAM: usize = u32::MAX as usize;

impl<'a, T: Scalar, F: Objective<T>> Ctx<'a, T, F> {
    pub fn new(space: &'a SearchSpace<T>, objective: &'a F, config: &RunConfig) -> Self {
        Self {
            space,
            objective,
            seed: config.seed,
            n: config.n_particles,
            max_iterations: config.max_iterations,
            best_x: Vec::new(),
            best_f: T::infinity(),
            evaluations: 0,
        }
    }

    /// Generator for particle `i` at iteration `t`.
    pub fn rng(&self, t: usize, i: usize) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(((t as u64) << 32) | (i as u64 & 0xffff_ffff));
        r
    }

    /// Runs `f` for every particle, possibly in parallel, then folds the
    /// evaluated candidates into the best-so-far in particle order.
    pub fn map<R, G>(&mut self, t: usize, f: G) -> Vec<R>
    where
        R: Send,
        G: Fn(usize, &mut ChaCha8Rng, &mut Probe<'a, T, F>) -> R + Sync,
    {
        let objective = self.objective;
        let this = &*self;
        let out: Vec<(R, Option<(Vec<T>, T)>, usize)> = (0..self.n)
            .into_par_iter()
            .map(|i| {
                let mut rng = this.rng(t, i);
                let mut probe = Probe {
                    objective,
                    best: None,
                    count: 0,
                };
                let r = f(i, &mut rng, &mut probe);
                (r, probe.best, probe.count)
            })
            .collect();
        out.into_iter()
            .map(|(r, best, count)| {
                self.evaluations += count;
                if let Some((x, fx)) = best {
                    if fx < self.best_f || self.best_x.is_empty() {
                        self.best_x = x;
                        self.best_f = fx;
                    }
                }
                r
            })
            .collect()
    }
}

enum State<T> {
    Pso(pso::Pso<T>),
    De(de::De),
    Ba(ba::Ba<T>),
    Fpa(fpa::Fpa),
    Gwo(gwo::Gwo<T>),
    Mfo(mfo::Mfo<T>),
    Sca(sca::Sca),
    Woa(woa::Woa),
    Da(da::Da<T>),
    Hho(hho::Hho),
}

impl<T: Scalar> State<T> {
    fn new<F: Objective<T>>(
        cfg: &AlgorithmConfig,
        pop: &Population<T>,
        ctx: &Ctx<'_, T, F>,
    ) -> Self {
        match cfg {
            AlgorithmConfig::Pso(p) => Self::Pso(pso::Pso::new(p, pop)),
            AlgorithmConfig::De(p) => Self::De(de::De::new(p)),
            AlgorithmConfig::Ba(p) => Self::Ba(ba::Ba::new(p, pop)),
            AlgorithmConfig::Fpa(p) => Self::Fpa(fpa::Fpa::new(p)),
            AlgorithmConfig::Gwo => Self::Gwo(gwo::Gwo::new(pop)),
            AlgorithmConfig::Mfo(p) => Self::Mfo(mfo::Mfo::new(p)),
            AlgorithmConfig::Sca(p) => Self::Sca(sca::Sca::new(p)),
            AlgorithmConfig::Woa(p) => Self::Woa(woa::Woa::new(p)),
            AlgorithmConfig::Da(p) => Self::Da(da::Da::new(p, pop, ctx)),
            AlgorithmConfig::Hho(p) => Self::Hho(hho::Hho::new(p)),
        }
    }

    fn iterate<F: Objective<T>>(
        &mut self,
        t: usize,
        pop: &mut Population<T>,
        ctx: &mut Ctx<'_, T, F>,
    ) {
        match self {
            Self::Pso(s) => s.iterate(t, pop, ctx),
            Self::De(s) => s.iterate(t, pop, ctx),
            Self::Ba(s) => s.iterate(t, pop, ctx),
            Self::Fpa(s) => s.iterate(t, pop, ctx),
            Self::Gwo(s) => s.iterate(t, pop, ctx),
            Self::Mfo(s) => s.iterate(t, pop, ctx),
            Self::Sca(s) => s.iterate(t, pop, ctx),
            Self::Woa(s) => s.iterate(t, pop, ctx),
            Self::Da(s) => s.iterate(t, pop, ctx),
            Self::Hho(s) => s.iterate(t, pop, ctx),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use std::sync::atomic::{AtomicBool, Ordering};

    /// Normalised quadratic with its minimum at the box centre plus an offset.
    pub fn quadratic(space: &SearchSpace<f64>) -> impl Fn(&[f64]) -> f64 + Sync + '_ {
        move |x: &[f64]| {
            (0..space.dim())
                .map(|j| {
                    let c = space.lower[j] + 0.37 * space.width(j);
                    ((x[j] - c) / space.width(j)).powi(2)
                })
                .sum()
        }
    }

    /// Test harness: a run context whose first generation is already evaluated.
    pub fn setup<'a, F: Objective<f64>>(
        space: &'a SearchSpace<f64>,
        objective: &'a F,
        config: &RunConfig,
    ) -> (Ctx<'a, f64, F>, Population<f64>) {
        let mut ctx = Ctx::new(space, objective, config);
        let init = ctx.map(0, |_, rng, probe| {
            let x = space.sample(rng);
            let f = probe.eval(&x);
            (x, f)
        });
        let (x, f) = init.into_iter().unzip();
        (ctx, Population { x, f })
    }

    #[test]
    fn clamp_examples() {
        let s = SearchSpace::<f64>::ihtc_default();
        assert_eq!(s.clamp(&[5000.0, -0.2]), vec![5000.0, -0.2]);
        assert_eq!(s.clamp(&[12000.0, -0.2]), vec![10000.0, -0.2]);
        assert_eq!(s.clamp(&[5000.0, -0.6]), vec![5000.0, -0.5]);
        assert_eq!(s.clamp(&[-1.0, 0.3]), vec![0.0, -0.005]);
    }

    #[test]
    fn schedule_values() {
        assert_eq!(a_int::<f64>(0, 100), 2.0);
        assert_eq!(a_int::<f64>(100, 100), 0.0);
        assert_eq!(a_int::<f64>(50, 100), 1.0);
        assert_eq!(mfo_flame_count(20, 100, 100), 1);
        assert_eq!(mfo_flame_count(20, 1, 100), 20);
        assert_eq!(sca_r(2.0f64, 50, 100), 1.0);
        assert_eq!(hho_energy(-0.5f64, 50, 100), -0.5);
        assert_eq!(hho_energy(-0.5f64, 100, 100), 0.0);
    }

    #[test]
    fn names_round_trip() {
        for (i, n) in ALGORITHM_NAMES.iter().enumerate() {
            let a = AlgorithmConfig::from_name(n).unwrap();
            assert_eq!(a.name(), *n);
            assert_eq!(a.index(), i);
        }
        assert!(AlgorithmConfig::from_name("MFO").is_ok());
        let err = AlgorithmConfig::from_name("cuckoo")
            .unwrap_err()
            .to_string();
        for n in ALGORITHM_NAMES {
            assert!(err.contains(n), "{err}");
        }
    }

    #[test]
    fn config_validation() {
        let s = SearchSpace::<f64>::ihtc_default();
        let f = |_: &[f64]| 0.0;
        let bad = RunConfig {
            stall_limit: 0,
            ..RunConfig::default()
        };
        assert!(run(&AlgorithmConfig::Gwo, &s, &bad, f).is_err());
        let few = RunConfig {
            n_particles: 5,
            ..RunConfig::default()
        };
        assert!(run(&AlgorithmConfig::from_name("de").unwrap(), &s, &few, f).is_err());
        assert!(SearchSpace::new(vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn constant_objective_stops_after_stall_window() {
        let s = SearchSpace::<f64>::ihtc_default();
        for alg in AlgorithmConfig::all() {
            let r = run(&alg, &s, &RunConfig::default(), |_: &[f64]| 7.0).unwrap();
            assert_eq!(r.iterations_used, 10, "{}", alg.name());
            assert_eq!(r.fitness_trace.len(), 11);
        }
    }

    #[test]
    fn every_algorithm_invariants() {
        let s = SearchSpace::<f64>::ihtc_default();
        let q = quadratic(&s);
        for alg in AlgorithmConfig::all() {
            for seed in 0..3 {
                let outside = AtomicBool::new(false);
                let cfg = RunConfig::default().with_seed(seed);
                let obj = |x: &[f64]| {
                    if !s.contains(x) {
                        outside.store(true, Ordering::Relaxed);
                    }
                    q(x)
                };
                let r = run(&alg, &s, &cfg, obj).unwrap();
                assert!(
                    !outside.load(Ordering::Relaxed),
                    "{} evaluated outside the box",
                    alg.name()
                );
                assert!(
                    r.fitness_trace.windows(2).all(|w| w[1] <= w[0]),
                    "{}",
                    alg.name()
                );
                assert!(r.iterations_used <= cfg.max_iterations);
                assert_eq!(r.fitness_trace.len(), r.iterations_used + 1);
                assert_eq!(*r.fitness_trace.last().unwrap(), r.best_fitness);
                assert_eq!(q(&r.best_params), r.best_fitness);
                let again = run(&alg, &s, &cfg, &q).unwrap();
                assert_eq!(again, r, "{} not deterministic", alg.name());
            }
        }
    }

    #[test]
    fn single_precision_runs() {
        let s = SearchSpace::<f32>::ihtc_default();
        let r = run(
            &AlgorithmConfig::from_name("mfo").unwrap(),
            &s,
            &RunConfig::default(),
            |x: &[f32]| ((x[0] - 6000.0) / 1e4).powi(2) + ((x[1] + 0.15) / 0.5).powi(2),
        )
        .unwrap();
        assert!(r.best_fitness < 1e-2);
    }

    #[test]
    fn convex_quadratic_recovered() {
        let s = SearchSpace::<f64>::ihtc_default();
        let q = quadratic(&s);
        for name in ["mfo", "pso", "gwo"] {
            let alg = AlgorithmConfig::from_name(name).unwrap();
            let hits = (0..10)
                .filter(|&seed| {
                    run(&alg, &s, &RunConfig::default().with_seed(seed), &q)
                        .unwrap()
                        .best_fitness
                        < 1e-3
                })
                .count();
            assert!(hits >= 9, "{name}: {hits}/10");
        }
    }

    #[test]
    fn csv_layout() {
        let s = SearchSpace::<f64>::ihtc_default();
        let r = run(
            &AlgorithmConfig::Gwo,
            &s,
            &RunConfig::default().with_seed(3),
            quadratic(&s),
        )
        .unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "iteration,best_A,best_B,best_fitness");
        assert_eq!(lines.len(), r.iterations_used + 3);
        assert!(lines
            .last()
            .unwrap()
            .starts_with("# summary algorithm=gwo seed=3"));
        let dir = tempfile::tempdir().unwrap();
        let p = r.save_csv(dir.path()).unwrap();
        assert!(p.ends_with("gwo_3.csv"));
    }
}
