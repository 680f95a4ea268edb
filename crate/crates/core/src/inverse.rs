//! Objective linking IHTC parameters to thermocouple data, plus loading and
//! synthesis of experiments.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::alloy::AlloyProperties;
use crate::error::{Error, Result};
use crate::fvm::{simulate, BoundarySpec, MeshSpec};
use crate::history::ThermalHistory;
use crate::ihtc::IhtcParams;
use crate::scalar::Scalar;

/// Objective value returned when the forward solve fails, K.
pub const DIVERGENCE_PENALTY: f64 = 1.0e6;

/// Default thermocouple heights, m.
pub const DEFAULT_PROBES: [f64; 3] = [0.004, 0.008, 0.012];

/// Default measurement standard deviation, K.
pub const DEFAULT_NOISE_STD: f64 = 5.0;

/// Where an experiment came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance<T> {
    File(String),
    Synthetic {
        seed: u64,
        truth: IhtcParams<T>,
        noise_std: T,
    },
}

impl<T: Scalar> fmt::Display for Provenance<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::File(p) => write!(f, "file:{p}"),
            Provenance::Synthetic {
                seed,
                truth,
                noise_std,
            } => write!(
                f,
                "synthetic:seed={seed},A={},B={},noise_std={}",
                truth.a, truth.b, noise_std
            ),
        }
    }
}

/// Thermocouple measurements with their assumed noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment<T> {
    pub history: ThermalHistory<T>,
    /// Assumed measurement standard deviation, K.
    pub noise_std: T,
    pub provenance: Provenance<T>,
}

/// Sidecar metadata written next to a synthetic experiment CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentMeta {
    pub noise_std: f64,
    pub seed: Option<u64>,
    pub true_a: Option<f64>,
    pub true_b: Option<f64>,
}

impl<T: Scalar> Experiment<T> {
    pub fn validate(&self) -> Result<()> {
        self.history.validate()?;
        if !(self.noise_std.is_finite() && self.noise_std >= T::zero()) {
            return Err(Error::invalid(
                "experiment",
                format!("noise_std must be >= 0, got {}", self.noise_std),
            ));
        }
        Ok(())
    }

    /// Loads an experiment CSV. A sidecar `<file>.meta.toml`, when present,
    /// supplies the noise level; otherwise the default of 5 K is assumed.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let history = ThermalHistory::load_csv(path)?;
        let meta_path = sidecar_path(path);
        let noise_std = if meta_path.exists() {
            read_meta(&meta_path)?.noise_std
        } else {
            DEFAULT_NOISE_STD
        };
        let exp = Self {
            history,
            noise_std: T::lit(noise_std),
            provenance: Provenance::File(path.display().to_string()),
        };
        exp.validate()?;
        Ok(exp)
    }

    /// Writes the CSV and its metadata sidecar.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.history.save_csv(path)?;
        let meta = match &self.provenance {
            Provenance::Synthetic { seed, truth, .. } => ExperimentMeta {
                noise_std: self.noise_std.as_f64(),
                seed: Some(*seed),
                true_a: Some(truth.a.as_f64()),
                true_b: Some(truth.b.as_f64()),
            },
            Provenance::File(_) => ExperimentMeta {
                noise_std: self.noise_std.as_f64(),
                seed: None,
                true_a: None,
                true_b: None,
            },
        };
        let text = toml::to_string(&meta)
            .map_err(|e| Error::invalid("experiment metadata", e.to_string()))?;
        fs::write(sidecar_path(path), text)?;
        Ok(())
    }
}

/// `exp.csv` -> `exp.csv.meta.toml`
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.toml");
    s.into()
}

fn read_meta(path: &Path) -> Result<ExperimentMeta> {
    let text = fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e
            .span()
            .map(|s| text[..s.start].matches('\n').count() as u64 + 1)
            .unwrap_or(0),
        reason: e.message().to_string(),
    })
}

/// Loads an experiment from the thermal-history CSV format.
pub fn load_experiment<T: Scalar>(path: impl AsRef<Path>) -> Result<Experiment<T>> {
    Experiment::load(path)
}

/// Forward model settings shared by every objective evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardModel<T> {
    pub alloy: AlloyProperties<T>,
    pub mesh: MeshSpec<T>,
    pub boundary: BoundarySpec<T>,
}

impl<T: Scalar> ForwardModel<T> {
    pub fn validate(&self) -> Result<()> {
        self.alloy.validate()?;
        self.mesh.validate()?;
        self.boundary.validate(&self.alloy)
    }

    pub fn simulate(&self, params: &IhtcParams<T>, probes: &[T]) -> Result<ThermalHistory<T>> {
        simulate(&self.alloy, &self.mesh, &self.boundary, params, probes)
    }
}

/// Sampling plan of a synthetic experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentDesign<T> {
    /// Thermocouple heights, m.
    pub probes: Vec<T>,
    /// Time between recorded samples, s. The first sample is taken one
    /// interval after the start.
    pub sample_interval: T,
}

impl<T: Scalar> ExperimentDesign<T> {
    pub fn sample_times(&self, t_end: T) -> Vec<T> {
        let n = (t_end / self.sample_interval + T::lit(1e-9))
            .floor()
            .to_usize()
            .unwrap_or(0);
        (1..=n)
            .map(|k| T::from_usize_lossy(k) * self.sample_interval)
            .collect()
    }
}

impl<T: Scalar> Default for ExperimentDesign<T> {
    fn default() -> Self {
        Self {
            probes: DEFAULT_PROBES.iter().map(|&p| T::lit(p)).collect(),
            sample_interval: T::one(),
        }
    }
}

/// Forward-simulates `truth` and perturbs every sample with i.i.d. Gaussian
/// noise of standard deviation `noise_std` drawn from a stream seeded by
/// `seed`.
pub fn synthesize_experiment<T: Scalar>(
    truth: &IhtcParams<T>,
    model: &ForwardModel<T>,
    design: &ExperimentDesign<T>,
    noise_std: T,
    seed: u64,
) -> Result<Experiment<T>> {
    if !(noise_std.is_finite() && noise_std >= T::zero()) {
        return Err(Error::invalid(
            "noise_std",
            format!("must be >= 0, got {noise_std}"),
        ));
    }
    if !(design.sample_interval.is_finite() && design.sample_interval > T::zero()) {
        return Err(Error::invalid("sample_interval", "must be > 0"));
    }
    let clean = model.simulate(truth, &design.probes)?;
    let times = design.sample_times(model.mesh.t_end);
    if times.is_empty() {
        return Err(Error::invalid(
            "experiment design",
            "sample interval exceeds the simulated horizon",
        ));
    }
    let mut history = clean.resample(&times)?;
    if noise_std > T::zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for trace in &mut history.temperatures {
            for v in trace.iter_mut() {
                let n: f64 = StandardNormal.sample(&mut rng);
                *v = *v + noise_std * T::lit(n);
            }
        }
    }
    Ok(Experiment {
        history,
        noise_std,
        provenance: Provenance::Synthetic {
            seed,
            truth: *truth,
            noise_std,
        },
    })
}

/// Root-mean-square deviation between two aligned traces.
pub fn profile_rmsd<T: Scalar>(simulated: &[T], measured: &[T]) -> Result<T> {
    if simulated.is_empty() {
        return Err(Error::Empty("profile"));
    }
    if simulated.len() != measured.len() {
        return Err(Error::invalid(
            "profile",
            format!("length mismatch {} vs {}", simulated.len(), measured.len()),
        ));
    }
    let ss: T = simulated
        .iter()
        .zip(measured)
        .map(|(&s, &m)| (s - m) * (s - m))
        .sum();
    Ok((ss / T::from_usize_lossy(simulated.len())).sqrt())
}

/// Everything needed to score a parameter vector against an experiment.
#[derive(Debug, Clone)]
pub struct FitnessSpec<T> {
    pub model: ForwardModel<T>,
    pub experiment: Experiment<T>,
}

impl<T: Scalar> FitnessSpec<T> {
    pub fn new(model: ForwardModel<T>, experiment: Experiment<T>) -> Result<Self> {
        model.validate()?;
        experiment.validate()?;
        let last = *experiment.history.times.last().expect("validated");
        if last > model.mesh.t_end + model.mesh.dt * T::lit(0.5) {
            return Err(Error::invalid(
                "fitness spec",
                format!(
                    "experiment extends to {last} s but the simulation stops at {} s",
                    model.mesh.t_end
                ),
            ));
        }
        if experiment.history.times[0] < T::zero() {
            return Err(Error::invalid(
                "fitness spec",
                "experiment times must be >= 0",
            ));
        }
        for &p in &experiment.history.positions {
            model.mesh.cell_of(p)?;
        }
        Ok(Self { model, experiment })
    }

    /// Simulated probe traces aligned to the experiment timestamps.
    pub fn simulated_traces(&self, params: &IhtcParams<T>) -> Result<ThermalHistory<T>> {
        let exp = &self.experiment.history;
        let sim = self.model.simulate(params, &exp.positions)?;
        sim.resample(&exp.times)
    }

    /// Per-probe residuals `measured - simulated`.
    pub fn residuals(&self, params: &IhtcParams<T>) -> Result<Vec<Vec<T>>> {
        let sim = self.simulated_traces(params)?;
        Ok(self
            .experiment
            .history
            .temperatures
            .iter()
            .zip(&sim.temperatures)
            .map(|(m, s)| m.iter().zip(s).map(|(&m, &s)| m - s).collect())
            .collect())
    }

    /// Per-probe RMSD between simulation and measurement, K.
    pub fn probe_deviations(&self, params: &IhtcParams<T>) -> Result<Vec<T>> {
        let sim = self.simulated_traces(params)?;
        self.experiment
            .history
            .temperatures
            .iter()
            .zip(&sim.temperatures)
            .map(|(m, s)| profile_rmsd(s, m))
            .collect()
    }

    /// Sum over probes of the RMSD between simulated and measured traces.
    /// Invalid parameters or a failed solve score [`DIVERGENCE_PENALTY`].
    pub fn fitness(&self, params: &IhtcParams<T>) -> T {
        if params.validate().is_err() {
            return T::lit(DIVERGENCE_PENALTY);
        }
        match self.probe_deviations(params) {
            Ok(d) => {
                let total: T = d.into_iter().sum();
                if total.is_finite() {
                    total
                } else {
                    T::lit(DIVERGENCE_PENALTY)
                }
            }
            Err(_) => T::lit(DIVERGENCE_PENALTY),
        }
    }

    /// Objective over an optimizer vector `[A, B]`.
    pub fn objective(&self, theta: &[T]) -> T {
        self.fitness(&IhtcParams::from_slice(theta))
    }
}

/// Free-function form of [`FitnessSpec::fitness`].
pub fn fitness<T: Scalar>(params: &IhtcParams<T>, spec: &FitnessSpec<T>) -> T {
    spec.fitness(params)
}
