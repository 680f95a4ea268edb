//! Tool configuration: one TOML file, checked completely before any compute.
//!
//! Every section is optional and falls back to the defaults below. Unknown
//! keys are rejected so that typos do not silently fall back to a default.
//!
//! ```toml
//! seed = 0
//! workers = 4
//!
//! [alloy]            # all fields mandatory when present
//! [mesh]             # length, n_volumes, dt, t_end, output_interval
//! [boundary]         # t_env, t_init
//! [search]           # a = [lo, hi], b = [lo, hi]
//! [run]              # n_particles, max_iterations, stall_limit
//! [algorithms.pso]   # per-algorithm hyperparameter overrides
//! [mcmc]             # prior, chain length, step, burn-in, start scales
//! [experiment]       # path = "data.csv", or a [experiment.synthetic] block
//! [simulate]         # a, b, probes
//! [benchmark]        # replicates
//! [output]           # dir
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use ihtc_core::inverse::{
    synthesize_experiment, Experiment, ExperimentDesign, FitnessSpec, ForwardModel,
    DEFAULT_NOISE_STD, DEFAULT_PROBES,
};
use ihtc_core::mcmc::{ChainConfig, DEFAULT_PRIOR_MEAN, DEFAULT_PRIOR_STD, DEFAULT_START_SCALES};
use ihtc_core::metaheuristics::{
    AlgorithmConfig, BaParams, DaParams, DeParams, FpaParams, HhoParams, MfoParams, PsoParams,
    RunConfig, ScaParams, SearchSpace, WoaParams, ALGORITHM_NAMES,
};
use ihtc_core::{Alloy, Boundary, Ihtc, Mesh};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct ToolConfig {
    /// Top-level seed every random stream derives from.
    pub seed: u64,
    /// Worker-pool size; `None` uses all available cores.
    pub workers: Option<usize>,
    pub alloy: Alloy,
    pub mesh: MeshSection,
    pub boundary: Boundary,
    pub search: SearchSection,
    pub run: RunSection,
    pub algorithms: AlgorithmOverrides,
    pub mcmc: McmcSection,
    pub experiment: ExperimentSection,
    pub simulate: SimulateSection,
    pub benchmark: BenchmarkSection,
    pub output: OutputSection,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ToolConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: None,
            alloy: Alloy::al_7si(),
            mesh: MeshSection::default(),
            boundary: Boundary {
                t_env: 300.0,
                t_init: 930.0,
            },
            search: SearchSection::default(),
            run: RunSection::default(),
            algorithms: AlgorithmOverrides::default(),
            mcmc: McmcSection::default(),
            experiment: ExperimentSection::default(),
            simulate: SimulateSection::default(),
            benchmark: BenchmarkSection::default(),
            output: OutputSection::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct MeshSection {
    pub length: f64,
    pub n_volumes: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Record spacing of `simulate` output, s.
    pub output_interval: f64,
}

impl Default for MeshSection {
    fn default() -> Self {
        Self {
            length: 0.1,
            n_volumes: 50,
            dt: 0.01,
            t_end: 200.0,
            output_interval: 1.0,
        }
    }
}

impl MeshSection {
    pub fn spec(&self) -> Mesh {
        Mesh::new(self.length, self.n_volumes, self.dt, self.t_end)
            .with_output_interval(self.output_interval)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct SearchSection {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Default for SearchSection {
    fn default() -> Self {
        Self {
            a: [0.0, 10_000.0],
            b: [-0.5, -0.005],
        }
    }
}

impl SearchSection {
    pub fn space(&self) -> SearchSpace<f64> {
        SearchSpace {
            lower: vec![self.a[0], self.b[0]],
            upper: vec![self.a[1], self.b[1]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default)]
pub struct RunSection {
    pub n_particles: usize,
    pub max_iterations: usize,
    pub stall_limit: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        let d = RunConfig::default();
        Self {
            n_particles: d.n_particles,
            max_iterations: d.max_iterations,
            stall_limit: d.stall_limit,
        }
    }
}

impl RunSection {
    pub fn config(&self, seed: u64) -> RunConfig {
        RunConfig {
            n_particles: self.n_particles,
            max_iterations: self.max_iterations,
            stall_limit: self.stall_limit,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default)]
pub struct AlgorithmOverrides {
    pub pso: PsoParams,
    pub de: DeParams,
    pub ba: BaParams,
    pub fpa: FpaParams,
    pub mfo: MfoParams,
    pub sca: ScaParams,
    pub woa: WoaParams,
    pub da: DaParams,
    pub hho: HhoParams,
}

impl AlgorithmOverrides {
    /// Algorithm by name with the configured hyperparameters.
    pub fn get(&self, name: &str) -> Result<AlgorithmConfig, CliError> {
        Ok(match name.to_ascii_lowercase().as_str() {
            "pso" => AlgorithmConfig::Pso(self.pso),
            "de" => AlgorithmConfig::De(self.de),
            "ba" => AlgorithmConfig::Ba(self.ba),
            "fpa" => AlgorithmConfig::Fpa(self.fpa),
            "gwo" => AlgorithmConfig::Gwo,
            "mfo" => AlgorithmConfig::Mfo(self.mfo),
            "sca" => AlgorithmConfig::Sca(self.sca),
            "woa" => AlgorithmConfig::Woa(self.woa),
            "da" => AlgorithmConfig::Da(self.da),
            "hho" => AlgorithmConfig::Hho(self.hho),
            _ => {
                return Err(CliError::Config(format!(
                    "unknown algorithm `{name}`; valid names: {}",
                    ALGORITHM_NAMES.join(", ")
                )))
            }
        })
    }

    /// All ten algorithms in canonical order.
    pub fn all(&self) -> Vec<AlgorithmConfig> {
        ALGORITHM_NAMES
            .iter()
            .map(|n| self.get(n).expect("known name"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct McmcSection {
    pub prior_mean: Vec<f64>,
    pub prior_std: Vec<f64>,
    pub n_states: usize,
    pub step_scale: f64,
    pub burn_in: usize,
    pub start_scales: Vec<f64>,
    /// Measurement standard deviation in the likelihood; defaults to the
    /// experiment's noise level.
    pub meas_std: Option<f64>,
}

impl Default for McmcSection {
    fn default() -> Self {
        let d = ChainConfig::default();
        Self {
            prior_mean: DEFAULT_PRIOR_MEAN.to_vec(),
            prior_std: DEFAULT_PRIOR_STD.to_vec(),
            n_states: d.n_states,
            step_scale: d.step_scale,
            burn_in: d.burn_in,
            start_scales: DEFAULT_START_SCALES.to_vec(),
            meas_std: None,
        }
    }
}

impl McmcSection {
    pub fn chain_config(&self, seed: u64) -> ChainConfig {
        ChainConfig {
            prior_mean: self.prior_mean.clone(),
            prior_std: self.prior_std.clone(),
            n_states: self.n_states,
            start_scale: 1.0,
            step_scale: self.step_scale,
            burn_in: self.burn_in,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default)]
pub struct ExperimentSection {
    /// Thermal-history CSV with measured probe temperatures.
    pub path: Option<PathBuf>,
    /// Used when `path` is absent.
    pub synthetic: SyntheticSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct SyntheticSection {
    pub a: f64,
    pub b: f64,
    pub noise_std: f64,
    pub seed: u64,
    pub probes: Vec<f64>,
    pub sample_interval: f64,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        Self {
            a: 6301.0,
            b: -0.147,
            noise_std: DEFAULT_NOISE_STD,
            seed: 1,
            probes: DEFAULT_PROBES.to_vec(),
            sample_interval: 1.0,
        }
    }
}

impl SyntheticSection {
    pub fn truth(&self) -> Ihtc {
        Ihtc::new(self.a, self.b)
    }

    pub fn design(&self) -> ExperimentDesign<f64> {
        ExperimentDesign {
            probes: self.probes.clone(),
            sample_interval: self.sample_interval,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct SimulateSection {
    pub a: f64,
    pub b: f64,
    pub probes: Vec<f64>,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            a: 6301.0,
            b: -0.147,
            probes: DEFAULT_PROBES.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default)]
pub struct BenchmarkSection {
    pub replicates: usize,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        Self { replicates: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

impl ToolConfig {
    /// Reads, parses and validates `path`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text, &path.display().to_string())?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses TOML text without validating. `source` names the input in
    /// error messages.
    pub fn parse(text: &str, source: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| toml_error(e, text, source))?;
        let mut unknown = Vec::new();
        let cfg: Self = serde_ignored::deserialize(de, |p| unknown.push(p.to_string()))
            .map_err(|e| toml_error(e, text, source))?;
        if !unknown.is_empty() {
            return Err(CliError::Config(format!(
                "{source}: unknown key(s): {}",
                unknown.join(", ")
            )));
        }
        Ok(cfg)
    }

    /// Checks every section; the first violation is reported with its
    /// section and field.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |section: &str, e: ihtc_core::Error| CliError::Config(format!("[{section}] {e}"));
        self.alloy.validate().map_err(|e| bad("alloy", e))?;
        let mesh = self.mesh.spec();
        mesh.validate().map_err(|e| bad("mesh", e))?;
        self.boundary
            .validate(&self.alloy)
            .map_err(|e| bad("boundary", e))?;
        self.search
            .space()
            .validate()
            .map_err(|e| bad("search", e))?;
        self.run
            .config(self.seed)
            .validate()
            .map_err(|e| bad("run", e))?;
        for alg in self.algorithms.all() {
            alg.validate()
                .map_err(|e| bad(&format!("algorithms.{}", alg.name()), e))?;
            if self.run.n_particles < alg.min_particles() {
                return Err(CliError::Config(format!(
                    "[run] n_particles: {} needs at least {} particles, got {}",
                    alg.name(),
                    alg.min_particles(),
                    self.run.n_particles
                )));
            }
        }
        self.mcmc
            .chain_config(self.seed)
            .validate()
            .map_err(|e| bad("mcmc", e))?;
        if self.mcmc.prior_mean.len() != 2 {
            return Err(CliError::Config(
                "[mcmc] prior_mean: expected two entries (A, B)".into(),
            ));
        }
        if self.mcmc.start_scales.is_empty()
            || self.mcmc.start_scales.iter().any(|s| !s.is_finite())
        {
            return Err(CliError::Config(
                "[mcmc] start_scales: need at least one finite entry".into(),
            ));
        }
        if let Some(s) = self.mcmc.meas_std {
            if !(s.is_finite() && s > 0.0) {
                return Err(CliError::Config(format!(
                    "[mcmc] meas_std: must be > 0, got {s}"
                )));
            }
        }
        match &self.experiment.path {
            Some(p) => {
                let full = self.resolve(p);
                if !full.is_file() {
                    return Err(CliError::Config(format!(
                        "[experiment] path: file {} does not exist",
                        full.display()
                    )));
                }
            }
            None => self.validate_synthetic()?,
        }
        self.validate_probes("simulate", &self.simulate.probes)?;
        if self.workers == Some(0) {
            return Err(CliError::Config("workers: must be >= 1".into()));
        }
        if self.benchmark.replicates == 0 {
            return Err(CliError::Config(
                "[benchmark] replicates: must be >= 1".into(),
            ));
        }
        Ok(())
    }

    fn validate_synthetic(&self) -> Result<(), CliError> {
        let s = &self.experiment.synthetic;
        s.truth()
            .validate()
            .map_err(|e| CliError::Config(format!("[experiment.synthetic] {e}")))?;
        if !(s.noise_std.is_finite() && s.noise_std >= 0.0) {
            return Err(CliError::Config(format!(
                "[experiment.synthetic] noise_std: must be >= 0, got {}",
                s.noise_std
            )));
        }
        if !(s.sample_interval.is_finite()
            && s.sample_interval > 0.0
            && s.sample_interval <= self.mesh.t_end)
        {
            return Err(CliError::Config(format!(
                "[experiment.synthetic] sample_interval: must lie in (0, t_end], got {}",
                s.sample_interval
            )));
        }
        self.validate_probes("experiment.synthetic", &s.probes)
    }

    fn validate_probes(&self, section: &str, probes: &[f64]) -> Result<(), CliError> {
        if probes.is_empty() {
            return Err(CliError::Config(format!(
                "[{section}] probes: need at least one position"
            )));
        }
        if let Some(p) = probes
            .iter()
            .find(|p| !(p.is_finite() && **p >= 0.0 && **p <= self.mesh.length))
        {
            return Err(CliError::Config(format!(
                "[{section}] probes: position {p} outside [0, {}]",
                self.mesh.length
            )));
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn model(&self) -> ForwardModel<f64> {
        ForwardModel {
            alloy: self.alloy,
            mesh: Mesh::new(
                self.mesh.length,
                self.mesh.n_volumes,
                self.mesh.dt,
                self.mesh.t_end,
            ),
            boundary: self.boundary,
        }
    }

    /// Loads or synthesizes the experiment and binds it to the forward model.
    pub fn fitness_spec(&self) -> Result<FitnessSpec<f64>, CliError> {
        let exp = match &self.experiment.path {
            Some(p) => {
                let full = self.resolve(p);
                Experiment::load(&full)
                    .map_err(|e| CliError::Data(format!("{}: {e}", full.display())))?
            }
            None => {
                let s = &self.experiment.synthetic;
                synthesize_experiment(&s.truth(), &self.model(), &s.design(), s.noise_std, s.seed)
                    .map_err(CliError::numerical)?
            }
        };
        FitnessSpec::new(self.model(), exp)
            .map_err(|e| CliError::Data(format!("experiment does not fit the model: {e}")))
    }

    /// Noise-free truth of a synthetic experiment.
    pub fn synthetic_truth(&self) -> Option<Ihtc> {
        self.experiment
            .path
            .is_none()
            .then(|| self.experiment.synthetic.truth())
    }
}

fn toml_error(e: toml::de::Error, text: &str, source: &str) -> CliError {
    let Some(span) = e.span() else {
        return CliError::Config(format!("{source}: {}", e.message()));
    };
    let before = &text[..span.start.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let line_end = text[before.len()..]
        .find('\n')
        .map_or(text.len(), |i| before.len() + i);
    let section = text[..line_end]
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| l.starts_with('['))
        .map(|l| format!(" in {}", l.split('#').next().unwrap_or(l).trim()))
        .unwrap_or_default();
    CliError::Config(format!("{source}:{line}{section}: {}", e.message()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ToolConfig::parse("", "t").unwrap();
        assert_eq!(cfg, ToolConfig::default());
        cfg.validate().unwrap();
        assert_eq!(cfg.mesh.n_volumes, 50);
        assert_eq!(cfg.mesh.dt, 0.01);
        assert_eq!(cfg.mesh.t_end, 200.0);
        assert_eq!(cfg.benchmark.replicates, 40);
        assert_eq!(cfg.mcmc.start_scales.len(), 7);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ToolConfig::parse("[mesh]\nn_volume = 10\n", "t").unwrap_err();
        assert!(err.to_string().contains("mesh.n_volume"), "{err}");
        let err = ToolConfig::parse("[algorithms.pso]\ngamma = 1.0\n", "t").unwrap_err();
        assert!(err.to_string().contains("algorithms.pso.gamma"), "{err}");
    }

    #[test]
    fn alloy_section_needs_every_field() {
        let err = ToolConfig::parse("[alloy]\nk_s = 150.0\n", "cfg.toml").unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("cfg.toml:1 in [alloy]") && msg.contains("missing field"),
            "{msg}"
        );
    }

    #[test]
    fn validation_names_section_and_field() {
        let cfg = ToolConfig::parse("[mesh]\ndt = -1.0\n", "t").unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("[mesh]"));
        let cfg = ToolConfig::parse("[simulate]\nprobes = [0.5]\n", "t").unwrap();
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("[simulate] probes"), "{msg}");
        let cfg = ToolConfig::parse("[experiment]\npath = \"missing.csv\"\n", "t").unwrap();
        assert!(cfg
            .validate()
            .unwrap_err()
            .to_string()
            .contains("[experiment] path"));
        let cfg = ToolConfig::parse("[run]\nn_particles = 4\n", "t").unwrap();
        assert!(cfg
            .validate()
            .unwrap_err()
            .to_string()
            .contains("de needs at least 6"));
        let cfg = ToolConfig::parse("[algorithms.sca]\na = -1.0\n", "t").unwrap();
        assert!(cfg
            .validate()
            .unwrap_err()
            .to_string()
            .contains("[algorithms.sca]"));
    }

    #[test]
    fn overrides_reach_the_algorithm() {
        let cfg = ToolConfig::parse("[algorithms.pso]\ntheta = 0.7\n", "t").unwrap();
        match cfg.algorithms.get("PSO").unwrap() {
            AlgorithmConfig::Pso(p) => {
                assert_eq!(p.theta, 0.7);
                assert_eq!(p.alpha, 2.0);
            }
            other => panic!("{other:?}"),
        }
        let err = cfg.algorithms.get("cuckoo").unwrap_err().to_string();
        for name in ALGORITHM_NAMES {
            assert!(err.contains(name), "{err}");
        }
    }
}
