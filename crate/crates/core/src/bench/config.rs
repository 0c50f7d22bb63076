use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::envs::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::geometry::{Config, ConfigSpace};
use crate::metrics::MmdConfig;
use crate::models::BoxBarrierPrior;
use crate::planner::PlannerOptions;
use crate::sampling::{MixtureComponent, Prior};
use crate::svgd::SvgdConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySpec {
    pub start: Config,
    pub goal: Config,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadmapSection {
    pub beta: f64,
    pub rho: f64,
    /// Defaults to `min(map cell, rho) / 8`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_resolution: Option<f64>,
    #[serde(default = "yes")]
    pub lazy: bool,
}

fn yes() -> bool {
    true
}

impl Default for RoadmapSection {
    fn default() -> Self {
        RoadmapSection { beta: 0.5, rho: 0.2, edge_resolution: None, lazy: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerSection {
    pub astar: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_edge_evals: Option<usize>,
}

impl PlannerSection {
    pub fn options(&self) -> PlannerOptions {
        PlannerOptions { astar: self.astar }
    }
}

/// A prior, optionally refined by SVGD.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub prior: Prior,
    #[serde(default)]
    pub svgd: bool,
}

impl SamplerSpec {
    pub fn label(&self) -> String {
        format!("{}({})", if self.svgd { "SV-PRM" } else { "PRM" }, self.prior.short())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MmdSection {
    pub reference_samples: usize,
    pub kernel: MmdConfig,
}

impl Default for MmdSection {
    fn default() -> Self {
        MmdSection { reference_samples: 1000, kernel: MmdConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoverageSection {
    pub probes: usize,
}

impl Default for CoverageSection {
    fn default() -> Self {
        CoverageSection { probes: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchSection {
    pub samplers: Vec<SamplerSpec>,
    pub n: Vec<usize>,
    /// Trial seeds; one report row per sampler, `n` and seed.
    pub seeds: Vec<u64>,
    /// Standard deviation of the default mixture components.
    pub mixture_std: f64,
    /// Explicit mixture; defaults to start, goal and home.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixture: Option<Vec<MixtureComponent>>,
    /// Offset of the Halton index. With `halton_per_seed`, trial seed `s`
    /// at `n` particles adds `s * n` so that trials use disjoint stretches.
    pub halton_skip: usize,
    pub halton_per_seed: bool,
    /// Skip planning (metrics only).
    pub plan: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mmd: Option<MmdSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<CoverageSection>,
}

impl Default for BenchSection {
    fn default() -> Self {
        BenchSection {
            samplers: vec![
                SamplerSpec { prior: Prior::Uniform, svgd: false },
                SamplerSpec { prior: Prior::Uniform, svgd: true },
            ],
            n: vec![100],
            seeds: (0..10).collect(),
            mixture_std: 0.3,
            mixture: None,
            halton_skip: 0,
            halton_per_seed: false,
            plan: true,
            mmd: None,
            coverage: None,
        }
    }
}

/// The single-trial pipeline behind `infer`, `build`, `plan` and `run`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub sampler: SamplerSpec,
    pub n: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { sampler: SamplerSpec { prior: Prior::Uniform, svgd: true }, n: 100 }
    }
}

/// Joint-limit barrier of the SVGD prior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorSection {
    pub stiffness: f64,
    /// Barrier band width as a fraction of the smallest box extent.
    pub margin_fraction: f64,
}

impl Default for PriorSection {
    fn default() -> Self {
        PriorSection {
            stiffness: BoxBarrierPrior::DEFAULT_STIFFNESS,
            margin_fraction: BoxBarrierPrior::DEFAULT_MARGIN_FRACTION,
        }
    }
}

impl PriorSection {
    pub fn build(&self, space: ConfigSpace) -> BoxBarrierPrior {
        let extent = (0..space.dim()).map(|i| space.extent(i)).fold(f64::INFINITY, f64::min);
        BoxBarrierPrior::new(space, self.stiffness, self.margin_fraction * extent)
    }
}

/// One experiment, read from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub environment: EnvironmentSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<QuerySpec>,
    #[serde(default)]
    pub roadmap: RoadmapSection,
    #[serde(default)]
    pub planner: PlannerSection,
    #[serde(default)]
    pub svgd: SvgdConfig,
    #[serde(default)]
    pub prior: PriorSection,
    #[serde(default)]
    pub bench: BenchSection,
    #[serde(default)]
    pub run: RunSection,
}

fn default_name() -> String {
    "experiment".into()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: default_name(),
            seed: 0,
            environment: EnvironmentSpec::default(),
            query: None,
            roadmap: RoadmapSection::default(),
            planner: PlannerSection::default(),
            svgd: SvgdConfig::default(),
            prior: PriorSection::default(),
            bench: BenchSection::default(),
            run: RunSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses, resolves relative paths against the file's directory and
    /// validates.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| Error::parse(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.environment.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        for f in self.environment.referenced_files() {
            if !f.exists() {
                return Err(Error::Config(format!("referenced file {} does not exist", f.display())));
            }
        }
        let r = &self.roadmap;
        if !(0.0..=1.0).contains(&r.beta) {
            return Err(Error::Config(format!("roadmap.beta must lie in [0, 1], got {}", r.beta)));
        }
        if !(r.rho > 0.0) {
            return Err(Error::Config(format!("roadmap.rho must be > 0, got {}", r.rho)));
        }
        if r.edge_resolution.is_some_and(|v| !(v > 0.0)) {
            return Err(Error::Config("roadmap.edge_resolution must be > 0".into()));
        }
        if !(self.prior.stiffness > 0.0) || !(self.prior.margin_fraction > 0.0 && self.prior.margin_fraction < 0.5) {
            return Err(Error::Config("prior needs stiffness > 0 and margin_fraction in (0, 0.5)".into()));
        }
        self.svgd.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.bench.n.contains(&0) || self.run.n == 0 {
            return Err(Error::Config("particle counts must be >= 1".into()));
        }
        if !(self.bench.mixture_std >= 0.0) {
            return Err(Error::Config("bench.mixture_std must be >= 0".into()));
        }
        if let Some(m) = &self.bench.mmd {
            if m.reference_samples == 0 {
                return Err(Error::Config("bench.mmd.reference_samples must be >= 1".into()));
            }
        }
        if self.bench.coverage.as_ref().is_some_and(|c| c.probes == 0) {
            return Err(Error::Config("bench.coverage.probes must be >= 1".into()));
        }
        Ok(())
    }
}
