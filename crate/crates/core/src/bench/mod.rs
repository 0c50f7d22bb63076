//! Experiment configs, trial orchestration and report export.

mod config;

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    BenchSection, CoverageSection, ExperimentConfig, MmdSection, PlannerSection, QuerySpec, RoadmapSection, RunSection,
    SamplerSpec,
};

use crate::envs::{build_environment, Environment};
use crate::error::{Error, Result};
use crate::geometry::Config;
use crate::metrics::{coverage_of, mean_std, mmd_squared, reference_feasible_sample};
use crate::models::{BoxBarrierPrior, Posterior};
use crate::planner::{plan_lazy, PlanQuery, PlanResult};
use crate::roadmap::{build_roadmap, Roadmap, RoadmapParams};
use crate::sampling::{draw_prior, MixtureComponent, SamplerContext};
use crate::svgd::{run_inference, ParticleSet, TraceRow};

/// Folds the parts into one well-mixed seed.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9e37_79b9_7f4a_7c15;
    for &p in parts {
        h ^= p.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
        // splitmix64 finaliser
        h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h ^= h >> 31;
    }
    h
}

const PROBE_STREAM: u64 = 0x70_726f_6265;
const REFERENCE_STREAM: u64 = 0x72_6566;

/// One row of the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub sampler: String,
    pub n: usize,
    pub seed: u64,
    pub success: bool,
    pub cost: Option<f64>,
    pub path_vertices: usize,
    pub edges_evaluated: usize,
    pub vertices: usize,
    pub edges: usize,
    pub svgd_iters: usize,
    pub mmd_initial: Option<f64>,
    pub mmd_final: Option<f64>,
    pub coverage: Option<f64>,
    /// Excluded from the CSV so that reruns compare byte for byte.
    pub wall_time_s: f64,
}

/// Everything one trial produced.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    pub initial: Vec<Config>,
    pub particles: Vec<Config>,
    pub trace: Vec<TraceRow>,
    pub roadmap: Roadmap,
    pub plan: Option<PlanResult>,
}

/// Per `(sampler, n)` aggregate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub sampler: String,
    pub n: usize,
    pub trials: usize,
    pub successes: usize,
    pub cost_mean: Option<f64>,
    pub cost_std: Option<f64>,
    pub edges_evaluated_mean: f64,
    pub vertices_mean: f64,
    pub mmd_initial_mean: Option<f64>,
    pub mmd_final_mean: Option<f64>,
    pub coverage_mean: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

/// Shared inputs of every trial in an experiment.
pub struct Bench<'a> {
    pub cfg: &'a ExperimentConfig,
    pub env: &'a Environment,
    pub query: Option<PlanQuery>,
    pub prior: BoxBarrierPrior,
    pub mixture: Vec<MixtureComponent>,
    pub edge_resolution: f64,
    reference: Option<Vec<Config>>,
}

impl<'a> Bench<'a> {
    pub fn new(cfg: &'a ExperimentConfig, env: &'a Environment) -> Result<Self> {
        let query = match (&cfg.query, &env.start, &env.goal) {
            (Some(q), _, _) => Some((q.start.clone(), q.goal.clone())),
            (None, Some(s), Some(g)) => Some((s.clone(), g.clone())),
            _ => None,
        }
        .map(|(start, goal)| PlanQuery {
            start,
            goal,
            beta: cfg.roadmap.beta,
            max_edge_evals: cfg.planner.max_edge_evals,
        });
        if cfg.bench.plan && query.is_none() {
            return Err(Error::Config(format!("environment {} has no default query; add a [query] section", env.name)));
        }
        let mixture = match &cfg.bench.mixture {
            Some(m) => m.clone(),
            None => [query.as_ref().map(|q| q.start.clone()), query.as_ref().map(|q| q.goal.clone()), env.home.clone()]
                .into_iter()
                .flatten()
                .map(|mean| MixtureComponent { mean, std: cfg.bench.mixture_std })
                .collect(),
        };
        let reference = match &cfg.bench.mmd {
            Some(m) => Some(reference_feasible_sample(
                env.reference_model(),
                &env.space,
                cfg.roadmap.beta,
                m.reference_samples,
                mix_seed(&[cfg.seed, REFERENCE_STREAM]),
            )?),
            None => None,
        };
        Ok(Bench {
            cfg,
            env,
            query,
            prior: cfg.prior.build(env.space.clone()),
            mixture,
            edge_resolution: cfg
                .roadmap
                .edge_resolution
                .unwrap_or_else(|| env.default_edge_resolution(cfg.roadmap.rho)),
            reference,
        })
    }

    pub fn roadmap_params(&self) -> RoadmapParams {
        RoadmapParams {
            beta: self.cfg.roadmap.beta,
            rho: self.cfg.roadmap.rho,
            edge_resolution: self.edge_resolution,
            lazy: self.cfg.roadmap.lazy,
        }
    }

    /// Initial particles. Samplers that share a prior see identical draws
    /// for the same `(n, seed)`.
    pub fn initial_particles(&self, sampler: SamplerSpec, n: usize, seed: u64) -> Result<Vec<Config>> {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[self.cfg.seed, seed, n as u64]));
        let skip = self.cfg.bench.halton_skip + if self.cfg.bench.halton_per_seed { seed as usize * n } else { 0 };
        let ctx = SamplerContext {
            space: &self.env.space,
            model: self.env.model.as_ref(),
            beta: self.cfg.roadmap.beta,
            mixture: &self.mixture,
            halton_skip: skip,
        };
        draw_prior(sampler.prior, &ctx, n, &mut rng)
    }

    /// Runs SVGD from `initial` under the environment posterior.
    pub fn refine(&self, initial: &[Config], seed: u64) -> Result<(Vec<Config>, Vec<TraceRow>)> {
        let posterior = Posterior::new(self.env.model.as_ref(), &self.prior);
        let set = ParticleSet::new(initial, seed)?;
        let out = run_inference(set, &posterior, Some(&self.env.space), &self.cfg.svgd)?;
        Ok((out.particles.to_configs(), out.trace))
    }

    pub fn probes(&self, seed: u64, count: usize) -> Result<Vec<Config>> {
        reference_feasible_sample(
            self.env.model.as_ref(),
            &self.env.space,
            self.cfg.roadmap.beta,
            count,
            mix_seed(&[self.cfg.seed, seed, PROBE_STREAM]),
        )
    }

    pub fn run_trial(&self, sampler: SamplerSpec, n: usize, seed: u64) -> Result<TrialOutcome> {
        let clock = Instant::now();
        let initial = self.initial_particles(sampler, n, seed)?;
        let (particles, trace) =
            if sampler.svgd { self.refine(&initial, seed)? } else { (initial.clone(), Vec::new()) };
        let model = self.env.model.as_ref();
        let mut roadmap = build_roadmap(&particles, model, &self.roadmap_params())?;
        let (vertices, edges) = (roadmap.num_vertices(), roadmap.num_edges());
        let plan = match (&self.query, self.cfg.bench.plan) {
            (Some(q), true) => Some(plan_lazy(&mut roadmap, model, q, self.cfg.planner.options())?),
            _ => None,
        };
        let (mmd_initial, mmd_final) = match (&self.reference, &self.cfg.bench.mmd) {
            (Some(reference), Some(m)) => {
                let a = mmd_squared(&initial, reference, &m.kernel)?;
                let b = if sampler.svgd { mmd_squared(&particles, reference, &m.kernel)? } else { a };
                (Some(a), Some(b))
            }
            _ => (None, None),
        };
        let coverage = match &self.cfg.bench.coverage {
            Some(c) => {
                Some(coverage_of(&roadmap, model, &self.probes(seed, c.probes)?, self.cfg.roadmap.beta).coverage)
            }
            None => None,
        };
        let solved = plan.as_ref().is_some_and(|p| p.solved());
        let record = TrialRecord {
            sampler: sampler.label(),
            n,
            seed,
            success: solved,
            cost: plan.as_ref().filter(|p| p.solved()).map(|p| p.cost),
            path_vertices: plan.as_ref().map_or(0, |p| p.path.len()),
            edges_evaluated: plan.as_ref().map_or(0, |p| p.edges_evaluated),
            vertices,
            edges,
            svgd_iters: trace.len(),
            mmd_initial,
            mmd_final,
            coverage,
            wall_time_s: clock.elapsed().as_secs_f64(),
        };
        Ok(TrialOutcome { record, initial, particles, trace, roadmap, plan })
    }
}

/// Runs every `(sampler, n, seed)` combination on the current rayon pool.
/// Records come back in sampler, `n`, seed order.
pub fn run_trial_suite(cfg: &ExperimentConfig, env: &Environment) -> Result<ExperimentReport> {
    let bench = Bench::new(cfg, env)?;
    let jobs: Vec<(SamplerSpec, usize, u64)> = cfg
        .bench
        .samplers
        .iter()
        .flat_map(|&s| cfg.bench.n.iter().flat_map(move |&n| cfg.bench.seeds.iter().map(move |&seed| (s, n, seed))))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(s, n, seed)| {
            let r = bench.run_trial(s, n, seed).map(|t| t.record);
            log::debug!("{} n={n} seed={seed} done", s.label());
            r
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport { summary: summarize(cfg, &records), config: cfg.clone(), trials: records })
}

/// Builds the environment from the config and runs the suite.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let env = build_environment(&cfg.environment)?;
    run_trial_suite(cfg, &env)
}

fn mean_of(v: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = v.flatten().collect();
    (!v.is_empty()).then(|| mean_std(&v).0)
}

pub fn summarize(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for s in &cfg.bench.samplers {
        let label = s.label();
        for &n in &cfg.bench.n {
            let rows: Vec<&TrialRecord> = records.iter().filter(|r| r.sampler == label && r.n == n).collect();
            if rows.is_empty() {
                continue;
            }
            let costs: Vec<f64> = rows.iter().filter_map(|r| r.cost).collect();
            let (cost_mean, cost_std) = if costs.is_empty() {
                (None, None)
            } else {
                let (m, s) = mean_std(&costs);
                (Some(m), Some(s))
            };
            let k = rows.len() as f64;
            out.push(SummaryRow {
                sampler: label.clone(),
                n,
                trials: rows.len(),
                successes: rows.iter().filter(|r| r.success).count(),
                cost_mean,
                cost_std,
                edges_evaluated_mean: rows.iter().map(|r| r.edges_evaluated as f64).sum::<f64>() / k,
                vertices_mean: rows.iter().map(|r| r.vertices as f64).sum::<f64>() / k,
                mmd_initial_mean: mean_of(rows.iter().map(|r| r.mmd_initial)),
                mmd_final_mean: mean_of(rows.iter().map(|r| r.mmd_final)),
                coverage_mean: mean_of(rows.iter().map(|r| r.coverage)),
            });
        }
    }
    out
}

impl ExperimentReport {
    pub fn summary_for(&self, sampler: &str, n: usize) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.sampler == sampler && r.n == n)
    }

    /// Trial rows as CSV, preceded by the resolved config as `#` comments.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = config_comment(&self.config, "# ");
        out.push_str(
            "sampler,n,seed,success,cost,path_vertices,edges_evaluated,vertices,edges,svgd_iters,mmd_initial,mmd_final,coverage\n",
        );
        for r in &self.trials {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.sampler,
                r.n,
                r.seed,
                r.success as u8,
                opt(r.cost),
                r.path_vertices,
                r.edges_evaluated,
                r.vertices,
                r.edges,
                r.svgd_iters,
                opt(r.mmd_initial),
                opt(r.mmd_final),
                opt(r.coverage)
            ));
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_file(&dir.join("report.csv"), self.to_csv().as_bytes())?;
        let json = serde_json::to_string_pretty(self).expect("report serializes");
        write_file(&dir.join("report.json"), json.as_bytes())
    }
}

/// A JSON artifact carrying the resolved config next to its payload.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub config: ExperimentConfig,
    pub data: T,
}

impl<T: Serialize> Artifact<T> {
    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::parse(path, e))?;
        write_file(path, json.as_bytes())
    }
}

impl<T: serde::de::DeserializeOwned> Artifact<T> {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
    }
}

/// The resolved config as TOML, every line prefixed.
pub fn config_comment(cfg: &ExperimentConfig, prefix: &str) -> String {
    cfg.to_toml().lines().map(|l| format!("{prefix}{l}\n")).collect()
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::File::create(path).and_then(|mut f| f.write_all(bytes)).map_err(|e| Error::io(path, e))
}
