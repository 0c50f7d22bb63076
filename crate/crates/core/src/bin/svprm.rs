use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use svprm::bench::{config_comment, run_trial_suite, write_file, Artifact, Bench, ExperimentConfig, ExperimentReport};
use svprm::envs::{build_environment, Environment, Scene};
use svprm::geometry::Config;
use svprm::models::LabeledPoint;
use svprm::planner::{plan_lazy, PlanResult};
use svprm::render::{render_curves, render_scene, SceneLayers};
use svprm::roadmap::{build_roadmap, Roadmap};
use svprm::svgd::{trace_csv, TraceRow};
use svprm::{Error, Result};

#[derive(Parser)]
#[command(name = "svprm", version, about = "Particle-based probabilistic roadmaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long, global = true, default_value = "configs/checkerboard.toml")]
    config: PathBuf,
    /// Overrides the experiment seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the environment and write its raw inputs.
    Gen,
    /// Fit the feasibility model and write it as JSON.
    Fit,
    /// Sample and refine the particles of the `[run]` trial.
    Infer,
    /// Build the roadmap of the `[run]` trial.
    Build,
    /// Plan the query on the `[run]` trial roadmap.
    Plan,
    /// Score the `[run]` trial with MMD and coverage.
    Eval,
    /// Run every sampler, size and seed of `[bench]`.
    Bench,
    /// Draw the scene of the `[run]` trial or of a saved roadmap.
    Render {
        /// Roadmap artifact to draw instead of recomputing.
        #[arg(long)]
        roadmap: Option<PathBuf>,
        /// Feasibility heatmap resolution (0 disables it).
        #[arg(long, default_value_t = 0)]
        heatmap: usize,
    },
    /// Benchmark plus the full artifact set of the `[run]` trial.
    Run,
}

#[derive(Serialize)]
struct Particles {
    initial: Vec<Config>,
    particles: Vec<Config>,
}

struct Session {
    cfg: ExperimentConfig,
    env: Environment,
    out: PathBuf,
}

/// Outputs of the `[run]` trial up to some stage.
#[derive(Default)]
struct Stages {
    initial: Vec<Config>,
    particles: Vec<Config>,
    trace: Vec<TraceRow>,
    roadmap: Option<Roadmap>,
    plan: Option<PlanResult>,
}

impl Session {
    fn open(common: &Common) -> Result<Self> {
        let mut cfg = ExperimentConfig::load(&common.config)?;
        if let Some(s) = common.seed {
            cfg.seed = s;
        }
        std::fs::create_dir_all(&common.out).map_err(|e| Error::Io { path: common.out.clone(), source: e })?;
        let clock = Instant::now();
        let env = build_environment(&cfg.environment)?;
        log::info!("{} ready in {:.2?}", env.name, clock.elapsed());
        Ok(Session { cfg, env, out: common.out.clone() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn artifact<T: Serialize>(&self, name: &str, data: T) -> Result<()> {
        let path = self.path(name);
        Artifact { config: self.cfg.clone(), data }.write(&path)?;
        log::info!("wrote {}", path.display());
        Ok(())
    }

    fn text(&self, name: &str, body: &str) -> Result<()> {
        let path = self.path(name);
        write_file(&path, body.as_bytes())?;
        log::info!("wrote {}", path.display());
        Ok(())
    }

    /// Runs the `[run]` trial through `depth` stages: 1 infer, 2 build, 3 plan.
    fn stages(&self, depth: usize) -> Result<Stages> {
        let bench = Bench::new(&self.cfg, &self.env)?;
        let run = &self.cfg.run;
        let mut st = Stages { initial: bench.initial_particles(run.sampler, run.n, 0)?, ..Stages::default() };
        (st.particles, st.trace) =
            if run.sampler.svgd { bench.refine(&st.initial, 0)? } else { (st.initial.clone(), Vec::new()) };
        log::info!("{} particles after {} svgd iterations", st.particles.len(), st.trace.len());
        if depth >= 2 {
            let model = self.env.model.as_ref();
            let mut roadmap = build_roadmap(&st.particles, model, &bench.roadmap_params())?;
            log::info!("roadmap: {} vertices, {} edges", roadmap.num_vertices(), roadmap.num_edges());
            if depth >= 3 {
                let query =
                    bench.query.as_ref().ok_or_else(|| Error::Config("no query for this environment".into()))?;
                let plan = plan_lazy(&mut roadmap, model, query, self.cfg.planner.options())?;
                log::info!("plan {:?}, cost {:.4}, {} edges evaluated", plan.status, plan.cost, plan.edges_evaluated);
                st.plan = Some(plan);
            }
            st.roadmap = Some(roadmap);
        }
        Ok(st)
    }

    fn scene(&self, st: &Stages, heatmap: usize) -> Result<()> {
        let (start, goal) = self.query_ends();
        let layers = SceneLayers {
            roadmap: st.roadmap.as_ref(),
            path: st.plan.as_ref().filter(|p| p.solved()).map(|p| p.path.as_slice()),
            particles: (!st.particles.is_empty()).then_some(st.particles.as_slice()),
            start,
            goal,
            heatmap,
            metadata: Some(self.cfg.to_toml()),
        };
        self.text("scene.svg", &render_scene(&self.env, &layers))
    }

    fn query_ends(&self) -> (Option<&[f64]>, Option<&[f64]>) {
        match &self.cfg.query {
            Some(q) => (Some(q.start.as_slice()), Some(q.goal.as_slice())),
            None => (self.env.start.as_deref(), self.env.goal.as_deref()),
        }
    }

    fn trace(&self, trace: &[TraceRow]) -> Result<()> {
        self.text("trace.csv", &(config_comment(&self.cfg, "# ") + &trace_csv(trace)))
    }

    fn report(&self, report: &ExperimentReport) -> Result<()> {
        report.write(&self.out)?;
        log::info!("wrote report.csv and report.json to {}", self.out.display());
        let opt = |v: Option<f64>, p: usize| v.map_or("-".into(), |x| format!("{x:.p$}"));
        for r in &report.summary {
            let mut line = format!("{:<16} n={:<5}", r.sampler, r.n);
            if self.cfg.bench.plan {
                line += &format!(" success {:>3}/{:<3} cost {}", r.successes, r.trials, opt(r.cost_mean, 4));
            }
            if r.mmd_final_mean.is_some() {
                line += &format!(" mmd {} -> {}", opt(r.mmd_initial_mean, 6), opt(r.mmd_final_mean, 6));
            }
            if r.coverage_mean.is_some() {
                line += &format!(" coverage {}", opt(r.coverage_mean, 4));
            }
            println!("{line}");
        }
        Ok(())
    }
}

fn gen(s: &Session) -> Result<()> {
    match &s.env.scene {
        Scene::Grid(grid) => grid.save(&s.path("map.pgm"))?,
        Scene::Points { points, .. } => LabeledPoint::save_csv(points, &s.path("points.csv"))?,
        Scene::Arm(model) => s.artifact(
            "task.json",
            serde_json::json!({ "model": model, "start": s.env.start, "goal": s.env.goal, "home": s.env.home }),
        )?,
    }
    s.scene(&Stages::default(), 0)
}

fn eval(s: &mut Session) -> Result<()> {
    let run = s.cfg.run.clone();
    let has_query = s.query_ends().0.is_some();
    let b = &mut s.cfg.bench;
    b.samplers = vec![run.sampler];
    b.n = vec![run.n];
    b.seeds = vec![0];
    b.mmd.get_or_insert_with(Default::default);
    b.coverage.get_or_insert_with(Default::default);
    b.plan = has_query;
    let report = run_trial_suite(&s.cfg, &s.env)?;
    if let Some(t) = report.trials.first() {
        let mmd = |v: Option<f64>| v.map_or("-".into(), |x| format!("{x:.6}"));
        println!(
            "mmd {} -> {}  coverage {}",
            mmd(t.mmd_initial),
            mmd(t.mmd_final),
            t.coverage.map_or("-".into(), |c| format!("{c:.4}"))
        );
    }
    s.report(&report)
}

fn bench(s: &Session) -> Result<ExperimentReport> {
    let clock = Instant::now();
    let report = run_trial_suite(&s.cfg, &s.env)?;
    log::info!("{} trials in {:.2?}", report.trials.len(), clock.elapsed());
    s.report(&report)?;
    s.text("curves.svg", &render_curves(&report))?;
    Ok(report)
}

fn render(s: &Session, roadmap: Option<&Path>, heatmap: usize) -> Result<()> {
    match roadmap {
        Some(path) => {
            let saved: Artifact<Roadmap> = Artifact::read(path)?;
            let st = Stages { roadmap: Some(saved.data), ..Stages::default() };
            s.scene(&st, heatmap)
        }
        None => {
            let depth = if s.query_ends().0.is_some() { 3 } else { 2 };
            s.scene(&s.stages(depth)?, heatmap)
        }
    }
}

fn run(s: &Session) -> Result<()> {
    if s.cfg.bench.plan || s.cfg.bench.mmd.is_some() || s.cfg.bench.coverage.is_some() {
        bench(s)?;
    }
    let depth = if s.query_ends().0.is_some() { 3 } else { 2 };
    let st = s.stages(depth)?;
    s.trace(&st.trace)?;
    s.artifact("roadmap.json", st.roadmap.as_ref())?;
    if let Some(plan) = &st.plan {
        s.artifact("plan.json", plan)?;
    }
    s.scene(&st, 0)
}

fn execute(cli: Cli) -> Result<()> {
    let mut s = Session::open(&cli.common)?;
    match cli.command {
        Command::Gen => gen(&s),
        Command::Fit => {
            s.artifact("model.json", &s.env.model_json)?;
            s.scene(&Stages::default(), 120)
        }
        Command::Infer => {
            let st = s.stages(1)?;
            s.trace(&st.trace)?;
            s.artifact("particles.json", Particles { initial: st.initial.clone(), particles: st.particles.clone() })?;
            s.scene(&st, 0)
        }
        Command::Build => {
            let st = s.stages(2)?;
            s.artifact("roadmap.json", st.roadmap.as_ref())?;
            s.scene(&st, 0)
        }
        Command::Plan => {
            let st = s.stages(3)?;
            s.artifact("roadmap.json", st.roadmap.as_ref())?;
            s.artifact("plan.json", st.plan.as_ref())?;
            s.scene(&st, 0)
        }
        Command::Eval => eval(&mut s),
        Command::Bench => bench(&s).map(|_| ()),
        Command::Render { roadmap, heatmap } => render(&s, roadmap.as_deref(), heatmap),
        Command::Run => run(&s),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.common.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if cli.common.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.common.jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
