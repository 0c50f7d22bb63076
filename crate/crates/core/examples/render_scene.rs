//! Writes an SVG of the checkerboard with its feasibility heatmap, an
//! SV-PRM roadmap and the planned path.
//!
//! cargo run --release --example render_scene -- out/scene.svg

use svprm::bench::{write_file, Bench, ExperimentConfig};
use svprm::envs::build_environment;
use svprm::render::{render_scene, SceneLayers};

fn main() -> svprm::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "scene.svg".into());
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/checkerboard.toml");
    let cfg = ExperimentConfig::load(path.as_ref())?;
    let env = build_environment(&cfg.environment)?;
    let bench = Bench::new(&cfg, &env)?;
    let trial = bench.run_trial(cfg.run.sampler, cfg.run.n, 0)?;
    let query = bench.query.as_ref().expect("checkerboard has a query");
    let layers = SceneLayers {
        roadmap: Some(&trial.roadmap),
        path: trial.plan.as_ref().filter(|p| p.solved()).map(|p| p.path.as_slice()),
        particles: Some(&trial.initial),
        start: Some(&query.start),
        goal: Some(&query.goal),
        heatmap: 120,
        metadata: None,
    };
    write_file(out.as_ref(), render_scene(&env, &layers).as_bytes())?;
    println!("wrote {out}");
    Ok(())
}
