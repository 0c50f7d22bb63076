//! Plans across the checkerboard with plain PRM and with SVGD-refined
//! vertices, using the shipped config.
//!
//! cargo run --release --example checkerboard_quickstart

use svprm::bench::{Bench, ExperimentConfig, SamplerSpec};
use svprm::envs::build_environment;
use svprm::sampling::Prior;

fn main() -> svprm::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/checkerboard.toml");
    let cfg = ExperimentConfig::load(path.as_ref())?;
    let env = build_environment(&cfg.environment)?;
    let bench = Bench::new(&cfg, &env)?;
    for svgd in [false, true] {
        let sampler = SamplerSpec { prior: Prior::Uniform, svgd };
        let mut solved = 0;
        for seed in 0..10 {
            let trial = bench.run_trial(sampler, 100, seed)?;
            solved += usize::from(trial.record.success);
            if seed == 0 {
                println!(
                    "{}: {} vertices, {} edges, {} svgd iterations",
                    sampler.label(),
                    trial.record.vertices,
                    trial.record.edges,
                    trial.record.svgd_iters
                );
            }
        }
        println!("{}: solved {solved}/10 queries with 100 particles", sampler.label());
    }
    Ok(())
}
