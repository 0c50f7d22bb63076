//! Plans a three-link arm out of one cubby and into another under the
//! truncated signed-distance likelihood.
//!
//! cargo run --release --example arm_cubby

use svprm::bench::{Bench, ExperimentConfig, SamplerSpec};
use svprm::envs::build_environment;
use svprm::sampling::Prior;

fn main() -> svprm::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/cubby.toml");
    let cfg = ExperimentConfig::load(path.as_ref())?;
    let env = build_environment(&cfg.environment)?;
    let bench = Bench::new(&cfg, &env)?;
    let query = bench.query.as_ref().expect("the cubby task has a query");
    println!("start {:?}\ngoal  {:?}", query.start, query.goal);
    for svgd in [false, true] {
        let sampler = SamplerSpec { prior: Prior::Uniform, svgd };
        let solved = (0..10)
            .map(|seed| bench.run_trial(sampler, 64, seed).map(|t| t.record.success))
            .collect::<svprm::Result<Vec<bool>>>()?
            .into_iter()
            .filter(|s| *s)
            .count();
        println!("{}: solved {solved}/10 with 64 particles", sampler.label());
    }
    let trial = bench.run_trial(SamplerSpec { prior: Prior::Uniform, svgd: true }, 64, 0)?;
    if let Some(plan) = trial.plan.filter(|p| p.solved()) {
        println!("joint path with cost {:.3}:", plan.cost);
        for q in &plan.path {
            println!("  [{:+.3}, {:+.3}, {:+.3}]", q[0], q[1], q[2]);
        }
    }
    Ok(())
}
