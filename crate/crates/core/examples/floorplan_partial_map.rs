//! Fits a Bayesian Hilbert map to the part of a floor plan that has been
//! observed and compares it with the map fitted to everything.
//!
//! cargo run --release --example floorplan_partial_map

use svprm::bench::ExperimentConfig;
use svprm::envs::build_environment;

fn main() -> svprm::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/floorplan.toml");
    let cfg = ExperimentConfig::load(path.as_ref())?;
    let env = build_environment(&cfg.environment)?;
    let full = env.reference_model();
    println!("{} over {:?} to {:?}", env.name, env.space.lower(), env.space.upper());
    println!("{:>12} {:>10} {:>10}", "point", "observed", "full");
    for p in [[1.0, 1.0], [2.5, 2.5], [4.0, 4.0], [6.0, 1.0], [7.0, 4.0]] {
        println!("{:>12} {:>10.3} {:>10.3}", format!("{p:?}"), env.model.probability(&p), full.probability(&p));
    }
    Ok(())
}
