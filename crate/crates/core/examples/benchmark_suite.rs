//! Runs a small sampler comparison with discrepancy and coverage metrics
//! and prints the summary table.
//!
//! cargo run --release --example benchmark_suite

use svprm::bench::{run_experiment, CoverageSection, ExperimentConfig, MmdSection};

fn main() -> svprm::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/checkerboard.toml");
    let mut cfg = ExperimentConfig::load(path.as_ref())?;
    cfg.bench.n = vec![50, 100];
    cfg.bench.seeds = (0..5).collect();
    cfg.bench.mmd = Some(MmdSection { reference_samples: 500, ..MmdSection::default() });
    cfg.bench.coverage = Some(CoverageSection { probes: 300 });
    let report = run_experiment(&cfg)?;
    println!("{:<16} {:>4} {:>8} {:>10} {:>10} {:>9}", "sampler", "n", "success", "mmd0", "mmd", "coverage");
    for r in &report.summary {
        println!(
            "{:<16} {:>4} {:>5}/{:<2} {:>10.5} {:>10.5} {:>9.3}",
            r.sampler,
            r.n,
            r.successes,
            r.trials,
            r.mmd_initial_mean.unwrap_or(f64::NAN),
            r.mmd_final_mean.unwrap_or(f64::NAN),
            r.coverage_mean.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
