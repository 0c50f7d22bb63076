//! SVGD on an elongated Gaussian with each kernel metric. For every metric
//! the fastest converging step size is reported with the particle moments.
//!
//! cargo run --release --example svgd_gaussian

use svprm::geometry::{sample_uniform, ConfigSpace};
use svprm::models::{FlatPrior, GaussianDensity, Posterior};
use svprm::svgd::{run_inference, Inference, MetricMode, ParticleSet, SvgdConfig};

const MAX_ITERS: usize = 5000;

fn main() -> svprm::Result<()> {
    let target = GaussianDensity::new(vec![0.0, 0.0], vec![1.0, 0.01]);
    let prior = FlatPrior { dim: 2 };
    let posterior = Posterior::new(&target, &prior);
    let init = sample_uniform(&ConfigSpace::cube(2, -2.0, 2.0)?, 100, 0);
    for mode in [MetricMode::Identity, MetricMode::AvgHessian, MetricMode::GradOuter] {
        let mut best: Option<(f64, Inference)> = None;
        for step in [1.0, 0.3, 0.1, 0.03, 0.01] {
            let cfg = SvgdConfig {
                step_size: step,
                max_iters: MAX_ITERS,
                metric_mode: mode,
                adagrad_decay: 1.0,
                precondition: true,
                ..SvgdConfig::default()
            };
            // large steps may diverge; that step is simply skipped
            let Ok(out) = run_inference(ParticleSet::new(&init, 0)?, &posterior, None, &cfg) else { continue };
            if out.trace.len() < MAX_ITERS && best.as_ref().is_none_or(|(_, b)| out.trace.len() < b.trace.len()) {
                best = Some((step, out));
            }
        }
        let Some((step, out)) = best else {
            println!("{mode:?}: no step size converged within {MAX_ITERS} iterations");
            continue;
        };
        let n = out.particles.len() as f64;
        let mean: Vec<f64> = (0..2).map(|a| out.particles.iter().map(|p| p[a]).sum::<f64>() / n).collect();
        let var: Vec<f64> =
            (0..2).map(|a| out.particles.iter().map(|p| (p[a] - mean[a]).powi(2)).sum::<f64>() / n).collect();
        println!(
            "{mode:?}: step {step}, {} iterations, mean ({:+.3}, {:+.3}), variance ({:.3}, {:.4})",
            out.trace.len(),
            mean[0],
            mean[1],
            var[0],
            var[1]
        );
    }
    Ok(())
}
