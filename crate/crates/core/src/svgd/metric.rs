use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::models::Posterior;

/// How the shared kernel metric `M` is built each iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricMode {
    #[default]
    Identity,
    /// Particle average of `-hessian(log posterior)`.
    AvgHessian,
    /// Particle average of `grad log p(z=1|x) grad log p(z=1|x)'`.
    GradOuter,
}

/// Estimates the metric from the particles. The result is symmetric with
/// eigenvalues floored at `1e-6 * trace / d + 1e-12`.
pub fn estimate_metric(mode: MetricMode, points: &[&[f64]], posterior: &Posterior<'_>, parallel: bool) -> DMatrix<f64> {
    let grads: Vec<Vec<f64>> = match mode {
        MetricMode::GradOuter => points.iter().map(|x| posterior.likelihood.grad_log_likelihood(x)).collect(),
        _ => Vec::new(),
    };
    metric_from_grads(mode, points, &grads, posterior, parallel)
}

/// [`estimate_metric`] reusing likelihood gradients that are already known.
pub(crate) fn metric_from_grads(
    mode: MetricMode,
    points: &[&[f64]],
    likelihood_grads: &[Vec<f64>],
    posterior: &Posterior<'_>,
    parallel: bool,
) -> DMatrix<f64> {
    let d = posterior.dim();
    let mut sum = DMatrix::zeros(d, d);
    match mode {
        MetricMode::Identity => return DMatrix::identity(d, d),
        MetricMode::GradOuter => {
            for g in likelihood_grads {
                for r in 0..d {
                    for c in 0..d {
                        sum[(r, c)] += g[r] * g[c];
                    }
                }
            }
        }
        MetricMode::AvgHessian => {
            let mats: Vec<DMatrix<f64>> = if parallel {
                points.par_iter().map(|x| posterior.curvature(x)).collect()
            } else {
                points.iter().map(|x| posterior.curvature(x)).collect()
            };
            for m in &mats {
                sum += m;
            }
        }
    }
    clamp_spd(sum / points.len().max(1) as f64)
}

/// Symmetrizes and floors the spectrum.
pub fn clamp_spd(m: DMatrix<f64>) -> DMatrix<f64> {
    let d = m.nrows();
    let sym = (&m + m.transpose()) * 0.5;
    let floor = 1e-6 * sym.trace() / d as f64 + 1e-12;
    let floor = if floor.is_finite() && floor > 0.0 { floor } else { 1e-12 };
    let eig = SymmetricEigen::new(sym);
    let vals = eig.eigenvalues.map(|v| v.max(floor));
    let out = &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose();
    (&out + out.transpose()) * 0.5
}
