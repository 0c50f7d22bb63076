//! Stein variational gradient descent over a feasibility posterior.
//!
//! Each iteration moves every particle along
//!
//! `phi(x) = 1/N sum_j [k(xj, x) grad log p(xj) + grad_xj k(xj, x)]`
//!
//! with an anisotropic RBF kernel whose metric is re-estimated from the
//! particle positions at the start of the iteration. All `phi` values are
//! computed from the pre-step positions, so the parallel and sequential
//! paths produce identical bits.

mod kernel;
mod metric;

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use kernel::{kernel_eval, median_bandwidth, Bandwidth, KernelConfig};
pub use metric::{clamp_spd, estimate_metric, MetricMode};

use crate::error::{Error, Result};
use crate::geometry::{Config, ConfigSpace};
use crate::models::Posterior;

const ADAGRAD_FUDGE: f64 = 1e-6;

/// `N` particles in `d` dimensions plus the per-coordinate AdaGrad history.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSet {
    dim: usize,
    points: Vec<f64>,
    historical_grad: Vec<f64>,
    pub iteration: usize,
    pub rng_seed: u64,
}

impl ParticleSet {
    pub fn new(points: &[Config], rng_seed: u64) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).ok_or_else(|| Error::Svgd("particle set must be nonempty".into()))?;
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::Svgd("particles must share a positive dimension".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Svgd("particles must be finite".into()));
        }
        Ok(ParticleSet { dim, points: points.concat(), historical_grad: Vec::new(), iteration: 0, rng_seed })
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks(self.dim)
    }

    pub fn to_configs(&self) -> Vec<Config> {
        self.iter().map(|p| p.to_vec()).collect()
    }

    fn views(&self) -> Vec<&[f64]> {
        self.iter().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvgdConfig {
    pub step_size: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub metric_mode: MetricMode,
    /// AdaGrad history decay; 1 disables the per-coordinate scaling.
    pub adagrad_decay: f64,
    pub bandwidth: Bandwidth,
    /// Multiplies every direction by `M^-1`, turning the shared metric into
    /// a matrix-valued kernel. A no-op for the identity metric.
    pub precondition: bool,
    pub parallel: bool,
}

impl Default for SvgdConfig {
    fn default() -> Self {
        SvgdConfig {
            step_size: 0.1,
            max_iters: 1000,
            grad_tol: 1e-3,
            metric_mode: MetricMode::Identity,
            adagrad_decay: 0.9,
            bandwidth: Bandwidth::Median,
            precondition: false,
            parallel: true,
        }
    }
}

impl SvgdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Svgd("max_iters must be >= 1".into()));
        }
        if !(self.step_size > 0.0) {
            return Err(Error::Svgd("step_size must be > 0".into()));
        }
        if !(self.adagrad_decay > 0.0 && self.adagrad_decay <= 1.0) {
            return Err(Error::Svgd("adagrad_decay must lie in (0, 1]".into()));
        }
        if self.grad_tol.is_nan() || self.grad_tol <= 0.0 {
            return Err(Error::Svgd("grad_tol must be > 0".into()));
        }
        if let Bandwidth::Fixed(h) = self.bandwidth {
            if !(h > 0.0) {
                return Err(Error::Svgd("fixed bandwidth must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Diagnostics of one iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub mean_phi_norm: f64,
    pub bandwidth: f64,
    pub min_pairwise: f64,
    pub mean_pairwise: f64,
}

/// The Stein direction `phi(x_i)` for every particle, flattened.
pub fn stein_direction(
    points: &[&[f64]],
    grads: &[Vec<f64>],
    metric: &DMatrix<f64>,
    h: f64,
    parallel: bool,
) -> Vec<f64> {
    let n = points.len();
    let d = metric.nrows();
    let inv_n = 1.0 / n as f64;
    // A = M / h, row major
    let a: Vec<f64> = (0..d * d).map(|k| metric[(k / d, k % d)] / h).collect();
    let one = |i: usize| -> Vec<f64> {
        let xi = points[i];
        let mut drive = vec![0.0; d];
        let mut push = vec![0.0; d];
        let mut delta = vec![0.0; d];
        for j in 0..n {
            let xj = points[j];
            for r in 0..d {
                delta[r] = xi[r] - xj[r];
            }
            let mut quad = 0.0;
            for r in 0..d {
                let mut row = 0.0;
                for c in 0..d {
                    row += a[r * d + c] * delta[c];
                }
                quad += delta[r] * row;
            }
            let k = (-0.5 * quad).exp();
            let gj = &grads[j];
            for r in 0..d {
                drive[r] += k * gj[r];
                push[r] += k * delta[r];
            }
        }
        (0..d)
            .map(|r| {
                let mut ap = 0.0;
                for c in 0..d {
                    ap += a[r * d + c] * push[c];
                }
                (drive[r] + ap) * inv_n
            })
            .collect()
    };
    let rows: Vec<Vec<f64>> =
        if parallel { (0..n).into_par_iter().map(one).collect() } else { (0..n).map(one).collect() };
    rows.concat()
}

type Gradients = Vec<Vec<f64>>;

/// Likelihood and posterior gradients at every particle.
fn gradients(points: &[&[f64]], posterior: &Posterior<'_>, parallel: bool) -> Result<(Gradients, Gradients)> {
    let both = |x: &&[f64]| {
        let lik = posterior.likelihood.grad_log_likelihood(x);
        let post: Vec<f64> = lik.iter().zip(posterior.prior.grad(x)).map(|(a, b)| a + b).collect();
        (lik, post)
    };
    let pairs: Vec<(Vec<f64>, Vec<f64>)> =
        if parallel { points.par_iter().map(both).collect() } else { points.iter().map(both).collect() };
    if let Some(index) = pairs.iter().position(|(_, g)| g.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFiniteGradient { index });
    }
    Ok(pairs.into_iter().unzip())
}

fn resolve_bandwidth(bandwidth: Bandwidth, points: &[&[f64]], metric: &DMatrix<f64>) -> f64 {
    match bandwidth {
        Bandwidth::Fixed(h) => h,
        Bandwidth::Median => median_bandwidth(points, metric),
    }
}

/// One SVGD update with a given kernel. Returns the mean `|phi|` and the
/// bandwidth that was used.
pub fn svgd_step(
    particles: &mut ParticleSet,
    posterior: &Posterior<'_>,
    bounds: Option<&ConfigSpace>,
    kernel: &KernelConfig,
    cfg: &SvgdConfig,
) -> Result<(f64, f64)> {
    kernel.validate()?;
    if kernel.metric.nrows() != particles.dim() || posterior.dim() != particles.dim() {
        return Err(Error::Svgd("particle, model and metric dimensions differ".into()));
    }
    let views = particles.views();
    let (_, grads) = gradients(&views, posterior, cfg.parallel)?;
    let h = resolve_bandwidth(kernel.bandwidth, &views, &kernel.metric);
    let mut phi = stein_direction(&views, &grads, &kernel.metric, h, cfg.parallel);
    if cfg.precondition {
        precondition(&mut phi, &kernel.metric)?;
    }
    drop(views);
    let mean_norm = apply_update(particles, &phi, bounds, cfg);
    Ok((mean_norm, h))
}

/// Solves `M y = phi_i` in place for every particle.
fn precondition(phi: &mut [f64], metric: &DMatrix<f64>) -> Result<()> {
    let d = metric.nrows();
    let chol = metric.clone().cholesky().ok_or_else(|| Error::Svgd("metric is not positive definite".into()))?;
    for chunk in phi.chunks_mut(d) {
        let y = chol.solve(&DVector::from_column_slice(chunk));
        chunk.copy_from_slice(y.as_slice());
    }
    Ok(())
}

fn apply_update(particles: &mut ParticleSet, phi: &[f64], bounds: Option<&ConfigSpace>, cfg: &SvgdConfig) -> f64 {
    let d = particles.dim;
    let mean_norm =
        phi.chunks(d).map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt()).sum::<f64>() / particles.len() as f64;
    if cfg.adagrad_decay < 1.0 {
        let hist = &mut particles.historical_grad;
        if hist.is_empty() {
            *hist = phi.iter().map(|v| v * v).collect();
        } else {
            let a = cfg.adagrad_decay;
            for (hv, p) in hist.iter_mut().zip(phi) {
                *hv = a * *hv + (1.0 - a) * p * p;
            }
        }
        for ((x, p), hv) in particles.points.iter_mut().zip(phi).zip(hist.iter()) {
            *x += cfg.step_size * p / (ADAGRAD_FUDGE + hv.sqrt());
        }
    } else {
        for (x, p) in particles.points.iter_mut().zip(phi) {
            *x += cfg.step_size * p;
        }
    }
    if let Some(space) = bounds {
        for chunk in particles.points.chunks_mut(d) {
            space.clamp(chunk);
        }
    }
    particles.iteration += 1;
    mean_norm
}

fn pairwise_stats(points: &[&[f64]]) -> (f64, f64) {
    let n = points.len();
    if n < 2 {
        return (0.0, 0.0);
    }
    let mut min = f64::INFINITY;
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let dd = crate::geometry::dist(points[i], points[j]);
            min = min.min(dd);
            sum += dd;
        }
    }
    (min, sum / (n * (n - 1) / 2) as f64)
}

/// Result of [`run_inference`].
#[derive(Clone, Debug)]
pub struct Inference {
    pub particles: ParticleSet,
    pub trace: Vec<TraceRow>,
    pub metric: DMatrix<f64>,
}

/// Iterates SVGD until the mean `|phi|` drops below `grad_tol` or
/// `max_iters` steps were taken. The metric is rebuilt at the start of every
/// iteration from the current positions.
pub fn run_inference(
    init: ParticleSet,
    posterior: &Posterior<'_>,
    bounds: Option<&ConfigSpace>,
    cfg: &SvgdConfig,
) -> Result<Inference> {
    run_inference_with(init, posterior, bounds, cfg, |_, _| {})
}

/// [`run_inference`] with a callback invoked after every step.
pub fn run_inference_with(
    mut particles: ParticleSet,
    posterior: &Posterior<'_>,
    bounds: Option<&ConfigSpace>,
    cfg: &SvgdConfig,
    mut on_step: impl FnMut(&ParticleSet, &TraceRow),
) -> Result<Inference> {
    cfg.validate()?;
    if posterior.dim() != particles.dim() {
        return Err(Error::Svgd("particle and model dimensions differ".into()));
    }
    let mut trace = Vec::new();
    let mut metric = DMatrix::identity(particles.dim(), particles.dim());
    for _ in 0..cfg.max_iters {
        let views = particles.views();
        let (lik_grads, grads) = gradients(&views, posterior, cfg.parallel)?;
        metric = metric::metric_from_grads(cfg.metric_mode, &views, &lik_grads, posterior, cfg.parallel);
        let h = resolve_bandwidth(cfg.bandwidth, &views, &metric);
        let mut phi = stein_direction(&views, &grads, &metric, h, cfg.parallel);
        if cfg.precondition && cfg.metric_mode != MetricMode::Identity {
            precondition(&mut phi, &metric)?;
        }
        let (min_pairwise, mean_pairwise) = pairwise_stats(&views);
        drop(views);
        let iteration = particles.iteration;
        let mean_phi_norm = apply_update(&mut particles, &phi, bounds, cfg);
        let row = TraceRow { iteration, mean_phi_norm, bandwidth: h, min_pairwise, mean_pairwise };
        on_step(&particles, &row);
        trace.push(row);
        if mean_phi_norm < cfg.grad_tol {
            break;
        }
    }
    Ok(Inference { particles, trace, metric })
}

/// The trace as CSV text.
pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("iteration,mean_phi_norm,bandwidth,min_pairwise,mean_pairwise\n");
    for r in trace {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.iteration, r.mean_phi_norm, r.bandwidth, r.min_pairwise, r.mean_pairwise
        ));
    }
    out
}

/// Writes the trace as CSV.
pub fn write_trace_csv(trace: &[TraceRow], path: &Path) -> Result<()> {
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(trace_csv(trace).as_bytes()))
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ConstantModel, FlatPrior, GaussianDensity};

    fn flat(dim: usize) -> (ConstantModel, FlatPrior) {
        (ConstantModel { dim, probability: 1.0 }, FlatPrior { dim })
    }

    #[test]
    fn pure_repulsion_pair() {
        let pts: Vec<&[f64]> = vec![&[0.0], &[1.0]];
        let grads = vec![vec![0.0], vec![0.0]];
        let phi = stein_direction(&pts, &grads, &DMatrix::identity(1, 1), 2.0, false);
        let expect = 0.5 * 0.5 * (-0.25f64).exp();
        assert!((phi[1] - expect).abs() < 1e-15);
        assert!((phi[0] + expect).abs() < 1e-15);
        assert!((phi[1] - 0.1947).abs() < 1e-4);
    }

    #[test]
    fn single_particle_follows_gradient() {
        let model = GaussianDensity::new(vec![0.5, -0.2], vec![0.3, 2.0]);
        let prior = FlatPrior { dim: 2 };
        let post = Posterior::new(&model, &prior);
        let x = [1.3, 0.7];
        let pts: Vec<&[f64]> = vec![&x];
        let g = post.grad(&x);
        let phi = stein_direction(&pts, std::slice::from_ref(&g), &DMatrix::identity(2, 2), 0.37, false);
        assert_eq!(phi, g);
    }

    #[test]
    fn non_finite_gradient_names_particle() {
        struct Broken;
        impl crate::models::FeasibilityModel for Broken {
            fn dim(&self) -> usize {
                1
            }
            fn log_likelihood(&self, _x: &[f64]) -> f64 {
                0.0
            }
            fn grad_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
                vec![if x[0] > 0.5 { f64::NAN } else { 0.0 }]
            }
        }
        let prior = FlatPrior { dim: 1 };
        let post = Posterior::new(&Broken, &prior);
        let mut ps = ParticleSet::new(&[vec![0.0], vec![0.2], vec![0.9]], 0).unwrap();
        let err =
            svgd_step(&mut ps, &post, None, &KernelConfig::isotropic(1, Bandwidth::Median), &SvgdConfig::default())
                .unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient { index: 2 }));
    }

    #[test]
    fn coincident_particles_stay_coincident() {
        let (m, p) = flat(2);
        let post = Posterior::new(&m, &p);
        let mut ps = ParticleSet::new(&[vec![0.3, 0.3], vec![0.3, 0.3]], 0).unwrap();
        let cfg = SvgdConfig { adagrad_decay: 1.0, ..Default::default() };
        svgd_step(&mut ps, &post, None, &KernelConfig::isotropic(2, Bandwidth::Fixed(1.0)), &cfg).unwrap();
        assert_eq!(ps.point(0), ps.point(1));
    }

    #[test]
    fn stopping_rules() {
        let (m, p) = flat(1);
        let post = Posterior::new(&m, &p);
        let init = ParticleSet::new(&[vec![0.0], vec![0.5], vec![1.0]], 0).unwrap();
        let cfg = SvgdConfig { grad_tol: f64::INFINITY, ..Default::default() };
        let out = run_inference(init.clone(), &post, None, &cfg).unwrap();
        assert_eq!(out.trace.len(), 1);
        let cfg = SvgdConfig { max_iters: 1, grad_tol: 1e-300, ..Default::default() };
        let out = run_inference(init.clone(), &post, None, &cfg).unwrap();
        assert_eq!(out.particles.iteration, 1);
        let cfg = SvgdConfig { max_iters: 0, ..Default::default() };
        assert!(run_inference(init, &post, None, &cfg).is_err());
    }

    #[test]
    fn clamped_to_box() {
        let model = GaussianDensity::isotropic(vec![5.0, 5.0], 1.0);
        let prior = FlatPrior { dim: 2 };
        let post = Posterior::new(&model, &prior);
        let space = ConfigSpace::cube(2, 0.0, 1.0).unwrap();
        let init = ParticleSet::new(&crate::geometry::sample_uniform(&space, 20, 4), 4).unwrap();
        let cfg = SvgdConfig { max_iters: 50, step_size: 0.5, ..Default::default() };
        let out = run_inference(init, &post, Some(&space), &cfg).unwrap();
        assert!(out.particles.iter().all(|p| space.contains(p)));
    }

    #[test]
    fn empty_set_rejected() {
        assert!(ParticleSet::new(&[], 0).is_err());
        assert!(ParticleSet::new(&[vec![f64::NAN]], 0).is_err());
    }
}
