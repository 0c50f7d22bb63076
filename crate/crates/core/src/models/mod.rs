//! Differentiable feasibility likelihoods `p(z=1 | x)` and log-priors over
//! configuration space.
//!
//! Every model returns an unnormalized log-likelihood; SVGD only ever needs
//! gradients of the log posterior, so the normalizer is never computed.

mod bhm;
mod features;
mod gaussian;
mod logistic;
mod prior;
mod rbf_field;
mod tsdf;

use nalgebra::DMatrix;

pub use bhm::{BayesianHilbertMap, BhmFitConfig, LabeledPoint};
pub use features::grid_centers;
pub use gaussian::{GaussianDensity, IsotropicMixture};
pub use prior::{BoxBarrierPrior, FlatPrior, LogPrior};
pub use rbf_field::RbfOccupancyField;
pub use tsdf::{TsdfArmModel, TsdfCost};

/// Differentiable feasibility likelihood `p(z=1 | x; theta)`.
pub trait FeasibilityModel: Send + Sync {
    fn dim(&self) -> usize;

    /// `log p(z=1 | x)`, up to an additive constant for cost-based models.
    fn log_likelihood(&self, x: &[f64]) -> f64;

    fn grad_log_likelihood(&self, x: &[f64]) -> Vec<f64>;

    /// `-hessian(log p(z=1 | x))` when the model has a closed form or a
    /// Gauss-Newton surrogate.
    fn curvature(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// Probability used by the chance constraint.
    fn probability(&self, x: &[f64]) -> f64 {
        self.log_likelihood(x).exp()
    }
}

impl<M: FeasibilityModel + ?Sized> FeasibilityModel for Box<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_likelihood(&self, x: &[f64]) -> f64 {
        (**self).log_likelihood(x)
    }
    fn grad_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        (**self).grad_log_likelihood(x)
    }
    fn curvature(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        (**self).curvature(x)
    }
    fn probability(&self, x: &[f64]) -> f64 {
        (**self).probability(x)
    }
}

/// Constant feasibility everywhere. Useful as an all-free world.
#[derive(Clone, Copy, Debug)]
pub struct ConstantModel {
    pub dim: usize,
    pub probability: f64,
}

impl FeasibilityModel for ConstantModel {
    fn dim(&self) -> usize {
        self.dim
    }
    fn log_likelihood(&self, _x: &[f64]) -> f64 {
        self.probability.ln()
    }
    fn grad_log_likelihood(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; self.dim]
    }
    fn curvature(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::zeros(self.dim, self.dim))
    }
    fn probability(&self, _x: &[f64]) -> f64 {
        self.probability
    }
}

/// Unnormalized posterior `p(z=1 | x) p(x)`.
#[derive(Clone, Copy)]
pub struct Posterior<'a> {
    pub likelihood: &'a dyn FeasibilityModel,
    pub prior: &'a dyn LogPrior,
}

impl<'a> Posterior<'a> {
    pub fn new(likelihood: &'a dyn FeasibilityModel, prior: &'a dyn LogPrior) -> Self {
        Posterior { likelihood, prior }
    }

    pub fn dim(&self) -> usize {
        self.likelihood.dim()
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        self.likelihood.log_likelihood(x) + self.prior.log_density(x)
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        posterior_grad(self.likelihood, self.prior, x)
    }

    /// `-hessian(log posterior)`. Models without a closed form fall back to
    /// the outer product of their log-likelihood gradient.
    pub fn curvature(&self, x: &[f64]) -> DMatrix<f64> {
        let lik = self.likelihood.curvature(x).unwrap_or_else(|| {
            let g = nalgebra::DVector::from_vec(self.likelihood.grad_log_likelihood(x));
            &g * g.transpose()
        });
        lik + self.prior.curvature(x)
    }
}

/// Gradient of the log posterior: likelihood gradient plus prior gradient.
pub fn posterior_grad(likelihood: &dyn FeasibilityModel, prior: &dyn LogPrior, x: &[f64]) -> Vec<f64> {
    let mut g = likelihood.grad_log_likelihood(x);
    for (gi, pi) in g.iter_mut().zip(prior.grad(x)) {
        *gi += pi;
    }
    g
}

#[inline]
pub(crate) fn sigmoid(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// `log(sigmoid(a))` without overflow.
#[inline]
pub(crate) fn log_sigmoid(a: f64) -> f64 {
    if a >= 0.0 {
        -(-a).exp().ln_1p()
    } else {
        a - a.exp().ln_1p()
    }
}
