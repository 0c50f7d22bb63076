use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::features::{grid_centers, RbfFeatures};
use super::logistic::SparseLogistic;
use super::{log_sigmoid, sigmoid, FeasibilityModel};
use crate::error::{Error, Result};
use crate::occupancy::OccupancyGrid;

/// Logistic field `p(z=1 | x) = sigmoid(w . phi(x) + b)` over Gaussian RBF
/// features on planar centers.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(from = "FieldData", into = "FieldData")]
pub struct RbfOccupancyField {
    weights: Vec<f64>,
    bias: f64,
    features: RbfFeatures,
}

#[derive(Serialize, Deserialize)]
struct FieldData {
    centers: Vec<[f64; 2]>,
    weights: Vec<f64>,
    lengthscale: f64,
    bias: f64,
}

impl From<FieldData> for RbfOccupancyField {
    fn from(d: FieldData) -> Self {
        RbfOccupancyField { weights: d.weights, bias: d.bias, features: RbfFeatures::new(d.centers, d.lengthscale) }
    }
}

impl From<RbfOccupancyField> for FieldData {
    fn from(f: RbfOccupancyField) -> Self {
        FieldData {
            lengthscale: f.features.lengthscale(),
            centers: f.features.centers().to_vec(),
            weights: f.weights,
            bias: f.bias,
        }
    }
}

impl RbfOccupancyField {
    /// Lengthscale of fitted fields, in units of the feature spacing.
    pub const LENGTHSCALE_PER_SPACING: f64 = 1.5;
    /// Default ridge penalty (on the mean log-loss) for grid fits.
    pub const DEFAULT_RIDGE: f64 = 1e-3;

    pub fn new(centers: Vec<[f64; 2]>, weights: Vec<f64>, lengthscale: f64, bias: f64) -> Result<Self> {
        if centers.len() != weights.len() {
            return Err(Error::Model(format!("{} centers but {} weights", centers.len(), weights.len())));
        }
        if !(lengthscale > 0.0) {
            return Err(Error::Model("RBF lengthscale must be > 0".into()));
        }
        Ok(RbfOccupancyField { weights, bias, features: RbfFeatures::new(centers, lengthscale) })
    }

    /// Fits a field to a binary grid: centers on a regular lattice at
    /// `feature_spacing` over the grid extent, lengthscale 1.5x spacing,
    /// ridge-regularized logistic regression on cell centers.
    pub fn fit_grid(grid: &OccupancyGrid, feature_spacing: f64, ridge: f64) -> Result<Self> {
        let e = grid.extent;
        let centers = grid_centers([e[0], e[1]], [e[2], e[3]], feature_spacing);
        let points = grid.labeled_cells();
        Self::fit_points(&points, centers, Self::LENGTHSCALE_PER_SPACING * feature_spacing, ridge)
    }

    pub fn fit_points(
        points: &[([f64; 2], bool)],
        centers: Vec<[f64; 2]>,
        lengthscale: f64,
        ridge: f64,
    ) -> Result<Self> {
        if !points.iter().any(|p| p.1) || !points.iter().any(|p| !p.1) {
            return Err(Error::Model("field fit needs both free and occupied samples".into()));
        }
        let features = RbfFeatures::new(centers, lengthscale);
        let rows: Vec<Vec<(usize, f64)>> = points.iter().map(|(x, _)| features.row(x)).collect();
        let labels: Vec<f64> = points.iter().map(|(_, z)| if *z { 1.0 } else { 0.0 }).collect();
        let fit = SparseLogistic { rows: &rows, labels: &labels, num_features: features.len(), ridge }.solve(60);
        Ok(RbfOccupancyField { weights: fit.weights, bias: fit.bias, features })
    }

    pub fn centers(&self) -> &[[f64; 2]] {
        self.features.centers()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn lengthscale(&self) -> f64 {
        self.features.lengthscale()
    }

    /// Activation `a = w . phi(x) + b`.
    pub fn activation(&self, x: &[f64]) -> f64 {
        let mut a = self.bias;
        self.features.for_each(x, |k, phi, _| a += self.weights[k] * phi);
        a
    }

    fn activation_grad(&self, x: &[f64]) -> (f64, [f64; 2]) {
        let inv_l2 = 1.0 / (self.lengthscale() * self.lengthscale());
        let mut a = self.bias;
        let mut g = [0.0; 2];
        self.features.for_each(x, |k, phi, diff| {
            let wp = self.weights[k] * phi;
            a += wp;
            g[0] -= wp * diff[0] * inv_l2;
            g[1] -= wp * diff[1] * inv_l2;
        });
        (a, g)
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(self.activation(x))
    }
}

impl FeasibilityModel for RbfOccupancyField {
    fn dim(&self) -> usize {
        2
    }

    fn log_likelihood(&self, x: &[f64]) -> f64 {
        log_sigmoid(self.activation(x))
    }

    fn grad_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        let (a, g) = self.activation_grad(x);
        let s = sigmoid(-a);
        vec![s * g[0], s * g[1]]
    }

    fn curvature(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let inv_l2 = 1.0 / (self.lengthscale() * self.lengthscale());
        let mut a = self.bias;
        let mut g = [0.0; 2];
        let mut h = [[0.0; 2]; 2];
        self.features.for_each(x, |k, phi, diff| {
            let wp = self.weights[k] * phi;
            a += wp;
            for i in 0..2 {
                g[i] -= wp * diff[i] * inv_l2;
                for j in 0..2 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    h[i][j] += wp * (diff[i] * diff[j] * inv_l2 * inv_l2 - delta * inv_l2);
                }
            }
        });
        let p = sigmoid(a);
        let q = 1.0 - p;
        Some(DMatrix::from_fn(2, 2, |i, j| p * q * g[i] * g[j] - q * h[i][j]))
    }

    fn probability(&self, x: &[f64]) -> f64 {
        self.predict(x)
    }
}
