use nalgebra::{DMatrix, DVector};

use super::FeasibilityModel;

/// Axis-aligned Gaussian `exp(-0.5 sum_i (x_i - mu_i)^2 / s_i^2)`, unnormalized
/// so its peak likelihood is 1. Serves as an analytic SVGD target.
#[derive(Clone, Debug)]
pub struct GaussianDensity {
    pub mean: Vec<f64>,
    pub variances: Vec<f64>,
}

impl GaussianDensity {
    pub fn new(mean: Vec<f64>, variances: Vec<f64>) -> Self {
        assert_eq!(mean.len(), variances.len());
        assert!(variances.iter().all(|v| *v > 0.0));
        GaussianDensity { mean, variances }
    }

    pub fn isotropic(mean: Vec<f64>, std: f64) -> Self {
        let d = mean.len();
        GaussianDensity::new(mean, vec![std * std; d])
    }
}

impl FeasibilityModel for GaussianDensity {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_likelihood(&self, x: &[f64]) -> f64 {
        -0.5 * x.iter().zip(&self.mean).zip(&self.variances).map(|((xi, m), v)| (xi - m) * (xi - m) / v).sum::<f64>()
    }

    fn grad_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.variances).map(|((xi, m), v)| -(xi - m) / v).collect()
    }

    fn curvature(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_diagonal(&DVector::from_iterator(
            self.variances.len(),
            self.variances.iter().map(|v| 1.0 / v),
        )))
    }
}

/// Equal-weight mixture of isotropic Gaussians with a shared standard deviation.
#[derive(Clone, Debug)]
pub struct IsotropicMixture {
    pub means: Vec<Vec<f64>>,
    pub std: f64,
}

impl IsotropicMixture {
    pub fn new(means: Vec<Vec<f64>>, std: f64) -> Self {
        assert!(!means.is_empty() && std > 0.0);
        IsotropicMixture { means, std }
    }

    /// Per-component log weights (unnormalized) and responsibilities.
    fn responsibilities(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let s2 = self.std * self.std;
        let logs: Vec<f64> = self.means.iter().map(|m| -0.5 * crate::geometry::dist_sq(x, m) / s2).collect();
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logs.iter().map(|l| (l - max).exp()).sum();
        let lse = max + sum.ln() - (self.means.len() as f64).ln();
        let resp = logs.iter().map(|l| (l - max).exp() / sum).collect();
        (lse, resp)
    }
}

impl FeasibilityModel for IsotropicMixture {
    fn dim(&self) -> usize {
        self.means[0].len()
    }

    fn log_likelihood(&self, x: &[f64]) -> f64 {
        self.responsibilities(x).0
    }

    fn grad_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        let (_, resp) = self.responsibilities(x);
        let s2 = self.std * self.std;
        let mut g = vec![0.0; x.len()];
        for (r, m) in resp.iter().zip(&self.means) {
            for i in 0..x.len() {
                g[i] -= r * (x[i] - m[i]) / s2;
            }
        }
        g
    }

    fn curvature(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let d = x.len();
        let (_, resp) = self.responsibilities(x);
        let s2 = self.std * self.std;
        let mut mean = DVector::zeros(d);
        let mut second = DMatrix::zeros(d, d);
        for (r, m) in resp.iter().zip(&self.means) {
            let g = DVector::from_iterator(d, (0..d).map(|i| -(x[i] - m[i]) / s2));
            second += *r * &g * g.transpose();
            mean += *r * g;
        }
        Some(DMatrix::identity(d, d) / s2 - (second - &mean * mean.transpose()))
    }
}
