use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::FeasibilityModel;
use crate::geometry::{KinematicChain, ObstacleSet};

/// Hinge obstacle cost of a planar arm: for body sphere `j` with surface
/// distance `d_j` to the nearest obstacle, `h_j = max(0, eps - d_j)`. The
/// feasibility likelihood is `exp(-alpha |h|^2)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TsdfArmModel {
    pub chain: KinematicChain,
    pub obstacles: ObstacleSet,
    pub epsilon_sdf: f64,
    pub alpha: f64,
}

/// Obstacle-cost vector and its Jacobian (`K x k`, row-major per sphere).
#[derive(Clone, Debug)]
pub struct TsdfCost {
    pub h: Vec<f64>,
    pub jacobian: Vec<Vec<f64>>,
}

impl TsdfCost {
    pub fn squared_norm(&self) -> f64 {
        self.h.iter().map(|v| v * v).sum()
    }
}

impl TsdfArmModel {
    pub const DEFAULT_EPSILON: f64 = 0.25;
    pub const DEFAULT_ALPHA: f64 = 10.0;

    pub fn new(chain: KinematicChain, obstacles: ObstacleSet, epsilon_sdf: f64, alpha: f64) -> Self {
        assert!(!obstacles.is_empty(), "t-SDF model needs at least one obstacle");
        assert!(epsilon_sdf > 0.0 && alpha > 0.0);
        TsdfArmModel { chain, obstacles, epsilon_sdf, alpha }
    }

    /// Surface distance of every body sphere to the nearest obstacle.
    pub fn sphere_distances(&self, q: &[f64]) -> Vec<f64> {
        self.chain
            .forward_spheres(q)
            .expect("joint vector matches chain")
            .iter()
            .map(|s| self.obstacles.signed_distance(s.center).expect("nonempty obstacles") - s.radius)
            .collect()
    }

    /// `h(q)` and `dh/dq`. Rows are zero where `d_j >= eps`, including the
    /// kink itself.
    pub fn tsdf_cost(&self, q: &[f64]) -> TsdfCost {
        let spheres = self.chain.forward_spheres_with_jacobian(q).expect("joint vector matches chain");
        let k = q.len();
        let mut h = Vec::with_capacity(spheres.len());
        let mut jacobian = Vec::with_capacity(spheres.len());
        for (sphere, cols) in spheres {
            let (sd, grad) = self.obstacles.signed_distance_grad(sphere.center).expect("nonempty obstacles");
            let d = sd - sphere.radius;
            if d < self.epsilon_sdf {
                h.push(self.epsilon_sdf - d);
                jacobian.push(cols.iter().map(|c| -(grad[0] * c[0] + grad[1] * c[1])).collect());
            } else {
                h.push(0.0);
                jacobian.push(vec![0.0; k]);
            }
        }
        TsdfCost { h, jacobian }
    }

    /// Distance of `q` to the nearest hinge kink, `min_j |d_j - eps|`.
    pub fn kink_distance(&self, q: &[f64]) -> f64 {
        self.sphere_distances(q).iter().map(|d| (d - self.epsilon_sdf).abs()).fold(f64::INFINITY, f64::min)
    }
}

impl FeasibilityModel for TsdfArmModel {
    fn dim(&self) -> usize {
        self.chain.dof()
    }

    fn log_likelihood(&self, x: &[f64]) -> f64 {
        let sq: f64 = self.sphere_distances(x).iter().map(|d| (self.epsilon_sdf - d).max(0.0).powi(2)).sum();
        -self.alpha * sq
    }

    fn grad_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        let cost = self.tsdf_cost(x);
        let mut g = vec![0.0; x.len()];
        for (hj, row) in cost.h.iter().zip(&cost.jacobian) {
            for (gi, r) in g.iter_mut().zip(row) {
                *gi -= 2.0 * self.alpha * hj * r;
            }
        }
        g
    }

    /// Gauss-Newton curvature `2 alpha J'J`.
    fn curvature(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let cost = self.tsdf_cost(x);
        let k = x.len();
        let mut m = DMatrix::zeros(k, k);
        for row in &cost.jacobian {
            for a in 0..k {
                for b in 0..k {
                    m[(a, b)] += 2.0 * self.alpha * row[a] * row[b];
                }
            }
        }
        Some(m)
    }
}
