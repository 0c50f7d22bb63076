use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::geometry::ConfigSpace;

/// Log-prior over configuration space.
pub trait LogPrior: Send + Sync {
    fn log_density(&self, x: &[f64]) -> f64;
    fn grad(&self, x: &[f64]) -> Vec<f64>;
    /// `-hessian(log p(x))`.
    fn curvature(&self, x: &[f64]) -> DMatrix<f64>;
}

#[derive(Clone, Copy, Debug)]
pub struct FlatPrior {
    pub dim: usize,
}

impl LogPrior for FlatPrior {
    fn log_density(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn grad(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; self.dim]
    }
    fn curvature(&self, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::zeros(self.dim, self.dim)
    }
}

/// Uniform prior on the box with a quadratic barrier inside a band of width
/// `margin` along every face:
///
/// `log p(x) = -k * sum_i [relu((l_i + m - x_i)/m)^2 + relu((x_i - u_i + m)/m)^2]`
///
/// Zero in the interior, C1 everywhere, gradient pointing inward in the band.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxBarrierPrior {
    pub space: ConfigSpace,
    pub stiffness: f64,
    pub margin: f64,
}

impl BoxBarrierPrior {
    pub const DEFAULT_STIFFNESS: f64 = 50.0;
    pub const DEFAULT_MARGIN_FRACTION: f64 = 0.02;

    pub fn new(space: ConfigSpace, stiffness: f64, margin: f64) -> Self {
        assert!(stiffness > 0.0 && margin > 0.0, "barrier needs stiffness > 0 and margin > 0");
        BoxBarrierPrior { space, stiffness, margin }
    }

    /// Stiffness 50 and a margin of 2% of the smallest box extent.
    pub fn with_defaults(space: ConfigSpace) -> Self {
        let extent = (0..space.dim()).map(|i| space.extent(i)).fold(f64::INFINITY, f64::min);
        BoxBarrierPrior::new(space, Self::DEFAULT_STIFFNESS, Self::DEFAULT_MARGIN_FRACTION * extent)
    }

    fn penetrations(&self, x: &[f64], i: usize) -> (f64, f64) {
        let m = self.margin;
        let lo = ((self.space.lower()[i] + m - x[i]) / m).max(0.0);
        let hi = ((x[i] - self.space.upper()[i] + m) / m).max(0.0);
        (lo, hi)
    }
}

impl LogPrior for BoxBarrierPrior {
    fn log_density(&self, x: &[f64]) -> f64 {
        -self.stiffness
            * (0..self.space.dim())
                .map(|i| {
                    let (lo, hi) = self.penetrations(x, i);
                    lo * lo + hi * hi
                })
                .sum::<f64>()
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let scale = 2.0 * self.stiffness / self.margin;
        (0..self.space.dim())
            .map(|i| {
                let (lo, hi) = self.penetrations(x, i);
                scale * (lo - hi)
            })
            .collect()
    }

    fn curvature(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.space.dim();
        let c = 2.0 * self.stiffness / (self.margin * self.margin);
        let mut h = DMatrix::zeros(d, d);
        for i in 0..d {
            let (lo, hi) = self.penetrations(x, i);
            if lo > 0.0 || hi > 0.0 {
                h[(i, i)] = c;
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_prior() -> BoxBarrierPrior {
        BoxBarrierPrior::with_defaults(ConfigSpace::cube(2, 0.0, 1.0).unwrap())
    }

    #[test]
    fn interior_is_flat() {
        let p = unit_prior();
        for x in [[0.5, 0.5], [0.021, 0.979], [0.3, 0.9]] {
            assert_eq!(p.log_density(&x), 0.0);
            assert_eq!(p.grad(&x), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn gradient_points_inward_and_grows() {
        let p = unit_prior();
        let near = p.grad(&[0.01, 0.995]);
        assert!(near[0] > 0.0 && near[1] < 0.0);
        let closer = p.grad(&[0.0, 1.0]);
        assert!(closer[0] > near[0] && closer[1] < near[1]);
        assert!(closer[0] >= 1000.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = unit_prior();
        let h = 1e-7;
        for x in [[0.013, 0.5], [0.5, 0.991], [0.004, 0.997]] {
            let g = p.grad(&x);
            for i in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                let fd = (p.log_density(&xp) - p.log_density(&xm)) / (2.0 * h);
                assert!((fd - g[i]).abs() <= 1e-4 * g[i].abs().max(1.0));
            }
        }
    }
}
