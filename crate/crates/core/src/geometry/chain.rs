use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Where the spheres of a link sit along its segment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpherePlacement {
    /// Fractions `(m + 0.5) / s`: one sphere per link lands on its midpoint.
    #[default]
    Centered,
    /// Fractions `(m + 1) / s`: the last sphere sits on the link tip.
    EndAligned,
}

/// Planar serial chain of revolute joints. Joint `i` rotates link `i`
/// relative to link `i - 1`; absolute link angles are cumulative sums of q.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinematicChain {
    pub link_lengths: Vec<f64>,
    pub base: [f64; 2],
    pub spheres_per_link: usize,
    pub sphere_radius: f64,
    #[serde(default)]
    pub placement: SpherePlacement,
}

impl KinematicChain {
    pub fn new(link_lengths: Vec<f64>, base: [f64; 2], spheres_per_link: usize, sphere_radius: f64) -> Result<Self> {
        let chain = KinematicChain {
            link_lengths,
            base,
            spheres_per_link,
            sphere_radius,
            placement: SpherePlacement::Centered,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn with_placement(mut self, placement: SpherePlacement) -> Self {
        self.placement = placement;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.link_lengths.is_empty() || self.link_lengths.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::Geometry("chain needs at least one link, all lengths > 0".into()));
        }
        if self.spheres_per_link == 0 || !(self.sphere_radius > 0.0) {
            return Err(Error::Geometry("chain needs spheres_per_link >= 1 and sphere_radius > 0".into()));
        }
        Ok(())
    }

    pub fn dof(&self) -> usize {
        self.link_lengths.len()
    }

    pub fn num_spheres(&self) -> usize {
        self.dof() * self.spheres_per_link
    }

    pub fn reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    fn fraction(&self, m: usize) -> f64 {
        let s = self.spheres_per_link as f64;
        match self.placement {
            SpherePlacement::Centered => (m as f64 + 0.5) / s,
            SpherePlacement::EndAligned => (m as f64 + 1.0) / s,
        }
    }

    fn check_dim(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::Geometry(format!(
                "joint vector has length {}, chain has {} joints",
                q.len(),
                self.dof()
            )));
        }
        Ok(())
    }

    /// Base followed by every joint position and the tip.
    pub fn joint_positions(&self, q: &[f64]) -> Result<Vec<[f64; 2]>> {
        self.check_dim(q)?;
        let mut out = Vec::with_capacity(self.dof() + 1);
        let mut p = self.base;
        let mut theta = 0.0;
        out.push(p);
        for (len, qi) in self.link_lengths.iter().zip(q) {
            theta += qi;
            p = [p[0] + len * theta.cos(), p[1] + len * theta.sin()];
            out.push(p);
        }
        Ok(out)
    }

    /// Body spheres in link order.
    pub fn forward_spheres(&self, q: &[f64]) -> Result<Vec<Sphere>> {
        Ok(self.forward_spheres_with_jacobian(q)?.into_iter().map(|(s, _)| s).collect())
    }

    /// Body spheres together with d(center)/dq, one `[dx, dy]` per joint.
    pub fn forward_spheres_with_jacobian(&self, q: &[f64]) -> Result<Vec<(Sphere, Vec<[f64; 2]>)>> {
        self.check_dim(q)?;
        let k = self.dof();
        let mut angles = Vec::with_capacity(k);
        let mut theta = 0.0;
        for qi in q {
            theta += qi;
            angles.push(theta);
        }
        let mut out = Vec::with_capacity(self.num_spheres());
        let mut origin = self.base;
        for link in 0..k {
            let len = self.link_lengths[link];
            let (s, c) = angles[link].sin_cos();
            for m in 0..self.spheres_per_link {
                let f = self.fraction(m);
                let center = [origin[0] + f * len * c, origin[1] + f * len * s];
                // Joint i moves every point distal to it by a rotation about
                // joint i: d p / d q_i = perp(p - joint_i).
                let mut cols = vec![[0.0; 2]; k];
                let mut joint = self.base;
                for (i, col) in cols.iter_mut().enumerate().take(link + 1) {
                    *col = [-(center[1] - joint[1]), center[0] - joint[0]];
                    let (si, ci) = angles[i].sin_cos();
                    joint = [joint[0] + self.link_lengths[i] * ci, joint[1] + self.link_lengths[i] * si];
                }
                out.push((Sphere { center, radius: self.sphere_radius }, cols));
            }
            origin = [origin[0] + len * c, origin[1] + len * s];
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn straight_chain_midpoints() {
        let chain = KinematicChain::new(vec![1.0, 1.0], [0.0, 0.0], 1, 0.1).unwrap();
        let s = chain.forward_spheres(&[0.0, 0.0]).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s[0].center[0] - 0.5).abs() < 1e-15 && s[0].center[1].abs() < 1e-15);
        assert!((s[1].center[0] - 1.5).abs() < 1e-15 && s[1].center[1].abs() < 1e-15);
    }

    #[test]
    fn tip_sphere_rotates() {
        let chain =
            KinematicChain::new(vec![1.0], [0.0, 0.0], 1, 0.1).unwrap().with_placement(SpherePlacement::EndAligned);
        let s = chain.forward_spheres(&[PI / 2.0]).unwrap();
        assert!(s[0].center[0].abs() < 1e-12);
        assert!((s[0].center[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let chain = KinematicChain::new(vec![1.0, 1.0], [0.0, 0.0], 2, 0.1).unwrap();
        assert!(chain.forward_spheres(&[0.0]).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let chain = KinematicChain::new(vec![0.7, 0.5, 0.3], [0.2, -0.1], 3, 0.05).unwrap();
        let q = [0.3, -1.1, 0.8];
        let analytic = chain.forward_spheres_with_jacobian(&q).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let mut qp = q;
            let mut qm = q;
            qp[i] += h;
            qm[i] -= h;
            let sp = chain.forward_spheres(&qp).unwrap();
            let sm = chain.forward_spheres(&qm).unwrap();
            for (j, (_, cols)) in analytic.iter().enumerate() {
                for (a, exact) in cols[i].iter().enumerate() {
                    let fd = (sp[j].center[a] - sm[j].center[a]) / (2.0 * h);
                    assert!((fd - exact).abs() < 1e-8, "sphere {j} joint {i}");
                }
            }
        }
    }
}
