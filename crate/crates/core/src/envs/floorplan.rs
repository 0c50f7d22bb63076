use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, ConfigSpace, ObstacleSet};
use crate::models::{grid_centers, BayesianHilbertMap, BhmFitConfig, LabeledPoint};

/// A small office: rooms above a corridor wall with three doors, and a
/// half-height partition below it. Walls are axis-aligned boxes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FloorplanSpec {
    pub width: f64,
    pub height: f64,
    pub wall: f64,
    pub door: f64,
    /// Spacing of free-space labels.
    pub free_spacing: f64,
    /// Spacing of occupied labels along wall surfaces.
    pub wall_spacing: f64,
    /// Labels closer than this to a wall are dropped.
    pub clearance: f64,
    pub seed: u64,
}

impl Default for FloorplanSpec {
    fn default() -> Self {
        FloorplanSpec {
            width: 8.0,
            height: 5.0,
            wall: 0.1,
            door: 0.8,
            free_spacing: 0.1,
            wall_spacing: 0.05,
            clearance: 0.1,
            seed: 0,
        }
    }
}

impl FloorplanSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.width, self.height, self.wall, self.door, self.free_spacing, self.wall_spacing];
        if positive.iter().any(|v| !(*v > 0.0)) || self.clearance < 0.0 {
            return Err(Error::Config("floorplan dimensions must be positive".into()));
        }
        if self.width < 4.0 || self.height < 3.0 {
            return Err(Error::Config("floorplan needs width >= 4 and height >= 3".into()));
        }
        Ok(())
    }

    pub fn space(&self) -> ConfigSpace {
        ConfigSpace::new(vec![0.0, 0.0], vec![self.width, self.height]).expect("positive extent")
    }

    pub fn walls(&self) -> ObstacleSet {
        let (w, h, t, d) = (self.width, self.height, self.wall, self.door);
        let b = |x0: f64, y0: f64, x1: f64, y1: f64| Aabb { min: [x0, y0], max: [x1, y1] };
        let corridor = 0.4 * h;
        let rooms = [w / 3.0, 2.0 * w / 3.0];
        let doors = [w / 6.0, w / 2.0, 5.0 * w / 6.0];
        let mut boxes = vec![b(0.0, 0.0, w, t), b(0.0, h - t, w, h), b(0.0, 0.0, t, h), b(w - t, 0.0, w, h)];
        // corridor wall with doors
        let mut x = 0.0;
        for c in doors {
            boxes.push(b(x, corridor - 0.5 * t, c - 0.5 * d, corridor + 0.5 * t));
            x = c + 0.5 * d;
        }
        boxes.push(b(x, corridor - 0.5 * t, w, corridor + 0.5 * t));
        for r in rooms {
            boxes.push(b(r - 0.5 * t, corridor, r + 0.5 * t, h));
        }
        // partition below the corridor wall
        boxes.push(b(0.5 * w - 0.5 * t, 0.0, 0.5 * w + 0.5 * t, 0.6 * corridor));
        ObstacleSet::new(Vec::new(), boxes).expect("valid walls")
    }

    /// Start in the lower left, goal in the upper left room.
    pub fn default_query(&self) -> ([f64; 2], [f64; 2]) {
        ([0.12 * self.width, 0.2 * self.height], [0.12 * self.width, 0.75 * self.height])
    }

    /// Occupied labels along every wall surface and jittered free labels on
    /// a lattice, dropping free labels within `clearance` of a wall.
    pub fn labeled_points(&self) -> Vec<LabeledPoint> {
        let walls = self.walls();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::new();
        for b in &walls.boxes {
            let [x0, y0] = b.min;
            let [x1, y1] = b.max;
            let nx = ((x1 - x0) / self.wall_spacing).ceil().max(1.0) as usize;
            let ny = ((y1 - y0) / self.wall_spacing).ceil().max(1.0) as usize;
            for i in 0..=nx {
                let x = x0 + (x1 - x0) * i as f64 / nx as f64;
                out.push(LabeledPoint { x: [x, y0], free: false });
                out.push(LabeledPoint { x: [x, y1], free: false });
            }
            for j in 1..ny {
                let y = y0 + (y1 - y0) * j as f64 / ny as f64;
                out.push(LabeledPoint { x: [x0, y], free: false });
                out.push(LabeledPoint { x: [x1, y], free: false });
            }
        }
        let s = self.free_spacing;
        let (nx, ny) = ((self.width / s) as usize, (self.height / s) as usize);
        for i in 0..nx {
            for j in 0..ny {
                let p = [
                    (i as f64 + 0.5 + rng.random_range(-0.3..0.3)) * s,
                    (j as f64 + 0.5 + rng.random_range(-0.3..0.3)) * s,
                ];
                if walls.signed_distance(p).expect("walls") > self.clearance {
                    out.push(LabeledPoint { x: p, free: true });
                }
            }
        }
        out
    }
}

/// Keeps the points inside `[xmin, ymin, xmax, ymax]`.
pub fn clip_points(points: &[LabeledPoint], clip: [f64; 4]) -> Vec<LabeledPoint> {
    points
        .iter()
        .filter(|p| p.x[0] >= clip[0] && p.x[0] <= clip[2] && p.x[1] >= clip[1] && p.x[1] <= clip[3])
        .copied()
        .collect()
}

/// Fits a map with centers on a lattice over `space`.
pub fn fit_map(
    points: &[LabeledPoint],
    space: &ConfigSpace,
    center_spacing: f64,
    cfg: &BhmFitConfig,
) -> Result<BayesianHilbertMap> {
    let centers =
        grid_centers([space.lower()[0], space.lower()[1]], [space.upper()[0], space.upper()[1]], center_spacing);
    BayesianHilbertMap::fit(points, centers, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_match_walls() {
        let spec = FloorplanSpec::default();
        let walls = spec.walls();
        let pts = spec.labeled_points();
        assert!(pts.iter().any(|p| p.free) && pts.iter().any(|p| !p.free));
        for p in pts.iter().filter(|p| p.free) {
            assert!(!walls.contains(p.x));
        }
        let (s, g) = spec.default_query();
        assert!(walls.signed_distance(s).unwrap() > 0.3 && walls.signed_distance(g).unwrap() > 0.3);
    }

    #[test]
    fn clip_keeps_inside() {
        let pts = FloorplanSpec::default().labeled_points();
        let c = clip_points(&pts, [0.0, 0.0, 4.0, 5.0]);
        assert!(c.len() < pts.len() && c.iter().all(|p| p.x[0] <= 4.0));
    }
}
