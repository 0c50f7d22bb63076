use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    #[serde(rename = "c")]
    pub center: [f64; 2],
    #[serde(rename = "r")]
    pub radius: f64,
}

impl Circle {
    pub fn signed_distance(&self, p: [f64; 2]) -> (f64, [f64; 2]) {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let n = dx.hypot(dy);
        let grad = if n > 0.0 { [dx / n, dy / n] } else { [1.0, 0.0] };
        (n - self.radius, grad)
    }
}

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Aabb {
    pub fn signed_distance(&self, p: [f64; 2]) -> (f64, [f64; 2]) {
        let mut q = [0.0; 2];
        let mut sign = [0.0; 2];
        for k in 0..2 {
            let c = 0.5 * (self.min[k] + self.max[k]);
            let half = 0.5 * (self.max[k] - self.min[k]);
            let off = p[k] - c;
            sign[k] = if off >= 0.0 { 1.0 } else { -1.0 };
            q[k] = off.abs() - half;
        }
        let ox = q[0].max(0.0);
        let oy = q[1].max(0.0);
        let outside = ox.hypot(oy);
        if outside > 0.0 {
            (outside, [sign[0] * ox / outside, sign[1] * oy / outside])
        } else {
            let k = if q[0] >= q[1] { 0 } else { 1 };
            let mut g = [0.0; 2];
            g[k] = sign[k];
            (q[k], g)
        }
    }

    pub fn area(&self) -> f64 {
        (self.max[0] - self.min[0]) * (self.max[1] - self.min[1])
    }
}

/// Planar workspace obstacles: circles and axis-aligned boxes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSet {
    #[serde(default)]
    pub circles: Vec<Circle>,
    #[serde(default)]
    pub boxes: Vec<Aabb>,
}

impl ObstacleSet {
    pub fn new(circles: Vec<Circle>, boxes: Vec<Aabb>) -> Result<Self> {
        let set = ObstacleSet { circles, boxes };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.circles.iter().enumerate() {
            if !(c.radius > 0.0 && c.center.iter().all(|v| v.is_finite())) {
                return Err(Error::Geometry(format!("circle {i}: radius must be > 0")));
            }
        }
        for (i, b) in self.boxes.iter().enumerate() {
            if !(b.min[0] < b.max[0] && b.min[1] < b.max[1]) {
                return Err(Error::Geometry(format!(
                    "box {i}: min {:?} must be < max {:?} componentwise",
                    b.min, b.max
                )));
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.circles.is_empty() && self.boxes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.circles.len() + self.boxes.len()
    }

    /// Minimum signed distance over all primitives, negative inside.
    pub fn signed_distance(&self, p: [f64; 2]) -> Result<f64> {
        self.signed_distance_grad(p).map(|(d, _)| d)
    }

    /// Signed distance with the gradient of the closest primitive.
    pub fn signed_distance_grad(&self, p: [f64; 2]) -> Result<(f64, [f64; 2])> {
        if self.is_empty() {
            return Err(Error::Geometry("signed distance of an empty obstacle set".into()));
        }
        let best = self
            .circles
            .iter()
            .map(|c| c.signed_distance(p))
            .chain(self.boxes.iter().map(|b| b.signed_distance(p)))
            .fold((f64::INFINITY, [0.0; 2]), |acc, cur| if cur.0 < acc.0 { cur } else { acc });
        Ok(best)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.signed_distance(p).map(|d| d < 0.0).unwrap_or(false)
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let set: ObstacleSet = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
        set.validate().map_err(|e| Error::parse(path, e))?;
        Ok(set)
    }
}
