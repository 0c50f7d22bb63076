use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Config;
use crate::error::{Error, Result};

/// Axis-aligned box configuration space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct ConfigSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<RawSpace> for ConfigSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        ConfigSpace::new(raw.lower, raw.upper)
    }
}

impl ConfigSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::Geometry("configuration space needs dim >= 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::Geometry(format!(
                "bound length mismatch: {} lower vs {} upper",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::Geometry(format!("axis {i}: need finite lower < upper, got [{l}, {u}]")));
            }
        }
        Ok(ConfigSpace { lower, upper })
    }

    /// The box `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        ConfigSpace::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    /// Length of the box diagonal.
    pub fn diameter(&self) -> f64 {
        (0..self.dim()).map(|i| self.extent(i).powi(2)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }

    /// Maps a point of the unit cube affinely into the box.
    pub fn from_unit(&self, unit: &[f64]) -> Config {
        unit.iter().zip(self.lower.iter().zip(&self.upper)).map(|(t, (l, u))| l + t * (u - l)).collect()
    }
}

/// `n` iid uniform draws from the box. Deterministic for a fixed seed.
pub fn sample_uniform(space: &ConfigSpace, n: usize, seed: u64) -> Vec<Config> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_uniform_with(space, n, &mut rng)
}

/// [`sample_uniform`] drawing from a caller-owned generator.
pub fn sample_uniform_with<R: Rng>(space: &ConfigSpace, n: usize, rng: &mut R) -> Vec<Config> {
    (0..n).map(|_| space.lower.iter().zip(&space.upper).map(|(l, u)| rng.random_range(*l..*u)).collect()).collect()
}
