//! Configuration spaces, samplers, planar obstacle geometry and the planar
//! kinematic chain whose body spheres feed the t-SDF cost.

mod chain;
mod halton;
mod obstacles;
mod space;

pub use chain::{KinematicChain, Sphere, SpherePlacement};
pub use halton::{radical_inverse, sample_halton, HALTON_PRIMES};
pub use obstacles::{Aabb, Circle, ObstacleSet};
pub use space::{sample_uniform, sample_uniform_with, ConfigSpace};

/// A point in configuration space.
pub type Config = Vec<f64>;

/// Squared Euclidean distance.
#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}
