//! Particle-based probabilistic roadmaps.
//!
//! Configurations are sampled, transported toward a feasibility posterior
//! with Stein variational gradient descent, culled by a chance constraint
//! and connected into a roadmap that is searched lazily.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod envs;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod models;
pub mod occupancy;
pub mod planner;
pub mod render;
pub mod roadmap;
pub mod sampling;
pub mod svgd;

pub use error::{Error, Result};
