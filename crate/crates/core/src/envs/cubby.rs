use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Config, ConfigSpace, KinematicChain, ObstacleSet};
use crate::models::TsdfArmModel;

/// A planar arm at the origin facing a cabinet with two stacked
/// compartments that open toward the arm. The task is to move the hand from
/// the upper compartment into the lower one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CubbySpec {
    pub link_lengths: Vec<f64>,
    pub spheres_per_link: usize,
    pub sphere_radius: f64,
    /// x of the cabinet opening.
    pub front: f64,
    pub depth: f64,
    pub compartment_height: f64,
    pub wall: f64,
    pub epsilon_sdf: f64,
    pub alpha: f64,
    pub start: Config,
    pub goal: Config,
    /// Folded configuration used as the third mixture component.
    pub home: Config,
    /// Half-width of the square workspace centred on the base.
    pub workspace: f64,
}

impl Default for CubbySpec {
    fn default() -> Self {
        let a = 0.6435;
        CubbySpec {
            link_lengths: vec![1.0, 0.8, 0.6],
            spheres_per_link: 3,
            sphere_radius: 0.05,
            front: 1.8,
            depth: 1.6,
            compartment_height: 1.05,
            wall: 0.1,
            epsilon_sdf: TsdfArmModel::DEFAULT_EPSILON,
            alpha: TsdfArmModel::DEFAULT_ALPHA,
            start: vec![a, -a, 0.0],
            goal: vec![-a, a, 0.0],
            home: vec![PI / 2.0, -2.4, -2.2],
            workspace: 3.0,
        }
    }
}

impl CubbySpec {
    pub fn walls(&self) -> ObstacleSet {
        let (x0, x1, t, hc) = (self.front, self.front + self.depth, self.wall, self.compartment_height);
        let top = 0.5 * t + hc;
        let b = |y0: f64, y1: f64| Aabb { min: [x0, y0], max: [x1, y1] };
        ObstacleSet::new(
            Vec::new(),
            vec![
                b(-0.5 * t, 0.5 * t),
                b(top, top + t),
                b(-top - t, -top),
                Aabb { min: [x1 - t, -top - t], max: [x1, top + t] },
            ],
        )
        .expect("valid cabinet")
    }

    pub fn chain(&self) -> Result<KinematicChain> {
        KinematicChain::new(self.link_lengths.clone(), [0.0, 0.0], self.spheres_per_link, self.sphere_radius)
    }

    /// Joint box `[-pi, pi]^k`.
    pub fn space(&self) -> ConfigSpace {
        ConfigSpace::cube(self.link_lengths.len(), -PI, PI).expect("nonempty chain")
    }
}

#[derive(Clone, Debug)]
pub struct CubbyTask {
    pub spec: CubbySpec,
    pub model: TsdfArmModel,
    pub start: Config,
    pub goal: Config,
    pub home: Config,
}

/// Samples used when checking that the straight joint-space segment between
/// start and goal is obstructed.
const INTERPOLATION_CHECKS: usize = 200;

/// Builds the model and checks that start, goal and home are clear of the
/// truncation band and that the direct joint interpolation is not.
pub fn gen_cubby_arm_task(spec: &CubbySpec) -> Result<CubbyTask> {
    let chain = spec.chain()?;
    let k = chain.dof();
    if [&spec.start, &spec.goal, &spec.home].iter().any(|q| q.len() != k) {
        return Err(Error::Config(format!("start, goal and home need {k} joints")));
    }
    if !(spec.epsilon_sdf > 0.0 && spec.alpha > 0.0) {
        return Err(Error::Config("epsilon_sdf and alpha must be > 0".into()));
    }
    if chain.reach() + chain.sphere_radius > spec.workspace {
        return Err(Error::Config("chain does not fit inside the workspace".into()));
    }
    let model = TsdfArmModel::new(chain, spec.walls(), spec.epsilon_sdf, spec.alpha);
    let space = spec.space();
    for (name, q) in [("start", &spec.start), ("goal", &spec.goal), ("home", &spec.home)] {
        if !space.contains(q) {
            return Err(Error::Config(format!("{name} configuration is outside the joint limits")));
        }
        let h = model.tsdf_cost(q).squared_norm();
        if h > 0.0 {
            return Err(Error::Config(format!("{name} configuration is in collision (|h|^2 = {h:.4})")));
        }
    }
    let blocked = (1..INTERPOLATION_CHECKS).any(|i| {
        let t = i as f64 / INTERPOLATION_CHECKS as f64;
        let q: Config = spec.start.iter().zip(&spec.goal).map(|(a, b)| a + t * (b - a)).collect();
        model.tsdf_cost(&q).squared_norm() > 0.0
    });
    if !blocked {
        return Err(Error::Config("start and goal are joined by a clear straight segment".into()));
    }
    Ok(CubbyTask {
        spec: spec.clone(),
        model,
        start: spec.start.clone(),
        goal: spec.goal.clone(),
        home: spec.home.clone(),
    })
}
