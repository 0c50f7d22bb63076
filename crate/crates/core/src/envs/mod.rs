//! Benchmark environments.

mod checkerboard;
mod cubby;
mod floorplan;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use checkerboard::{gen_checkerboard, Checkerboard, CheckerboardSpec};
pub use cubby::{gen_cubby_arm_task, CubbySpec, CubbyTask};
pub use floorplan::{clip_points, fit_map, FloorplanSpec};

use crate::error::{Error, Result};
use crate::geometry::{Config, ConfigSpace, ObstacleSet};
use crate::models::{BhmFitConfig, FeasibilityModel, LabeledPoint, RbfOccupancyField, TsdfArmModel};
use crate::occupancy::OccupancyGrid;

fn default_center_spacing() -> f64 {
    0.25
}

fn default_bhm() -> BhmFitConfig {
    BhmFitConfig { lengthscale: 0.25, prior_variance: 10.0, max_iters: 200, bias: false, tol: 1e-6 }
}

/// What to plan in. File paths are resolved against the config directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvironmentSpec {
    Checkerboard(CheckerboardSpec),
    OccupancyGrid {
        path: PathBuf,
        feature_spacing: f64,
        #[serde(default = "default_ridge")]
        ridge: f64,
    },
    LabeledPoints {
        path: PathBuf,
        #[serde(default = "default_center_spacing")]
        center_spacing: f64,
        #[serde(default = "default_bhm")]
        bhm: BhmFitConfig,
        /// Fit only on points inside `[xmin, ymin, xmax, ymax]`.
        #[serde(default)]
        clip: Option<[f64; 4]>,
    },
    Floorplan {
        #[serde(default)]
        layout: FloorplanSpec,
        #[serde(default = "default_center_spacing")]
        center_spacing: f64,
        #[serde(default = "default_bhm")]
        bhm: BhmFitConfig,
        #[serde(default)]
        clip: Option<[f64; 4]>,
    },
    CubbyArm(CubbySpec),
}

fn default_ridge() -> f64 {
    RbfOccupancyField::DEFAULT_RIDGE
}

impl Default for EnvironmentSpec {
    fn default() -> Self {
        EnvironmentSpec::Checkerboard(CheckerboardSpec::default())
    }
}

impl EnvironmentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            EnvironmentSpec::Checkerboard(_) => "checkerboard",
            EnvironmentSpec::OccupancyGrid { .. } => "occupancy_grid",
            EnvironmentSpec::LabeledPoints { .. } => "labeled_points",
            EnvironmentSpec::Floorplan { .. } => "floorplan",
            EnvironmentSpec::CubbyArm(_) => "cubby_arm",
        }
    }

    /// Makes relative file paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        match self {
            EnvironmentSpec::OccupancyGrid { path, .. } | EnvironmentSpec::LabeledPoints { path, .. }
                if path.is_relative() =>
            {
                *path = base.join(&*path);
            }
            _ => {}
        }
    }

    pub fn referenced_files(&self) -> Vec<&Path> {
        match self {
            EnvironmentSpec::OccupancyGrid { path, .. } | EnvironmentSpec::LabeledPoints { path, .. } => {
                vec![path.as_path()]
            }
            _ => Vec::new(),
        }
    }
}

/// Data for drawing the workspace.
#[derive(Clone, Debug)]
pub enum Scene {
    Grid(OccupancyGrid),
    Points { points: Vec<LabeledPoint>, walls: Option<ObstacleSet>, clip: Option<[f64; 4]> },
    Arm(TsdfArmModel),
}

/// A fitted environment ready for inference and planning.
pub struct Environment {
    pub name: String,
    pub space: ConfigSpace,
    pub model: Box<dyn FeasibilityModel>,
    /// Fully observed model for reference samples; `None` means `model`.
    pub reference: Option<Box<dyn FeasibilityModel>>,
    pub start: Option<Config>,
    pub goal: Option<Config>,
    pub home: Option<Config>,
    /// Resolution of the underlying map, if there is one.
    pub cell_size: Option<f64>,
    pub scene: Scene,
    /// The fitted likelihood model as JSON.
    pub model_json: serde_json::Value,
}

impl std::fmt::Debug for Environment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Environment")
            .field("name", &self.name)
            .field("space", &self.space)
            .field("start", &self.start)
            .field("goal", &self.goal)
            .finish_non_exhaustive()
    }
}

impl Environment {
    pub fn reference_model(&self) -> &dyn FeasibilityModel {
        self.reference.as_deref().unwrap_or(self.model.as_ref())
    }

    /// `min(cell, rho) / 8`.
    pub fn default_edge_resolution(&self, rho: f64) -> f64 {
        self.cell_size.map_or(rho, |c| c.min(rho)) / 8.0
    }
}

fn to_json(model: &impl Serialize) -> serde_json::Value {
    serde_json::to_value(model).expect("models serialize")
}

fn points_space(points: &[LabeledPoint]) -> Result<ConfigSpace> {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for a in 0..2 {
            lo[a] = lo[a].min(p.x[a]);
            hi[a] = hi[a].max(p.x[a]);
        }
    }
    ConfigSpace::new(lo.to_vec(), hi.to_vec())
}

fn fit_points_env(
    name: &str,
    all: Vec<LabeledPoint>,
    space: ConfigSpace,
    center_spacing: f64,
    bhm: &BhmFitConfig,
    clip: Option<[f64; 4]>,
    walls: Option<ObstacleSet>,
) -> Result<Environment> {
    if !(center_spacing > 0.0) {
        return Err(Error::Config("center_spacing must be > 0".into()));
    }
    let (model, reference) = match clip {
        Some(c) => {
            let partial = clip_points(&all, c);
            let model = fit_map(&partial, &space, center_spacing, bhm)?;
            let full = fit_map(&all, &space, center_spacing, bhm)?;
            (model, Some(Box::new(full) as Box<dyn FeasibilityModel>))
        }
        None => (fit_map(&all, &space, center_spacing, bhm)?, None),
    };
    Ok(Environment {
        name: name.into(),
        space,
        model_json: to_json(&model),
        model: Box::new(model),
        reference,
        start: None,
        goal: None,
        home: None,
        cell_size: Some(center_spacing),
        scene: Scene::Points { points: all, walls, clip },
    })
}

/// Generates or loads the environment and fits its feasibility model.
pub fn build_environment(spec: &EnvironmentSpec) -> Result<Environment> {
    match spec {
        EnvironmentSpec::Checkerboard(cb) => {
            let board = gen_checkerboard(cb)?;
            let (s, g) = cb.corner_query();
            Ok(Environment {
                name: "checkerboard".into(),
                space: cb.space(),
                model_json: to_json(&board.field),
                model: Box::new(board.field),
                reference: None,
                start: Some(s.to_vec()),
                goal: Some(g.to_vec()),
                home: None,
                cell_size: Some(board.grid.cell_size()[0].min(board.grid.cell_size()[1])),
                scene: Scene::Grid(board.grid),
            })
        }
        EnvironmentSpec::OccupancyGrid { path, feature_spacing, ridge } => {
            let grid = OccupancyGrid::load(path)?;
            let field = RbfOccupancyField::fit_grid(&grid, *feature_spacing, *ridge)?;
            let e = grid.extent;
            Ok(Environment {
                name: "occupancy_grid".into(),
                space: ConfigSpace::new(vec![e[0], e[1]], vec![e[2], e[3]])?,
                model_json: to_json(&field),
                model: Box::new(field),
                reference: None,
                start: None,
                goal: None,
                home: None,
                cell_size: Some(grid.cell_size()[0].min(grid.cell_size()[1])),
                scene: Scene::Grid(grid),
            })
        }
        EnvironmentSpec::LabeledPoints { path, center_spacing, bhm, clip } => {
            let points = LabeledPoint::load_csv(path)?;
            let space = points_space(&points)?;
            fit_points_env("labeled_points", points, space, *center_spacing, bhm, *clip, None)
        }
        EnvironmentSpec::Floorplan { layout, center_spacing, bhm, clip } => {
            layout.validate()?;
            let mut env = fit_points_env(
                "floorplan",
                layout.labeled_points(),
                layout.space(),
                *center_spacing,
                bhm,
                *clip,
                Some(layout.walls()),
            )?;
            let (s, g) = layout.default_query();
            env.start = Some(s.to_vec());
            env.goal = Some(g.to_vec());
            env.cell_size = Some(layout.free_spacing);
            Ok(env)
        }
        EnvironmentSpec::CubbyArm(spec) => {
            let task = gen_cubby_arm_task(spec)?;
            Ok(Environment {
                name: "cubby_arm".into(),
                space: spec.space(),
                model_json: to_json(&task.model),
                model: Box::new(task.model.clone()),
                reference: None,
                start: Some(task.start),
                goal: Some(task.goal),
                home: Some(task.home),
                // joint step that moves the tip by one wall thickness
                cell_size: Some(spec.wall / task.model.chain.reach()),
                scene: Scene::Arm(task.model),
            })
        }
    }
}
