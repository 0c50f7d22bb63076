//! Chance-constrained roadmap construction.

mod kdtree;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use kdtree::KdTree;

use crate::error::{Error, Result};
use crate::geometry::{dist, Config};
use crate::models::FeasibilityModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeStatus {
    Unevaluated,
    Feasible,
    Infeasible,
}

/// Undirected edge with `i < j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
    pub status: EdgeStatus,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.i {
            self.j
        } else {
            self.i
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EdgeCheck {
    Feasible,
    /// First query point, walking from `a`, with `p < beta`.
    Infeasible {
        point: Config,
    },
}

impl EdgeCheck {
    pub fn is_feasible(&self) -> bool {
        matches!(self, EdgeCheck::Feasible)
    }
}

/// Keeps the particles whose feasibility probability is at least `beta`.
pub fn cull_vertices(particles: &[Config], model: &dyn FeasibilityModel, beta: f64) -> Vec<Config> {
    particles.iter().filter(|x| model.probability(x) >= beta).cloned().collect()
}

/// All pairs closer than `rho`, sorted by `(i, j)`, unevaluated.
pub fn connect_radius(vertices: &[Config], rho: f64) -> Vec<Edge> {
    let tree = KdTree::new(vertices);
    let mut edges = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        for j in tree.within(v, rho) {
            if j > i {
                edges.push(Edge { i, j, length: dist(v, &vertices[j]), status: EdgeStatus::Unevaluated });
            }
        }
    }
    edges
}

/// Number of equally spaced query points used on a segment of `length`.
pub fn query_count(length: f64, resolution: f64) -> usize {
    if length <= 0.0 {
        1
    } else {
        (length / resolution).ceil() as usize + 1
    }
}

/// Walks from `a` to `b` checking `p >= beta` at every query point.
pub fn check_edge(model: &dyn FeasibilityModel, a: &[f64], b: &[f64], beta: f64, resolution: f64) -> EdgeCheck {
    let n = query_count(dist(a, b), resolution);
    let mut x = a.to_vec();
    for k in 0..n {
        let t = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
        for (xi, (ai, bi)) in x.iter_mut().zip(a.iter().zip(b)) {
            *xi = ai + t * (bi - ai);
        }
        if model.probability(&x) < beta {
            return EdgeCheck::Infeasible { point: x };
        }
    }
    EdgeCheck::Feasible
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadmapParams {
    pub beta: f64,
    pub rho: f64,
    pub edge_resolution: f64,
    pub lazy: bool,
}

impl RoadmapParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Roadmap(format!("beta must lie in [0, 1], got {}", self.beta)));
        }
        if !(self.rho > 0.0) {
            return Err(Error::Roadmap(format!("rho must be > 0, got {}", self.rho)));
        }
        if !(self.edge_resolution > 0.0 && self.edge_resolution.is_finite()) {
            return Err(Error::Roadmap(format!("edge_resolution must be > 0, got {}", self.edge_resolution)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RoadmapData {
    vertices: Vec<Config>,
    edges: Vec<Edge>,
    beta: f64,
    rho: f64,
    edge_resolution: f64,
}

/// Vertices that passed the chance constraint plus their radius edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RoadmapData", into = "RoadmapData")]
pub struct Roadmap {
    vertices: Vec<Config>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
    pub beta: f64,
    pub rho: f64,
    pub edge_resolution: f64,
}

impl From<Roadmap> for RoadmapData {
    fn from(r: Roadmap) -> Self {
        RoadmapData {
            vertices: r.vertices,
            edges: r.edges,
            beta: r.beta,
            rho: r.rho,
            edge_resolution: r.edge_resolution,
        }
    }
}

impl TryFrom<RoadmapData> for Roadmap {
    type Error = Error;

    fn try_from(d: RoadmapData) -> Result<Self> {
        Roadmap::from_parts(d.vertices, d.edges, d.beta, d.rho, d.edge_resolution)
    }
}

impl Roadmap {
    pub fn from_parts(
        vertices: Vec<Config>,
        edges: Vec<Edge>,
        beta: f64,
        rho: f64,
        edge_resolution: f64,
    ) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for e in &edges {
            if e.i >= e.j || e.j >= vertices.len() {
                return Err(Error::Roadmap(format!("bad edge ({}, {})", e.i, e.j)));
            }
            if !seen.insert((e.i, e.j)) {
                return Err(Error::Roadmap(format!("duplicate edge ({}, {})", e.i, e.j)));
            }
        }
        let mut r = Roadmap { vertices, edges, adjacency: Vec::new(), beta, rho, edge_resolution };
        r.rebuild_adjacency();
        Ok(r)
    }

    fn rebuild_adjacency(&mut self) {
        self.adjacency = vec![Vec::new(); self.vertices.len()];
        for (k, e) in self.edges.iter().enumerate() {
            self.adjacency[e.i].push(k);
            self.adjacency[e.j].push(k);
        }
    }

    pub fn vertices(&self) -> &[Config] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edge indices incident to `v`.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn set_status(&mut self, edge: usize, status: EdgeStatus) {
        self.edges[edge].status = status;
    }

    pub fn edge_pairs(&self, status: EdgeStatus) -> Vec<(usize, usize)> {
        self.edges.iter().filter(|e| e.status == status).map(|e| (e.i, e.j)).collect()
    }

    pub fn count(&self, status: EdgeStatus) -> usize {
        self.edges.iter().filter(|e| e.status == status).count()
    }

    /// Resolves every unevaluated edge. Returns the number of checks made.
    pub fn evaluate_all(&mut self, model: &dyn FeasibilityModel) -> usize {
        let (beta, res) = (self.beta, self.edge_resolution);
        let todo: Vec<usize> =
            (0..self.edges.len()).filter(|&k| self.edges[k].status == EdgeStatus::Unevaluated).collect();
        let verdicts: Vec<bool> = todo
            .par_iter()
            .map(|&k| {
                let e = &self.edges[k];
                check_edge(model, &self.vertices[e.i], &self.vertices[e.j], beta, res).is_feasible()
            })
            .collect();
        for (&k, ok) in todo.iter().zip(verdicts) {
            self.edges[k].status = if ok { EdgeStatus::Feasible } else { EdgeStatus::Infeasible };
        }
        todo.len()
    }

    /// Adds a vertex connected to every existing vertex closer than `rho`.
    /// Returns its index.
    pub fn insert_vertex(&mut self, x: Config) -> usize {
        let v = self.vertices.len();
        for u in 0..v {
            let length = dist(&self.vertices[u], &x);
            if length < self.rho {
                self.adjacency[u].push(self.edges.len());
                self.edges.push(Edge { i: u, j: v, length, status: EdgeStatus::Unevaluated });
            }
        }
        self.vertices.push(x);
        self.adjacency.push(Vec::new());
        for k in 0..self.edges.len() {
            if self.edges[k].j == v {
                self.adjacency[v].push(k);
            }
        }
        v
    }

    /// Drops vertices and edges added after the given sizes.
    pub fn truncate(&mut self, num_vertices: usize, num_edges: usize) {
        self.vertices.truncate(num_vertices);
        self.edges.truncate(num_edges);
        self.adjacency.truncate(num_vertices);
        for adj in &mut self.adjacency {
            adj.retain(|&k| k < num_edges);
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::parse(path, e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
    }
}

/// Culls `particles` at `params.beta` and connects the survivors. Eager
/// builds check every edge immediately.
pub fn build_roadmap(particles: &[Config], model: &dyn FeasibilityModel, params: &RoadmapParams) -> Result<Roadmap> {
    params.validate()?;
    let vertices = cull_vertices(particles, model, params.beta);
    let edges = connect_radius(&vertices, params.rho);
    let mut roadmap = Roadmap::from_parts(vertices, edges, params.beta, params.rho, params.edge_resolution)?;
    if !params.lazy {
        roadmap.evaluate_all(model);
    }
    Ok(roadmap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ConstantModel;

    #[test]
    fn collinear_radius() {
        let v = vec![vec![0.0], vec![1.0], vec![3.0]];
        let e = connect_radius(&v, 1.5);
        assert_eq!(e.len(), 1);
        assert_eq!((e[0].i, e[0].j, e[0].length), (0, 1, 1.0));
        assert_eq!(connect_radius(&v, 10.0).len(), 3);
    }

    #[test]
    fn cull_thresholds() {
        let m = ConstantModel { dim: 1, probability: 0.5 };
        let pts = vec![vec![0.0], vec![1.0]];
        assert_eq!(cull_vertices(&pts, &m, 0.45).len(), 2);
        assert!(cull_vertices(&pts, &m, 0.54).is_empty());
        assert_eq!(cull_vertices(&pts, &m, 0.0).len(), 2);
        assert!(cull_vertices(&pts, &m, 1.0).is_empty());
    }

    #[test]
    fn degenerate_edge_checks_one_point() {
        assert_eq!(query_count(0.0, 0.1), 1);
        assert_eq!(query_count(1.0, 0.25), 5);
        let m = ConstantModel { dim: 2, probability: 0.3 };
        let bad = check_edge(&m, &[0.2, 0.2], &[0.2, 0.2], 0.5, 0.1);
        assert_eq!(bad, EdgeCheck::Infeasible { point: vec![0.2, 0.2] });
    }

    #[test]
    fn insert_and_truncate_restore_graph() {
        let v = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let e = connect_radius(&v, 1.2);
        let mut r = Roadmap::from_parts(v, e, 0.5, 1.2, 0.1).unwrap();
        let before = r.clone();
        let s = r.insert_vertex(vec![0.5, 0.0]);
        assert_eq!(r.incident(s).len(), 3);
        r.truncate(3, before.num_edges());
        assert_eq!(r, before);
    }

    #[test]
    fn json_round_trip_rebuilds_adjacency() {
        let v = vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![0.2, 0.0]];
        let e = connect_radius(&v, 0.15);
        let r = Roadmap::from_parts(v, e, 0.5, 0.15, 0.01).unwrap();
        let back: Roadmap = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.incident(1).len(), 2);
    }

    #[test]
    fn invalid_edges_rejected() {
        let v = vec![vec![0.0], vec![1.0]];
        let e = |i, j| Edge { i, j, length: 1.0, status: EdgeStatus::Unevaluated };
        assert!(Roadmap::from_parts(v.clone(), vec![e(1, 1)], 0.5, 2.0, 0.1).is_err());
        assert!(Roadmap::from_parts(v.clone(), vec![e(0, 1), e(0, 1)], 0.5, 2.0, 0.1).is_err());
        assert!(Roadmap::from_parts(v, vec![e(0, 2)], 0.5, 2.0, 0.1).is_err());
    }
}
