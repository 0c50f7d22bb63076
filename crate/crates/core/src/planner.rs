//! Lazy shortest-path search over a roadmap.
//!
//! The lazy planner treats unevaluated edges as traversable, checks the
//! edges of each candidate path from the start forward, and searches again
//! after every failure. The eager planner resolves every edge first and
//! serves as the reference.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, Config};
use crate::models::FeasibilityModel;
use crate::roadmap::{check_edge, EdgeStatus, Roadmap};

/// Decides whether the straight segment `a -> b` is traversable.
pub trait EdgeEvaluator {
    fn evaluate(&mut self, a: &[f64], b: &[f64]) -> bool;
}

impl<F: FnMut(&[f64], &[f64]) -> bool> EdgeEvaluator for F {
    fn evaluate(&mut self, a: &[f64], b: &[f64]) -> bool {
        self(a, b)
    }
}

/// Edge evaluation by the chance constraint on equally spaced points.
pub struct ChanceConstraint<'a> {
    pub model: &'a dyn FeasibilityModel,
    pub beta: f64,
    pub resolution: f64,
}

impl EdgeEvaluator for ChanceConstraint<'_> {
    fn evaluate(&mut self, a: &[f64], b: &[f64]) -> bool {
        check_edge(self.model, a, b, self.beta, self.resolution).is_feasible()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanQuery {
    pub start: Config,
    pub goal: Config,
    pub beta: f64,
    #[serde(default)]
    pub max_edge_evals: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannerOptions {
    /// Guide the inner search with the Euclidean distance to the goal.
    pub astar: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    Solved,
    Infeasible,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub status: PlanStatus,
    pub path: Vec<Config>,
    pub cost: f64,
    pub edges_evaluated: usize,
    pub searches: usize,
}

impl PlanResult {
    pub fn solved(&self) -> bool {
        self.status == PlanStatus::Solved
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::parse(path, e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Result of a search between two roadmap vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexPath {
    pub status: PlanStatus,
    pub vertices: Vec<usize>,
    pub cost: f64,
    pub edges_evaluated: usize,
    pub searches: usize,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    key: f64,
    vertex: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // min-heap on (key, vertex)
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.total_cmp(&self.key).then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest path over edges that are not known infeasible. Returns the
/// vertex sequence and the edge indices along it.
fn shortest_path(
    roadmap: &Roadmap,
    source: usize,
    target: usize,
    astar: bool,
) -> Option<(Vec<usize>, Vec<usize>, f64)> {
    let n = roadmap.num_vertices();
    let goal = &roadmap.vertices()[target];
    let heuristic = |v: usize| if astar { dist(&roadmap.vertices()[v], goal) } else { 0.0 };
    let mut cost = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    cost[source] = 0.0;
    heap.push(Entry { key: heuristic(source), vertex: source });
    while let Some(Entry { vertex: u, .. }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if u == target {
            break;
        }
        for &k in roadmap.incident(u) {
            let e = &roadmap.edges()[k];
            if e.status == EdgeStatus::Infeasible {
                continue;
            }
            let v = e.other(u);
            if done[v] {
                continue;
            }
            let c = cost[u] + e.length;
            let better = match parent[v] {
                None => true,
                Some((p, _)) => c < cost[v] || (c == cost[v] && u < p),
            };
            if better {
                cost[v] = c;
                parent[v] = Some((u, k));
                heap.push(Entry { key: c + heuristic(v), vertex: v });
            }
        }
    }
    if !done[target] {
        return None;
    }
    let mut verts = vec![target];
    let mut edges = Vec::new();
    let mut v = target;
    while let Some((p, k)) = parent[v] {
        verts.push(p);
        edges.push(k);
        v = p;
    }
    verts.reverse();
    edges.reverse();
    Some((verts, edges, cost[target]))
}

fn path_cost(roadmap: &Roadmap, edges: &[usize]) -> f64 {
    edges.iter().map(|&k| roadmap.edges()[k].length).sum()
}

/// LazySP between two vertices with the forward edge selector.
pub fn lazy_search(
    roadmap: &mut Roadmap,
    source: usize,
    target: usize,
    evaluator: &mut dyn EdgeEvaluator,
    max_edge_evals: Option<usize>,
    opts: PlannerOptions,
) -> VertexPath {
    let mut evaluated = 0;
    let mut searches = 0;
    loop {
        searches += 1;
        let Some((verts, edges, _)) = shortest_path(roadmap, source, target, opts.astar) else {
            return VertexPath {
                status: PlanStatus::Infeasible,
                vertices: Vec::new(),
                cost: f64::INFINITY,
                edges_evaluated: evaluated,
                searches,
            };
        };
        let mut blocked = false;
        for &k in &edges {
            if roadmap.edges()[k].status != EdgeStatus::Unevaluated {
                continue;
            }
            if max_edge_evals.is_some_and(|m| evaluated >= m) {
                return VertexPath {
                    status: PlanStatus::BudgetExhausted,
                    vertices: Vec::new(),
                    cost: f64::INFINITY,
                    edges_evaluated: evaluated,
                    searches,
                };
            }
            let e = &roadmap.edges()[k];
            let ok = evaluator.evaluate(&roadmap.vertices()[e.i], &roadmap.vertices()[e.j]);
            evaluated += 1;
            roadmap.set_status(k, if ok { EdgeStatus::Feasible } else { EdgeStatus::Infeasible });
            if !ok {
                blocked = true;
                break;
            }
        }
        if !blocked {
            return VertexPath {
                status: PlanStatus::Solved,
                cost: path_cost(roadmap, &edges),
                vertices: verts,
                edges_evaluated: evaluated,
                searches,
            };
        }
    }
}

/// Evaluates every unresolved edge, then runs one search.
pub fn eager_search(
    roadmap: &mut Roadmap,
    source: usize,
    target: usize,
    evaluator: &mut dyn EdgeEvaluator,
    opts: PlannerOptions,
) -> VertexPath {
    let mut evaluated = 0;
    for k in 0..roadmap.num_edges() {
        if roadmap.edges()[k].status == EdgeStatus::Unevaluated {
            let e = &roadmap.edges()[k];
            let ok = evaluator.evaluate(&roadmap.vertices()[e.i], &roadmap.vertices()[e.j]);
            evaluated += 1;
            roadmap.set_status(k, if ok { EdgeStatus::Feasible } else { EdgeStatus::Infeasible });
        }
    }
    match shortest_path(roadmap, source, target, opts.astar) {
        Some((verts, edges, _)) => VertexPath {
            status: PlanStatus::Solved,
            cost: path_cost(roadmap, &edges),
            vertices: verts,
            edges_evaluated: evaluated,
            searches: 1,
        },
        None => VertexPath {
            status: PlanStatus::Infeasible,
            vertices: Vec::new(),
            cost: f64::INFINITY,
            edges_evaluated: evaluated,
            searches: 1,
        },
    }
}

fn check_query(model: &dyn FeasibilityModel, query: &PlanQuery) -> Result<()> {
    if query.start.len() != model.dim() || query.goal.len() != model.dim() {
        return Err(Error::Roadmap("query dimension does not match the model".into()));
    }
    for (which, x) in [("start", &query.start), ("goal", &query.goal)] {
        let probability = model.probability(x);
        if !(probability >= query.beta) {
            return Err(Error::QueryRejected { which, probability, beta: query.beta });
        }
    }
    Ok(())
}

enum Mode {
    Lazy,
    Eager,
}

fn plan(
    roadmap: &mut Roadmap,
    model: &dyn FeasibilityModel,
    query: &PlanQuery,
    opts: PlannerOptions,
    mode: Mode,
) -> Result<PlanResult> {
    check_query(model, query)?;
    let (nv, ne) = (roadmap.num_vertices(), roadmap.num_edges());
    let s = roadmap.insert_vertex(query.start.clone());
    let g = roadmap.insert_vertex(query.goal.clone());
    let mut eval = ChanceConstraint { model, beta: query.beta, resolution: roadmap.edge_resolution };
    let found = match mode {
        Mode::Lazy => lazy_search(roadmap, s, g, &mut eval, query.max_edge_evals, opts),
        Mode::Eager => eager_search(roadmap, s, g, &mut eval, opts),
    };
    let path = found.vertices.iter().map(|&v| roadmap.vertices()[v].clone()).collect();
    roadmap.truncate(nv, ne);
    Ok(PlanResult {
        status: found.status,
        path,
        cost: found.cost,
        edges_evaluated: found.edges_evaluated,
        searches: found.searches,
    })
}

/// Connects start and goal within `rho` and runs LazySP. Edge statuses
/// learned on the roadmap itself persist for later queries.
pub fn plan_lazy(
    roadmap: &mut Roadmap,
    model: &dyn FeasibilityModel,
    query: &PlanQuery,
    opts: PlannerOptions,
) -> Result<PlanResult> {
    plan(roadmap, model, query, opts, Mode::Lazy)
}

/// Evaluates all edges of the augmented graph and runs one search.
pub fn plan_eager(
    roadmap: &mut Roadmap,
    model: &dyn FeasibilityModel,
    query: &PlanQuery,
    opts: PlannerOptions,
) -> Result<PlanResult> {
    plan(roadmap, model, query, opts, Mode::Eager)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roadmap::Edge;

    fn square() -> Roadmap {
        // 0 -1- 1 -1- 2, 0 -10- 3 -1- 2 (lengths are stored, not derived)
        let v = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0], vec![1.0, 5.0]];
        let e = |i, j, length| Edge { i, j, length, status: EdgeStatus::Unevaluated };
        Roadmap::from_parts(v, vec![e(0, 1, 1.0), e(1, 2, 1.0), e(2, 3, 1.0), e(0, 3, 10.0)], 0.5, 100.0, 0.1).unwrap()
    }

    #[test]
    fn four_cycle_detour() {
        let mut r = square();
        let mut calls = Vec::new();
        let mut eval = |a: &[f64], b: &[f64]| {
            calls.push((a.to_vec(), b.to_vec()));
            !(a == [1.0, 0.0] && b == [2.0, 0.0])
        };
        let out = lazy_search(&mut r, 0, 2, &mut eval, None, PlannerOptions::default());
        assert_eq!(out.status, PlanStatus::Solved);
        assert_eq!(out.vertices, vec![0, 3, 2]);
        assert_eq!(out.cost, 11.0);
        assert_eq!(out.edges_evaluated, 4);
        assert_eq!(calls[0].1, vec![1.0, 0.0]);
    }

    #[test]
    fn all_feasible_single_search() {
        let mut r = square();
        for k in 0..r.num_edges() {
            r.set_status(k, EdgeStatus::Feasible);
        }
        let mut eval = |_: &[f64], _: &[f64]| -> bool { panic!("no evaluation expected") };
        let out = lazy_search(&mut r, 0, 2, &mut eval, None, PlannerOptions::default());
        assert_eq!((out.searches, out.edges_evaluated, out.cost), (1, 0, 2.0));
    }

    #[test]
    fn disconnected_and_budget() {
        let mut r = square();
        let mut never = |_: &[f64], _: &[f64]| false;
        let out = lazy_search(&mut r, 0, 2, &mut never, None, PlannerOptions::default());
        assert_eq!(out.status, PlanStatus::Infeasible);
        let mut r = square();
        let mut always = |_: &[f64], _: &[f64]| true;
        let out = lazy_search(&mut r, 0, 2, &mut always, Some(1), PlannerOptions::default());
        assert_eq!(out.status, PlanStatus::BudgetExhausted);
    }

    #[test]
    fn tie_break_prefers_low_index() {
        // two equal paths 0-1-3 and 0-2-3
        let v = vec![vec![0.0], vec![1.0], vec![1.0], vec![2.0]];
        let e = |i, j| Edge { i, j, length: 1.0, status: EdgeStatus::Feasible };
        let mut r = Roadmap::from_parts(v, vec![e(0, 2), e(2, 3), e(0, 1), e(1, 3)], 0.5, 2.0, 0.1).unwrap();
        let mut eval = |_: &[f64], _: &[f64]| true;
        let out = eager_search(&mut r, 0, 3, &mut eval, PlannerOptions::default());
        assert_eq!(out.vertices, vec![0, 1, 3]);
    }
}
