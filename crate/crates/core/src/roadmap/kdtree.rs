//! Static k-d tree for fixed-radius neighbor queries.

use crate::geometry::dist;

#[derive(Clone, Debug)]
enum Node {
    Leaf(Vec<usize>),
    Split { axis: usize, value: f64, left: Box<Node>, right: Box<Node> },
}

const LEAF_SIZE: usize = 8;

/// Indexes a borrowed point set. Points on the splitting plane go left.
#[derive(Clone, Debug)]
pub struct KdTree<'a> {
    points: &'a [Vec<f64>],
    root: Node,
}

impl<'a> KdTree<'a> {
    pub fn new(points: &'a [Vec<f64>]) -> Self {
        let idx: Vec<usize> = (0..points.len()).collect();
        let root = build(points, idx);
        KdTree { points, root }
    }

    /// Indices `j` with `dist(points[j], q) < radius`, ascending.
    pub fn within(&self, q: &[f64], radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit(&self.root, q, radius, &mut out);
        out.sort_unstable();
        out
    }

    fn visit(&self, node: &Node, q: &[f64], radius: f64, out: &mut Vec<usize>) {
        match node {
            Node::Leaf(idx) => out.extend(idx.iter().copied().filter(|&j| dist(&self.points[j], q) < radius)),
            Node::Split { axis, value, left, right } => {
                let diff = q[*axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.visit(near, q, radius, out);
                if diff.abs() < radius {
                    self.visit(far, q, radius, out);
                }
            }
        }
    }
}

fn build(points: &[Vec<f64>], mut idx: Vec<usize>) -> Node {
    if idx.len() <= LEAF_SIZE {
        return Node::Leaf(idx);
    }
    let dim = points[idx[0]].len();
    // widest axis
    let axis = (0..dim)
        .map(|a| {
            let (lo, hi) = idx
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(points[i][a]), hi.max(points[i][a])));
            (a, hi - lo)
        })
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0;
    idx.sort_by(|&a, &b| points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b)));
    let mid = idx.len() / 2;
    let value = points[idx[mid - 1]][axis];
    // keep every point equal to the split value on the left
    let cut = idx.partition_point(|&i| points[i][axis] <= value);
    if cut == idx.len() {
        return Node::Leaf(idx);
    }
    let right = idx.split_off(cut);
    Node::Split { axis, value, left: Box::new(build(points, idx)), right: Box::new(build(points, right)) }
}
