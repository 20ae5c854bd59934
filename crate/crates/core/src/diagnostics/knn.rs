//! k-nearest-neighbour distances through a static kd-tree.

use crate::batch::SampleBatch;

struct Node {
    lo: usize,
    hi: usize,
    axis: usize,
    split: f64,
    left: Option<Box<Node>>,
    right: Option<Box<Node>>,
}

const LEAF: usize = 16;

pub struct KdTree<'a> {
    pts: &'a SampleBatch,
    order: Vec<usize>,
    root: Node,
}

impl<'a> KdTree<'a> {
    pub fn new(pts: &'a SampleBatch) -> Self {
        let mut order: Vec<usize> = (0..pts.len()).collect();
        let root = build(pts, &mut order, 0, pts.len(), 0);
        KdTree { pts, order, root }
    }

    /// Distance from row `i` to its k-th nearest other row.
    pub fn kth_distance(&self, i: usize, k: usize) -> f64 {
        let q = self.pts.row(i);
        let mut best: Vec<f64> = Vec::with_capacity(k + 1);
        self.search(&self.root, q, i, k, &mut best);
        best.last().copied().unwrap_or(f64::INFINITY).sqrt()
    }

    fn search(&self, node: &Node, q: &[f64], skip: usize, k: usize, best: &mut Vec<f64>) {
        if node.left.is_none() {
            for &j in &self.order[node.lo..node.hi] {
                if j == skip {
                    continue;
                }
                let d2: f64 = self.pts.row(j).iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                if best.len() < k || d2 < best[best.len() - 1] {
                    let pos = best.partition_point(|&v| v <= d2);
                    best.insert(pos, d2);
                    best.truncate(k);
                }
            }
            return;
        }
        let diff = q[node.axis] - node.split;
        let (near, far) = if diff <= 0.0 { (node.left.as_ref(), node.right.as_ref()) } else { (node.right.as_ref(), node.left.as_ref()) };
        if let Some(n) = near {
            self.search(n, q, skip, k, best);
        }
        if best.len() < k || diff * diff < best[best.len() - 1] {
            if let Some(f) = far {
                self.search(f, q, skip, k, best);
            }
        }
    }
}

fn build(pts: &SampleBatch, order: &mut [usize], lo: usize, hi: usize, depth: usize) -> Node {
    let d = pts.dim();
    if hi - lo <= LEAF {
        return Node { lo, hi, axis: 0, split: 0.0, left: None, right: None };
    }
    // split along the widest axis
    let mut axis = depth % d;
    let mut width = -1.0;
    for a in 0..d {
        let (mn, mx) = order[lo..hi].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), &j| (mn.min(pts.row(j)[a]), mx.max(pts.row(j)[a])));
        if mx - mn > width {
            width = mx - mn;
            axis = a;
        }
    }
    let mid = (lo + hi) / 2;
    order[lo..hi].select_nth_unstable_by(mid - lo, |&x, &y| pts.row(x)[axis].total_cmp(&pts.row(y)[axis]));
    let split = pts.row(order[mid])[axis];
    let left = build(pts, order, lo, mid, depth + 1);
    let right = build(pts, order, mid, hi, depth + 1);
    Node { lo, hi, axis, split, left: Some(Box::new(left)), right: Some(Box::new(right)) }
}
