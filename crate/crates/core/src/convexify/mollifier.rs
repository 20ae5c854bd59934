//! Standard mollifier φ(u) = C·exp(−1/(1 − ‖u‖²)) on the unit ball and
//! convolution by tensor Gauss–Legendre quadrature.

use crate::special::gauss_legendre;

#[derive(Debug, Clone)]
pub struct Mollifier {
    d: usize,
    delta: f64,
    /// (node, normalised weight) with Σ weight = 1.
    nodes: Vec<(Vec<f64>, f64)>,
    normalizer: f64,
}

fn bump(s2: f64) -> f64 {
    if s2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s2)).exp()
    }
}

impl Mollifier {
    /// `n` nodes per axis, split over two panels [−1, 0] and [0, 1].
    pub fn new(d: usize, delta: f64, n: usize) -> Mollifier {
        assert!(d == 1 || d == 2, "mollifier quadrature supports d <= 2");
        let half = (n / 2).max(1);
        let (x, w) = gauss_legendre(half);
        let mut axis = Vec::with_capacity(2 * half);
        for (xi, wi) in x.iter().zip(&w) {
            axis.push((0.5 * (xi - 1.0), 0.5 * wi));
            axis.push((0.5 * (xi + 1.0), 0.5 * wi));
        }
        let mut nodes: Vec<(Vec<f64>, f64)> = Vec::new();
        if d == 1 {
            for &(u, w) in &axis {
                nodes.push((vec![u], w * bump(u * u)));
            }
        } else {
            for &(u, wu) in &axis {
                for &(v, wv) in &axis {
                    let b = bump(u * u + v * v);
                    if b > 0.0 {
                        nodes.push((vec![u, v], wu * wv * b));
                    }
                }
            }
        }
        nodes.retain(|n| n.1 > 0.0);
        let total: f64 = nodes.iter().map(|n| n.1).sum();
        for n in &mut nodes {
            n.1 /= total;
        }
        Mollifier { d, delta, nodes, normalizer: 1.0 / total }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The constant C making φ integrate to one.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∫ f(x − δu) φ(u) du, summed as f(x) + Σ w (f(x − δu) − f(x)).
    pub fn apply(&self, x: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        let anchor = f(x);
        let mut y = vec![0.0; self.d];
        let mut acc = 0.0;
        for (u, w) in &self.nodes {
            for k in 0..self.d {
                y[k] = x[k] - self.delta * u[k];
            }
            acc += w * (f(&y) - anchor);
        }
        anchor + acc
    }
}
