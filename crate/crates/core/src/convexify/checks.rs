//! Grid verifications for the convexification constructions.

use super::{BreveU, ConvexifiedPotential};
use crate::error::Result;
use crate::exec::map_indexed;
use crate::potential::{DissipativitySpec, PotentialModel};
use crate::special::composite_rule;

/// Outcome of a pointwise grid check. `worst` is the largest violation
/// (lhs − rhs); the check passes when `worst ≤ tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCheck {
    pub name: &'static str,
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub witness: Vec<f64>,
    pub points: usize,
}

impl GridCheck {
    fn collect(name: &'static str, tolerance: f64, points: &[Vec<f64>], viol: Vec<f64>) -> GridCheck {
        let (mut worst, mut at) = (f64::NEG_INFINITY, 0);
        for (i, v) in viol.iter().enumerate() {
            if *v > worst || v.is_nan() {
                worst = *v;
                at = i;
            }
        }
        let witness = points.get(at).cloned().unwrap_or_default();
        GridCheck { name, worst, tolerance, pass: !points.is_empty() && worst <= tolerance, witness, points: points.len() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationReport {
    pub osc: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Tensor grid over [−w, w]^d with `n` points per axis.
pub fn grid_points(d: usize, half_width: f64, n: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..n).map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1).max(1) as f64).collect();
    match d {
        1 => axis.iter().map(|&x| vec![x]).collect(),
        2 => axis.iter().flat_map(|&x| axis.iter().map(move |&y| vec![x, y])).collect(),
        _ => panic!("grid_points supports d <= 2"),
    }
}

fn directions(d: usize) -> Vec<Vec<f64>> {
    if d == 1 {
        vec![vec![1.0]]
    } else {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![s, s], vec![s, -s]]
    }
}

/// Smallest directional second difference of `f` at `x`, step 1e−4·max(1, ‖x‖).
fn min_second_difference(f: &(dyn Fn(&[f64]) -> f64 + Sync), x: &[f64]) -> f64 {
    let h = 1e-4 * x.iter().map(|t| t * t).sum::<f64>().sqrt().max(1.0);
    let f0 = f(x);
    let mut worst = f64::INFINITY;
    for v in directions(x.len()) {
        let up: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + h * b).collect();
        let dn: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - h * b).collect();
        worst = worst.min((f(&up) - 2.0 * f0 + f(&dn)) / (h * h));
    }
    worst
}

/// Finite-difference convexity: every directional second difference ≥ −tol.
pub fn check_convexity(f: &(dyn Fn(&[f64]) -> f64 + Sync), points: &[Vec<f64>], tol: f64) -> GridCheck {
    let viol = map_indexed(points.len(), |i| -min_second_difference(f, &points[i]));
    GridCheck::collect("convexity", tol, points, viol)
}

/// Û has curvature ≥ (1−θ)(μ/2)(1+‖x‖²)^{−θ/2} − tol in every direction.
pub fn check_curvature_floor(cp: &ConvexifiedPotential, points: &[Vec<f64>], tol: f64) -> GridCheck {
    let (mu, th) = (cp.params().mu_strong, cp.params().theta);
    let f = |x: &[f64]| cp.hat_u(x);
    let viol = map_indexed(points.len(), |i| {
        let x = &points[i];
        let floor = (1.0 - th) * (mu / 2.0) * (1.0 + x.iter().map(|t| t * t).sum::<f64>()).powf(-th / 2.0);
        floor - min_second_difference(&f, x)
    });
    GridCheck::collect("curvature_floor", tol, points, viol)
}

fn ball_grid(d: usize, radius: f64, n: usize) -> Vec<Vec<f64>> {
    grid_points(d, radius, n).into_iter().filter(|x| x.iter().map(|t| t * t).sum::<f64>() <= radius * radius).collect()
}

fn oscillation(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// sup − inf of Û − U over a grid on the ball of radius R+3ε.
pub fn verify_oscillation(cp: &ConvexifiedPotential, n: usize) -> OscillationReport {
    let p = cp.params();
    let pts = ball_grid(cp.dim(), p.r + 3.0 * p.eps, n);
    let vals = map_indexed(pts.len(), |i| cp.hat_u(&pts[i]) - cp.base().value(&pts[i]));
    let osc = oscillation(&vals);
    let bound = cp.oscillation_bound();
    OscillationReport { osc, bound, pass: osc <= bound + 1e-6 }
}

/// sup − inf of Ŭ − U over the same kind of grid, against the recorded bound.
pub fn verify_breve_oscillation(b: &BreveU, n: usize) -> OscillationReport {
    let p = b.hat().params();
    let pts = ball_grid(b.original().dim(), p.r + 3.0 * p.eps, n);
    let vals = map_indexed(pts.len(), |i| b.value(&pts[i]) - b.original().value(&pts[i]));
    let osc = oscillation(&vals);
    let bound = b.oscillation_bound();
    OscillationReport { osc, bound, pass: osc <= bound + 1e-6 }
}

/// Ŭ = U bit-for-bit at every grid point outside R+2ε+δ.
pub fn check_exterior_agreement(b: &BreveU, points: &[Vec<f64>]) -> GridCheck {
    let p = b.hat().params();
    let cut = p.r + 2.0 * p.eps + p.delta;
    let outside: Vec<Vec<f64>> = points.iter().filter(|x| x.iter().map(|t| t * t).sum::<f64>().sqrt() > cut).cloned().collect();
    let viol = map_indexed(outside.len(), |i| (b.value(&outside[i]) - b.original().value(&outside[i])).abs());
    GridCheck::collect("exterior_agreement", 0.0, &outside, viol)
}

/// 𝓛W/W ≤ −(a²/4)‖x‖² + (a/2)(b + (L_N+λ₀/2)R² + aR² + d) for W = e^{(a/4)‖x‖²}.
pub fn lyapunov_check(model: &PotentialModel, diss: &DissipativitySpec, r: f64, lambda0: f64, points: &[Vec<f64>]) -> GridCheck {
    let a = diss.a;
    let a1 = a / 4.0;
    let d = model.dim() as f64;
    let shift = diss.b + (model.smoothness.l_last() + lambda0 / 2.0) * r * r + a * r * r;
    let viol = map_indexed(points.len(), |i| {
        let x = &points[i];
        let g = model.gradient_vec(x);
        let r2: f64 = x.iter().map(|t| t * t).sum();
        let inner: f64 = g.iter().zip(x).map(|(u, v)| u * v).sum();
        let lw = 2.0 * a1 * d + 4.0 * a1 * a1 * r2 - 2.0 * a1 * inner;
        lw - (-(a * a / 4.0) * r2 + (a / 2.0) * (shift + d))
    });
    GridCheck::collect("lyapunov", 1e-8, points, viol)
}

/// ⟨∇Ŭ(x), x⟩ ≥ a‖x‖² − (b + (L_N+λ₀/2)R² + aR²).
pub fn breve_dissipativity_check(b: &std::sync::Arc<BreveU>, diss: &DissipativitySpec, points: &[Vec<f64>]) -> Result<GridCheck> {
    let inherited = b.dissipativity(diss)?;
    let model = b.model();
    let viol = map_indexed(points.len(), |i| {
        let x = &points[i];
        let g = model.gradient_vec(x);
        let r2: f64 = x.iter().map(|t| t * t).sum();
        let inner: f64 = g.iter().zip(x).map(|(u, v)| u * v).sum();
        inherited.a * r2 - inherited.b - inner
    });
    Ok(GridCheck::collect("breve_dissipativity", 1e-6, points, viol))
}

fn panels_between(breaks: &[f64], width: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (mut xs, mut ws) = (Vec::new(), Vec::new());
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let k = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
        let (x, wt) = composite_rule(w[0], w[1], k, n);
        xs.extend(x);
        ws.extend(wt);
    }
    (xs, ws)
}

/// ∫‖x‖²e^{−f} / ∫e^{−f} in d ≤ 2. `breaks` are radii where f changes
/// definition; the outer radius grows until the tail is negligible.
pub fn second_moment(f: &(dyn Fn(&[f64]) -> f64 + Sync), d: usize, breaks: &[f64]) -> f64 {
    assert!(d == 1 || d == 2, "second_moment supports d <= 2");
    let f0 = f(&vec![0.0; d]);
    let mut outer = breaks.iter().cloned().fold(1.0, f64::max) + 1.0;
    for _ in 0..60 {
        let ok = (0..16).all(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 16.0;
            let x: Vec<f64> = if d == 1 { vec![if k % 2 == 0 { outer } else { -outer }] } else { vec![outer * t.cos(), outer * t.sin()] };
            f(&x) - f0 > 90.0 + (d as f64 + 2.0) * outer.ln().max(0.0)
        });
        if ok {
            break;
        }
        outer *= 1.25;
    }
    let mut radii: Vec<f64> = breaks.iter().cloned().filter(|&b| b > 0.0 && b < outer).collect();
    radii.push(0.0);
    radii.push(outer);
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (rs, wr) = panels_between(&radii, 0.125, 16);
    let (mut num, mut den) = (0.0, 0.0);
    if d == 1 {
        for sign in [-1.0, 1.0] {
            let vals = map_indexed(rs.len(), |i| f(&[sign * rs[i]]));
            for ((r, w), v) in rs.iter().zip(&wr).zip(vals) {
                let e = w * (f0 - v).exp();
                num += e * r * r;
                den += e;
            }
        }
    } else {
        let nt = 256;
        let vals = map_indexed(rs.len(), |i| {
            let mut s = 0.0;
            for k in 0..nt {
                let t = 2.0 * std::f64::consts::PI * k as f64 / nt as f64;
                s += (f0 - f(&[rs[i] * t.cos(), rs[i] * t.sin()])).exp();
            }
            s * 2.0 * std::f64::consts::PI / nt as f64
        });
        for ((r, w), v) in rs.iter().zip(&wr).zip(vals) {
            num += w * r * v * r * r;
            den += w * r * v;
        }
    }
    num / den
}
