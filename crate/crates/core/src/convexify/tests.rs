use std::sync::Arc;

use super::*;
use crate::potential::Builtin;
use crate::potential::SmoothnessSpec;

struct Fun(usize, fn(&[f64]) -> f64);

impl Potential for Fun {
    fn dim(&self) -> usize {
        self.0
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.1)(x)
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let h = 1e-6;
        let mut y = x.to_vec();
        for k in 0..x.len() {
            y[k] = x[k] + h;
            let up = (self.1)(&y);
            y[k] = x[k] - h;
            out[k] = (up - (self.1)(&y)) / (2.0 * h);
            y[k] = x[k];
        }
    }
}

fn model(d: usize, f: fn(&[f64]) -> f64) -> PotentialModel {
    PotentialModel::new("test", Arc::new(Fun(d, f)), SmoothnessSpec::single(1.0, 1.0).unwrap())
}

fn cosine(d: usize) -> PotentialModel {
    Builtin::parse("cosine_perturbed_quadratic", "").unwrap().build(d).unwrap()
}

#[test]
fn chord_in_one_dimension() {
    let m = model(1, |x| (x[0] + 1.0) / 2.0);
    let cp = build_hat_u(&m, ConvexifyParams::new(1.0, 0.0, 0.0)).unwrap();
    for &x in &[-1.0, -0.3, 0.0, 0.8, 1.0] {
        assert!((cp.convex_extension_v(&[x]).unwrap() - (x + 1.0) / 2.0).abs() < 1e-15);
    }
    let even = build_hat_u(&cosine(1), ConvexifyParams::new(3.0, 0.0, 0.0)).unwrap();
    let edge = even.u_tilde(&[3.0]);
    assert!((even.convex_extension_v(&[1.1]).unwrap() - edge).abs() < 1e-14);
    assert!(matches!(even.convex_extension_v(&[3.5]), Err(Error::Domain(_))));
}

#[test]
fn flat_boundary_in_two_dimensions() {
    let m = model(2, |x| x[0] * x[0] + x[1] * x[1]);
    let cp = build_hat_u(&m, ConvexifyParams::new(1.5, 0.0, 0.0)).unwrap();
    for x in [[0.0, 0.0], [0.7, -0.2], [-1.4, 0.3]] {
        assert!((cp.convex_extension_v(&x).unwrap() - 2.25).abs() < 1e-10);
    }
}

#[test]
fn mollifier_preserves_constants_and_lines() {
    let m = model(1, |x| 2.0 * x[0] + 1.0);
    let cp = build_hat_u(&m, ConvexifyParams::new(2.0, 0.0, 0.0)).unwrap();
    assert!((cp.mollified_v(&[0.4]) - 1.8).abs() < 1e-8);
    let c = model(2, |_| 3.0);
    let cp = build_hat_u(&c, ConvexifyParams::new(1.0, 0.0, 0.0)).unwrap();
    assert!((cp.mollified_v(&[0.2, 0.9]) - 3.0).abs() < 1e-8);
}

#[test]
fn delta_must_be_small_against_eps() {
    let mut p = ConvexifyParams::new(1.0, 0.0, 0.0);
    p.delta = p.eps / 5.0;
    assert!(build_hat_u(&cosine(1), p).is_err());
}

#[test]
fn continuity_across_inner_shell_edge() {
    let cp = build_hat_u(&cosine(1), ConvexifyParams::new(3.0, 0.0, 0.5)).unwrap();
    let r = 3.0 + cp.params().eps;
    for s in [-1.0, 1.0] {
        let a = cp.hat_u(&[s * (r - 1e-9)]);
        let b = cp.hat_u(&[s * (r + 1e-9)]);
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn cosine_hat_is_convex_in_one_dimension() {
    let cp = build_hat_u(&cosine(1), ConvexifyParams::new(3.0, 0.0, 0.5)).unwrap();
    let w = 3.0 + 3.0 * cp.params().eps;
    let pts = grid_points(1, w, 2001);
    let f = |x: &[f64]| cp.hat_minus_g(x);
    let c = check_convexity(&f, &pts, 1e-6);
    assert!(c.pass, "{c:?}");
    assert!(check_curvature_floor(&cp, &pts, 1e-6).pass);
    let osc = verify_oscillation(&cp, 2001);
    assert!(osc.pass && osc.osc > 0.0, "{osc:?}");
}

#[test]
fn breve_agrees_with_u_outside() {
    let g = Builtin::Gaussian.build(1).unwrap();
    let b = build_breve_u(&g, 1.0, 0.05, 0.0025, 360).unwrap();
    let pts = grid_points(1, 4.0, 801);
    let agree = check_exterior_agreement(&b, &pts);
    assert!(agree.pass && agree.worst == 0.0);
    assert!(verify_breve_oscillation(&b, 2001).pass);
    let holder = Builtin::parse("holder", "alpha=0.5").unwrap().build(1).unwrap();
    assert!(matches!(build_breve_u(&holder, 1.0, 0.05, 0.0025, 360), Err(Error::UnsupportedRegime(_))));
}

#[test]
fn gaussian_second_moment() {
    let g = Builtin::Gaussian.build(1).unwrap();
    let f = |x: &[f64]| g.value(x);
    assert!((second_moment(&f, 1, &[]) - 1.0).abs() < 1e-6);
    let g2 = Builtin::Gaussian.build(2).unwrap();
    let f2 = |x: &[f64]| g2.value(x);
    assert!((second_moment(&f2, 2, &[1.0]) - 2.0).abs() < 1e-6);
}

#[test]
fn gaussian_lyapunov() {
    let g = Builtin::Gaussian.build(1).unwrap();
    let diss = g.dissipativity.unwrap();
    let pts = grid_points(1, 10.0, 201);
    let c = lyapunov_check(&g, &diss, 1.0, 2.0, &pts);
    assert!(c.pass && c.worst < 0.0, "{c:?}");
}
