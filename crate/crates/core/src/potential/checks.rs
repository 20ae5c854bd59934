//! Sampled checkers for the structural assumptions. Each reports the worst
//! violation found and the point(s) that witnessed it.

use rand::Rng;
use rand_distr::StandardNormal;

use super::PotentialModel;
use crate::error::{Error, Result};

pub const CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SampledCheck {
    pub name: &'static str,
    /// Largest observed `lhs - rhs`; the assumption holds when this is ≤ 0.
    pub max_violation: f64,
    pub pass: bool,
    pub witness: Vec<Vec<f64>>,
    pub samples: usize,
}

impl SampledCheck {
    fn new(name: &'static str) -> Self {
        SampledCheck { name, max_violation: f64::NEG_INFINITY, pass: true, witness: Vec::new(), samples: 0 }
    }

    fn record(&mut self, v: f64, pts: &[&[f64]]) {
        self.samples += 1;
        if v > self.max_violation || v.is_nan() {
            self.max_violation = v;
            self.witness = pts.iter().map(|p| p.to_vec()).collect();
        }
    }

    fn finish(mut self) -> Self {
        self.pass = self.max_violation <= CHECK_TOL;
        self
    }
}

/// Uniform point in the d-ball of the given radius.
pub fn uniform_in_ball<R: Rng + ?Sized>(d: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if n == 0.0 {
            continue;
        }
        let u: f64 = rng.random();
        let s = radius * u.powf(1.0 / d as f64) / n;
        return v.into_iter().map(|t| t * s).collect();
    }
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// ‖∇U(x) − ∇U(y)‖ ≤ Σ L_i‖x − y‖^{α_i} on random pairs in the ball.
pub fn check_mixture_smooth<R: Rng + ?Sized>(model: &PotentialModel, n_pairs: usize, radius: f64, rng: &mut R) -> SampledCheck {
    let d = model.dim();
    let mut c = SampledCheck::new("mixture_smooth");
    let (mut gx, mut gy) = (vec![0.0; d], vec![0.0; d]);
    for _ in 0..n_pairs {
        let x = uniform_in_ball(d, radius, rng);
        let y = uniform_in_ball(d, radius, rng);
        model.gradient(&x, &mut gx);
        model.gradient(&y, &mut gy);
        let lhs = dist(&gx, &gy);
        let rhs = model.smoothness.modulus(dist(&x, &y));
        c.record(lhs - rhs, &[&x, &y]);
    }
    c.finish()
}

/// U(y) ≤ U(x) + ⟨∇U(x), y − x⟩ + Σ L_i‖y − x‖^{1+α_i}/(1+α_i).
pub fn check_descent_bound<R: Rng + ?Sized>(model: &PotentialModel, n_pairs: usize, radius: f64, rng: &mut R) -> SampledCheck {
    let d = model.dim();
    let mut c = SampledCheck::new("descent_bound");
    let mut gx = vec![0.0; d];
    for _ in 0..n_pairs {
        let x = uniform_in_ball(d, radius, rng);
        let y = uniform_in_ball(d, radius, rng);
        model.gradient(&x, &mut gx);
        let lin: f64 = gx.iter().zip(y.iter().zip(&x)).map(|(g, (b, a))| g * (b - a)).sum();
        let lhs = model.value(&y);
        let rhs = model.value(&x) + lin + model.smoothness.descent_term(dist(&x, &y));
        c.record(lhs - rhs, &[&x, &y]);
    }
    c.finish()
}

/// ⟨∇U(x), x⟩ ≥ a‖x‖^β − b at random points in the ball.
pub fn check_dissipativity<R: Rng + ?Sized>(model: &PotentialModel, n_points: usize, radius: f64, rng: &mut R) -> Result<SampledCheck> {
    let diss = model
        .dissipativity
        .ok_or_else(|| Error::Configuration(format!("{} declares no dissipativity", model.name())))?;
    let d = model.dim();
    let mut c = SampledCheck::new("dissipativity");
    let mut g = vec![0.0; d];
    for _ in 0..n_points {
        let x = uniform_in_ball(d, radius, rng);
        model.gradient(&x, &mut g);
        let ip: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
        let r = x.iter().map(|t| t * t).sum::<f64>().sqrt();
        c.record(-(ip - diss.a * r.powf(diss.beta) + diss.b), &[&x]);
    }
    Ok(c.finish())
}

/// U(x) ≥ (a/2β)‖x‖^β + U(0) − Σ L_i R^{1+α_i}/(1+α_i) − b, R = (2b/a)^{1/β}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBound {
    pub a: f64,
    pub beta: f64,
    /// Everything not depending on x.
    pub offset: f64,
}

impl GrowthBound {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|t| t * t).sum::<f64>().sqrt();
        self.a / (2.0 * self.beta) * r.powf(self.beta) + self.offset
    }
}

pub fn growth_lower_bound(model: &PotentialModel) -> Result<GrowthBound> {
    let diss = model
        .dissipativity
        .ok_or_else(|| Error::Configuration(format!("{} declares no dissipativity", model.name())))?;
    if !model.stationary_at_zero {
        return Err(Error::Configuration(format!("{} is not declared stationary at zero", model.name())));
    }
    let r = diss.radius();
    let u0 = model.value(&vec![0.0; model.dim()]);
    let offset = u0 - model.smoothness.descent_term(r) - diss.b;
    Ok(GrowthBound { a: diss.a, beta: diss.beta, offset })
}

/// U(x) ≥ bound(x) at every supplied point.
pub fn check_growth_on_points<'a>(model: &PotentialModel, points: impl IntoIterator<Item = &'a [f64]>) -> Result<SampledCheck> {
    let b = growth_lower_bound(model)?;
    let mut c = SampledCheck::new("growth_lower_bound");
    for x in points {
        c.record(b.eval(x) - model.value(x), &[x]);
    }
    Ok(c.finish())
}
