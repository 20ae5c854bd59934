//! Potentials U (target π ∝ e^{-U}) with their declared structural constants.

mod builtin;
mod checks;

use std::fmt;
use std::sync::Arc;

pub use builtin::Builtin;
pub use checks::{
    check_descent_bound, check_dissipativity, check_growth_on_points, check_mixture_smooth,
    growth_lower_bound, uniform_in_ball, GrowthBound, SampledCheck,
};

use crate::error::{invalid, Result};

/// Value and (sub)gradient of a potential on R^d. Implementations must be pure.
pub trait Potential: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);
}

/// Mixture weak smoothness: ‖∇U(x) − ∇U(y)‖ ≤ Σ L_i ‖x − y‖^{α_i}.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessSpec {
    components: Vec<(f64, f64)>,
}

impl SmoothnessSpec {
    /// `components` are `(L_i, α_i)` with strictly increasing α_i in (0, 1].
    pub fn new(components: Vec<(f64, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(invalid("smoothness spec needs at least one component"));
        }
        for &(l, a) in &components {
            if !(l > 0.0 && l.is_finite()) {
                return Err(invalid(format!("L_i must be positive, got {l}")));
            }
            if !(a > 0.0 && a <= 1.0) {
                return Err(invalid(format!("alpha_i must lie in (0, 1], got {a}")));
            }
        }
        if components.windows(2).any(|w| w[0].1 >= w[1].1) {
            return Err(invalid("alpha_i must be strictly increasing"));
        }
        Ok(SmoothnessSpec { components })
    }

    pub fn single(l: f64, alpha: f64) -> Result<Self> {
        Self::new(vec![(l, alpha)])
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    /// α = α_1, the smallest exponent.
    pub fn alpha(&self) -> f64 {
        self.components[0].1
    }

    /// α_N, the largest exponent.
    pub fn alpha_max(&self) -> f64 {
        self.components[self.components.len() - 1].1
    }

    /// L = max_i L_i.
    pub fn l_max(&self) -> f64 {
        self.components.iter().map(|c| c.0).fold(0.0, f64::max)
    }

    /// L_N, the constant attached to α_N.
    pub fn l_last(&self) -> f64 {
        self.components[self.components.len() - 1].0
    }

    pub fn l_sum(&self) -> f64 {
        self.components.iter().map(|c| c.0).sum()
    }

    /// Σ L_i r^{α_i}.
    pub fn modulus(&self, r: f64) -> f64 {
        self.components.iter().map(|&(l, a)| l * r.powf(a)).sum()
    }

    /// Σ L_i r^{1+α_i} / (1+α_i).
    pub fn descent_term(&self, r: f64) -> f64 {
        self.components.iter().map(|&(l, a)| l * r.powf(1.0 + a) / (1.0 + a)).sum()
    }

    /// Same spec with every L_i multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.components.iter().map(|&(l, a)| (l * s, a)).collect())
    }
}

/// ⟨∇U(x), x⟩ ≥ a‖x‖^β − b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipativitySpec {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
}

impl DissipativitySpec {
    pub fn new(a: f64, b: f64, beta: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(invalid(format!("dissipativity a must be positive, got {a}")));
        }
        if !(b >= 0.0) {
            return Err(invalid(format!("dissipativity b must be nonnegative, got {b}")));
        }
        if !(beta >= 1.0) {
            return Err(invalid(format!("dissipativity beta must be at least 1, got {beta}")));
        }
        Ok(DissipativitySpec { a, b, beta })
    }

    /// R = (2b/a)^{1/β}.
    pub fn radius(&self) -> f64 {
        (2.0 * self.b / self.a).powf(1.0 / self.beta)
    }
}

/// Hessian lower bound μ(1 + ‖x‖²)^{-θ/2} on the region where U is convex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerateConvexity {
    pub mu: f64,
    pub theta: f64,
}

impl DegenerateConvexity {
    pub fn new(mu: f64, theta: f64) -> Result<Self> {
        if !(mu >= 0.0) || !(0.0..=1.0).contains(&theta) {
            return Err(invalid(format!("need mu >= 0 and theta in [0,1], got ({mu}, {theta})")));
        }
        Ok(DegenerateConvexity { mu, theta })
    }
}

#[derive(Clone)]
pub struct PotentialModel {
    name: String,
    potential: Arc<dyn Potential>,
    pub smoothness: SmoothnessSpec,
    pub dissipativity: Option<DissipativitySpec>,
    pub convexity_radius: Option<f64>,
    pub degenerate_convexity: Option<DegenerateConvexity>,
    pub stationary_at_zero: bool,
    /// ln ∫ e^{-U}, when known.
    pub log_normalizer: Option<f64>,
}

impl fmt::Debug for PotentialModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialModel")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("smoothness", &self.smoothness)
            .field("dissipativity", &self.dissipativity)
            .field("convexity_radius", &self.convexity_radius)
            .field("degenerate_convexity", &self.degenerate_convexity)
            .field("stationary_at_zero", &self.stationary_at_zero)
            .finish()
    }
}

impl PotentialModel {
    pub fn new(name: impl Into<String>, potential: Arc<dyn Potential>, smoothness: SmoothnessSpec) -> Self {
        PotentialModel {
            name: name.into(),
            potential,
            smoothness,
            dissipativity: None,
            convexity_radius: None,
            degenerate_convexity: None,
            stationary_at_zero: false,
            log_normalizer: None,
        }
    }

    /// Declare ∇U(0) = 0; fails if the gradient at the origin is not (numerically) zero.
    pub fn stationary(mut self) -> Result<Self> {
        let g = self.gradient_vec(&vec![0.0; self.dim()]);
        let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-10 {
            return Err(invalid(format!("declared stationary at zero but |grad U(0)| = {n:e}")));
        }
        self.stationary_at_zero = true;
        Ok(self)
    }

    pub fn with_dissipativity(mut self, d: DissipativitySpec) -> Self {
        self.dissipativity = Some(d);
        self
    }

    pub fn with_smoothness(mut self, s: SmoothnessSpec) -> Self {
        self.smoothness = s;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.potential.dim()
    }

    pub fn potential(&self) -> &Arc<dyn Potential> {
        &self.potential
    }

    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        self.potential.value(x)
    }

    #[inline]
    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.potential.gradient(x, out)
    }

    pub fn gradient_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.potential.gradient(x, &mut g);
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothness_invariants() {
        assert!(SmoothnessSpec::new(vec![]).is_err());
        assert!(SmoothnessSpec::new(vec![(1.0, 0.5), (1.0, 0.5)]).is_err());
        assert!(SmoothnessSpec::new(vec![(1.0, 1.2)]).is_err());
        assert!(SmoothnessSpec::new(vec![(0.0, 1.0)]).is_err());
        let s = SmoothnessSpec::new(vec![(2.0, 0.5), (3.0, 1.0)]).unwrap();
        assert_eq!(s.n(), 2);
        assert_eq!(s.alpha(), 0.5);
        assert_eq!(s.l_max(), 3.0);
        assert_eq!(s.l_last(), 3.0);
    }

    #[test]
    fn dissipativity_invariants() {
        assert!(DissipativitySpec::new(0.0, 1.0, 2.0).is_err());
        assert!(DissipativitySpec::new(1.0, -1.0, 2.0).is_err());
        assert!(DissipativitySpec::new(1.0, 1.0, 0.5).is_err());
        let d = DissipativitySpec::new(0.5, 1.0, 2.0).unwrap();
        assert!((d.radius() - 2.0).abs() < 1e-15);
    }
}
