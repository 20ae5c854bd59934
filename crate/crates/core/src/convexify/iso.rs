//! Isoperimetric constants of the dissipative regimes (Holley–Stroock
//! perturbation through Ŭ and the Rothaus combination).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::potential::{DissipativitySpec, SmoothnessSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct IsoInputs {
    pub spec: SmoothnessSpec,
    pub d: usize,
    /// Poincaré constant of the target (unused by the non-convex regime).
    pub gamma: f64,
    pub diss: DissipativitySpec,
    pub r: f64,
    pub m2: f64,
    pub k_const: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsoperimetricConstants {
    pub gamma: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub a: f64,
    pub b: f64,
    pub zeta: f64,
    pub m2: f64,
    pub osc: f64,
    pub lambda0: f64,
}

impl IsoperimetricConstants {
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("gamma".to_string(), self.gamma),
            ("gamma1".to_string(), self.gamma1),
            ("gamma2".to_string(), self.gamma2),
            ("gamma3".to_string(), self.gamma3),
            ("A".to_string(), self.a),
            ("B".to_string(), self.b),
            ("zeta".to_string(), self.zeta),
            ("M2".to_string(), self.m2),
            ("osc".to_string(), self.osc),
            ("lambda0".to_string(), self.lambda0),
        ])
    }

    fn validate(self) -> Result<Self> {
        for (k, v) in self.to_map() {
            if !(v.is_finite() && v > 0.0) && k != "osc" {
                return Err(Error::UnsupportedRegime(format!("constant {k} = {v} is not positive and finite at these parameters")));
            }
        }
        Ok(self)
    }
}

/// λ₀ = 2L/R^{1−α}.
pub fn lambda0(spec: &SmoothnessSpec, r: f64) -> f64 {
    2.0 * spec.l_max() / r.powf(1.0 - spec.alpha())
}

/// 2Σ_i L_i R^{1+α_i} + 4L_N R² + 4L R^{1+α}.
pub fn breve_oscillation_bound(spec: &SmoothnessSpec, r: f64) -> f64 {
    let sum: f64 = spec.components().iter().map(|&(l, a)| l * r.powf(1.0 + a)).sum();
    2.0 * sum + 4.0 * spec.l_last() * r * r + 4.0 * spec.l_max() * r.powf(1.0 + spec.alpha())
}

struct Shared {
    l: f64,
    lam0: f64,
    osc: f64,
    bracket1: f64,
    bracket2: f64,
}

fn shared(inp: &IsoInputs) -> Result<Shared> {
    if inp.diss.beta != 2.0 {
        return Err(Error::UnsupportedRegime(format!("dissipative constants need beta = 2, got {}", inp.diss.beta)));
    }
    if !(inp.r > 0.0) || !(inp.m2 >= 0.0) || inp.d == 0 {
        return Err(Error::InvalidParameter("need R > 0, M2 >= 0, d >= 1".into()));
    }
    let (a, b, r, d) = (inp.diss.a, inp.diss.b, inp.r, inp.d as f64);
    let l = inp.spec.l_max();
    let lam0 = lambda0(&inp.spec, r);
    let bracket1 = 2.0 * (b + (l + lam0 / 2.0) * r * r + a * r * r + d) / a + inp.m2;
    let bracket2 = 2.0 * ((b + 4.0 * (l + lam0 / 4.0) * r * r + a * r * r) + d) / a + inp.m2;
    Ok(Shared { l, lam0, osc: breve_oscillation_bound(&inp.spec, r), bracket1, bracket2 })
}

fn a_and_b(s: &Shared, a: f64, zeta: f64) -> (f64, f64) {
    let big_a = (1.0 - s.l / 2.0) * 8.0 / (a * a) + zeta;
    let big_b = 2.0 * s.bracket2 * (1.0 - s.l / 2.0 + 1.0 / zeta);
    (big_a, big_b)
}

/// Poincaré(γ) + 2-dissipative regime.
pub fn poincare_constants(inp: &IsoInputs) -> Result<IsoperimetricConstants> {
    let s = shared(inp)?;
    if !(inp.gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be > 0, got {}", inp.gamma)));
    }
    let g = inp.gamma;
    let zeta = (2.0 * s.bracket1 * (4.0 * s.osc).exp() / g).sqrt();
    let (big_a, big_b) = a_and_b(&s, inp.diss.a, zeta);
    let gamma1 = g * (-4.0 * s.osc).exp();
    let gamma2 = 2.0 / (big_a + (big_b + 2.0) / gamma1);
    let gamma3 = 2.0 * g * (-s.osc).exp() / (big_a * g + (big_b + 2.0) * (4.0 * s.osc).exp());
    IsoperimetricConstants { gamma: g, gamma1, gamma2, gamma3, a: big_a, b: big_b, zeta, m2: inp.m2, osc: s.osc, lambda0: s.lam0 }.validate()
}

/// Non-strongly-convex-outside-the-ball regime; γ comes from the
/// K-relative lower bound 1/(32K²d·c)·e^{−e₂}.
pub fn nonconvex_constants(inp: &IsoInputs) -> Result<IsoperimetricConstants> {
    let s = shared(inp)?;
    if !(inp.k_const > 0.0) {
        return Err(Error::InvalidParameter(format!("K must be > 0, got {}", inp.k_const)));
    }
    let (a, b, r, d, k) = (inp.diss.a, inp.diss.b, inp.r, inp.d as f64, inp.k_const);
    let c = (a + b + 2.0 * a * r * r + 3.0) / a;
    let e2 = 4.0 * (4.0 * inp.spec.l_last() * r * r + 4.0 * s.l * r.powf(1.0 + inp.spec.alpha()));
    let gamma = (-e2).exp() / (32.0 * k * k * d * c);
    let zeta = k * (64.0 * d * s.bracket1 * c * e2.exp()).sqrt();
    let (big_a, big_b) = a_and_b(&s, a, zeta);
    let gamma1 = gamma * (-4.0 * s.osc).exp();
    let gamma2 = 2.0 / (big_a + (big_b + 2.0) / gamma1);
    let gamma3 = 2.0 * (-s.osc).exp() / (big_a + (big_b + 2.0) * 32.0 * k * k * d * c * e2.exp());
    IsoperimetricConstants { gamma, gamma1, gamma2, gamma3, a: big_a, b: big_b, zeta, m2: inp.m2, osc: s.osc, lambda0: s.lam0 }.validate()
}
