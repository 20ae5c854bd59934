//! Step-size and iteration-count planners. Every constant entering a plan is
//! recorded in `constants`, and every individual step-size cap in `caps`.

use std::collections::BTreeMap;
use std::fmt;

use crate::convexify::{nonconvex_constants, poincare_constants, IsoInputs, IsoperimetricConstants};
use crate::error::{invalid, Error, Result};
use crate::potential::{DissipativitySpec, SmoothnessSpec};

/// Floor applied to non-positive H₀ bounds.
pub const H0_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Lsi,
    Smoothed,
    PoincareDissipative,
    NonconvexOutsideBall,
    /// User-fixed η and k; not backed by a theorem.
    Manual,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Lsi => "LSI",
            Regime::Smoothed => "SMOOTHED",
            Regime::PoincareDissipative => "POINCARE_DISSIPATIVE",
            Regime::NonconvexOutsideBall => "NONCONVEX_OUTSIDE_BALL",
            Regime::Manual => "MANUAL",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "LSI" => Regime::Lsi,
            "SMOOTHED" => Regime::Smoothed,
            "POINCARE_DISSIPATIVE" | "POINCARE" => Regime::PoincareDissipative,
            "NONCONVEX_OUTSIDE_BALL" | "NONCONVEX" => Regime::NonconvexOutsideBall,
            "MANUAL" => Regime::Manual,
            _ => return Err(Error::Configuration(format!("unknown regime `{s}`"))),
        })
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanOptions {
    /// Multiplies the theorem step size. Values other than 1 are off-theorem.
    pub aggressive: f64,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions { aggressive: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepSizePlan {
    pub eta: f64,
    pub k_iterations: u64,
    pub regime: Regime,
    pub constants: BTreeMap<String, f64>,
    /// Individual step-size caps; the theorem step size is their minimum.
    pub caps: Vec<(String, f64)>,
    pub epsilon_target: f64,
    pub aggressive: f64,
    pub d: usize,
    pub p: f64,
}

impl StepSizePlan {
    /// Fixed η and k outside any theorem.
    pub fn manual(eta: f64, k: u64, d: usize, p: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(invalid(format!("step size must be positive, got {eta}")));
        }
        Ok(StepSizePlan {
            eta,
            k_iterations: k,
            regime: Regime::Manual,
            constants: BTreeMap::new(),
            caps: Vec::new(),
            epsilon_target: f64::NAN,
            aggressive: 1.0,
            d,
            p,
        })
    }

    pub fn off_theorem(&self) -> bool {
        self.regime == Regime::Manual || self.aggressive != 1.0
    }

    pub fn theorem_eta(&self) -> f64 {
        self.caps.iter().map(|c| c.1).fold(f64::INFINITY, f64::min)
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.get(name).copied()
    }

    /// Keep the theorem's constants but replace η and/or k; marks the plan off-theorem.
    pub fn with_overrides(mut self, eta: Option<f64>, k: Option<u64>) -> Self {
        if eta.is_some() || k.is_some() {
            if let Some(e) = eta {
                self.eta = e;
            }
            if let Some(k) = k {
                self.k_iterations = k;
            }
            self.constants.insert("theorem_eta".into(), self.theorem_eta());
            self.regime = Regime::Manual;
        }
        self
    }
}

/// D₃ = Σ_i [10N³L⁶ + 16NL⁴ + 8N²L⁴d^{3/p} + 4NL²d]; the sum over i multiplies by N.
pub fn compute_d3(spec: &SmoothnessSpec, d: usize, p: f64) -> f64 {
    let n = spec.n() as f64;
    let l = spec.l_max();
    let d = d as f64;
    n * (10.0 * n.powi(3) * l.powi(6) + 16.0 * n * l.powi(4) + 8.0 * n * n * l.powi(4) * d.powf(3.0 / p) + 4.0 * n * l * l * d)
}

/// D₃' for (α, ℓ)-weak smoothness.
pub fn compute_d3_prime(l: f64, alpha: f64, ell: f64, d: usize) -> f64 {
    let d = d as f64;
    16.0 * l.powf(2.0 + 2.0 * alpha + 2.0 * ell)
        + 4.0 * l.powf(2.0 + 2.0 * alpha) * d.powf((3.0 - alpha) / (1.0 + alpha) * (alpha + ell))
        + 4.0 * l * l * d.powf(alpha + ell)
}

/// D₄ = D₃ + Σ_i 8N²L²d^{2α/p}.
pub fn compute_d4(spec: &SmoothnessSpec, d: usize, p: f64) -> f64 {
    let n = spec.n() as f64;
    let l = spec.l_max();
    compute_d3(spec, d, p) + n * 8.0 * n * n * l * l * (d as f64).powf(2.0 * spec.alpha() / p)
}

/// H(p₀|π) ≤ U(0) − (d/2)log(2πe/L) + Σ_i (L_i/(1+α_i))(d/L)^{(1+α_i)/2} for p₀ = N(0, I/L).
/// `u0` must be the value at the origin of the normalized potential for the bound to be a KL bound.
pub fn initial_kl_bound(spec: &SmoothnessSpec, u0: f64, d: usize) -> f64 {
    let l = spec.l_max();
    let df = d as f64;
    let tail: f64 = spec.components().iter().map(|&(li, a)| li / (1.0 + a) * (df / l).powf((1.0 + a) / 2.0)).sum();
    u0 - 0.5 * df * (2.0 * std::f64::consts::PI * std::f64::consts::E / l).ln() + tail
}

/// H₀ used by planners when none is supplied: the bound floored at [`H0_FLOOR`].
pub fn h0_default(bound: f64) -> f64 {
    if bound.is_finite() && bound > H0_FLOOR {
        bound
    } else {
        H0_FLOOR
    }
}

fn check_common(gamma: f64, epsilon: f64, h0: f64, opts: &PlanOptions) -> Result<()> {
    if !(gamma > 0.0) {
        return Err(invalid(format!("isoperimetric constant must be positive, got {gamma}")));
    }
    if !(epsilon > 0.0) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(h0 > 0.0) {
        return Err(invalid(format!("H0 must be positive, got {h0}")));
    }
    if !(opts.aggressive > 0.0) {
        return Err(invalid("aggressive multiplier must be positive"));
    }
    Ok(())
}

/// ⌈log(log_arg)/(rate·η)⌉ as a real; [`finish`] saturates it into u64.
fn iterations(rate: f64, eta: f64, log_arg: f64) -> f64 {
    (log_arg.ln() / (rate * eta)).ceil()
}

#[allow(clippy::too_many_arguments)]
fn finish(regime: Regime, caps: Vec<(String, f64)>, mut constants: BTreeMap<String, f64>, epsilon: f64, opts: &PlanOptions, d: usize, p: f64, k: impl Fn(f64) -> f64) -> StepSizePlan {
    let eta = caps.iter().map(|c| c.1).fold(f64::INFINITY, f64::min) * opts.aggressive;
    let theorem_k = k(eta);
    constants.insert("theorem_k".into(), theorem_k);
    let k_iterations = if theorem_k.is_finite() && theorem_k >= 1.0 { theorem_k as u64 } else { 1 };
    StepSizePlan { eta, k_iterations, regime, constants, caps, epsilon_target: epsilon, aggressive: opts.aggressive, d, p }
}

/// LSI(γ) regime: η = 1 ∧ 1/(4γ) ∧ (γ/(9N^{3/2}L³))^{1/α} ∧ (3εγ/(16D₃))^{1/α},
/// k = ⌈log(2H₀/ε)/(γη)⌉.
pub fn plan_lsi(spec: &SmoothnessSpec, gamma: f64, d: usize, p: f64, epsilon: f64, h0: f64, opts: &PlanOptions) -> Result<StepSizePlan> {
    check_common(gamma, epsilon, h0, opts)?;
    let (n, l, a) = (spec.n() as f64, spec.l_max(), spec.alpha());
    let d3 = compute_d3(spec, d, p);
    let caps = vec![
        ("one".to_string(), 1.0),
        ("inv_4gamma".to_string(), 1.0 / (4.0 * gamma)),
        ("contraction".to_string(), (gamma / (9.0 * n.powf(1.5) * l.powi(3))).powf(1.0 / a)),
        ("bias".to_string(), (3.0 * epsilon * gamma / (16.0 * d3)).powf(1.0 / a)),
    ];
    let constants = BTreeMap::from([("D3".to_string(), d3), ("H0_bound".to_string(), h0), ("gamma".to_string(), gamma)]);
    Ok(finish(Regime::Lsi, caps, constants, epsilon, opts, d, p, |eta| iterations(gamma, eta, 2.0 * h0 / epsilon)))
}

/// Smoothed regime with γ₁ and E₂ = E_π‖x‖²; μ = √η.
#[allow(clippy::too_many_arguments)]
pub fn plan_smoothed(spec: &SmoothnessSpec, gamma1: f64, d: usize, p: f64, epsilon: f64, h0: f64, e2: f64, opts: &PlanOptions) -> Result<StepSizePlan> {
    check_common(gamma1, epsilon, h0, opts)?;
    if !(e2 > 0.0) {
        return Err(invalid(format!("second moment must be positive, got {e2}")));
    }
    let (n, l, a) = (spec.n() as f64, spec.l_max(), spec.alpha());
    let d4 = compute_d4(spec, d, p);
    let caps = vec![
        ("one".to_string(), 1.0),
        ("inv_4gamma1".to_string(), 1.0 / (4.0 * gamma1)),
        ("contraction".to_string(), (gamma1 / (13.0 * n.powf(1.5) * l.powi(3))).powf(1.0 / a)),
        ("bias".to_string(), (epsilon * gamma1 / (6.0 * d4.sqrt())).powf(2.0 / a)),
        ("smoothing".to_string(), (epsilon / (9.0 * (n * l * e2).sqrt() * (d as f64).powf(1.0 / p))).powf(2.0 / a)),
    ];
    let mut constants = BTreeMap::from([
        ("D3".to_string(), compute_d3(spec, d, p)),
        ("D4".to_string(), d4),
        ("H0_bound".to_string(), h0),
        ("gamma1".to_string(), gamma1),
        ("E2".to_string(), e2),
    ]);
    let mut plan = finish(Regime::Smoothed, caps, BTreeMap::new(), epsilon, opts, d, p, |eta| {
        iterations(gamma1 / 2.0, eta, 3.0 * (h0 * gamma1).sqrt() / epsilon)
    });
    constants.insert("mu".to_string(), plan.eta.sqrt());
    plan.constants = constants;
    Ok(plan)
}

/// Inputs shared by the two dissipative regimes.
#[derive(Debug, Clone, PartialEq)]
pub struct PoincareInputs {
    pub spec: SmoothnessSpec,
    /// Poincaré constant of π (ignored by the non-convex-outside-ball regime).
    pub gamma: f64,
    pub d: usize,
    pub p: f64,
    pub epsilon: f64,
    pub h0: f64,
    pub diss: DissipativitySpec,
    pub r: f64,
    pub m2: f64,
    /// Universal constant K of the non-convex regime.
    pub k_const: f64,
}

impl PoincareInputs {
    fn iso(&self) -> IsoInputs {
        IsoInputs { spec: self.spec.clone(), d: self.d, gamma: self.gamma, diss: self.diss, r: self.r, m2: self.m2, k_const: self.k_const }
    }
}

fn plan_dissipative(regime: Regime, inp: &PoincareInputs, iso: IsoperimetricConstants, opts: &PlanOptions) -> Result<StepSizePlan> {
    check_common(iso.gamma3, inp.epsilon, inp.h0, opts)?;
    let (l, a) = (inp.spec.l_max(), inp.spec.alpha());
    let d3 = compute_d3(&inp.spec, inp.d, inp.p);
    let g3 = iso.gamma3;
    let caps = vec![
        ("one".to_string(), 1.0),
        ("inv_4gamma3".to_string(), 1.0 / (4.0 * g3)),
        ("contraction".to_string(), (g3 / (16.0 * l.powf(1.0 + a))).powf(1.0 / a)),
        ("bias".to_string(), (3.0 * inp.epsilon * g3 / (16.0 * d3)).powf(1.0 / a)),
    ];
    let mut constants = iso.to_map();
    constants.insert("D3".into(), d3);
    constants.insert("H0_bound".into(), inp.h0);
    Ok(finish(regime, caps, constants, inp.epsilon, opts, inp.d, inp.p, |eta| iterations(g3, eta, 2.0 * inp.h0 / inp.epsilon)))
}

fn require_alpha_n_one(spec: &SmoothnessSpec) -> Result<()> {
    if spec.alpha_max() != 1.0 {
        return Err(Error::UnsupportedRegime(format!("dissipative regimes need alpha_N = 1, got {}", spec.alpha_max())));
    }
    Ok(())
}

/// Poincaré(γ) + 2-dissipativity regime, through the γ₃ constant.
pub fn plan_poincare(inp: &PoincareInputs, opts: &PlanOptions) -> Result<StepSizePlan> {
    require_alpha_n_one(&inp.spec)?;
    let iso = poincare_constants(&inp.iso())?;
    plan_dissipative(Regime::PoincareDissipative, inp, iso, opts)
}

/// Non-strongly-convex-outside-the-ball regime (γ from the K-relative bound).
pub fn plan_nonconvex_outside_ball(inp: &PoincareInputs, opts: &PlanOptions) -> Result<StepSizePlan> {
    require_alpha_n_one(&inp.spec)?;
    let iso = nonconvex_constants(&inp.iso())?;
    plan_dissipative(Regime::NonconvexOutsideBall, inp, iso, opts)
}
