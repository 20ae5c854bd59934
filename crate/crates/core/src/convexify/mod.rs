//! Convexification of a potential inside a ball (d ≤ 2): convex extension
//! V, mollified Ṽ, blended Û, and the shifted construction Ū/Ŭ.

mod checks;
mod extension;
mod iso;
mod mollifier;

use std::sync::Arc;

pub use checks::{
    breve_dissipativity_check, check_convexity, check_curvature_floor, check_exterior_agreement, grid_points,
    lyapunov_check, second_moment, verify_breve_oscillation, verify_oscillation, GridCheck, OscillationReport,
};
pub use extension::DiskHull;
pub use iso::{
    breve_oscillation_bound, lambda0, nonconvex_constants, poincare_constants, IsoInputs, IsoperimetricConstants,
};
pub use mollifier::Mollifier;

use crate::error::{invalid, Error, Result};
use crate::potential::{DissipativitySpec, Potential, PotentialModel};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexifyParams {
    pub r: f64,
    pub eps: f64,
    pub delta: f64,
    pub theta: f64,
    pub mu_strong: f64,
    /// Boundary points on the circle (d = 2).
    pub m: usize,
    /// Gauss–Legendre nodes per axis on the mollifier support.
    pub quad_nodes: usize,
}

impl ConvexifyParams {
    /// Defaults ε = 0.05R, δ = ε/20, M = 360, 64 quadrature nodes.
    pub fn new(r: f64, theta: f64, mu_strong: f64) -> Self {
        let eps = 0.05 * r;
        ConvexifyParams { r, eps, delta: eps / 20.0, theta, mu_strong, m: 360, quad_nodes: 64 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.eps > 0.0 && self.delta > 0.0) {
            return Err(invalid(format!("need R, eps, delta > 0 (got {}, {}, {})", self.r, self.eps, self.delta)));
        }
        if self.delta > self.eps / 10.0 {
            return Err(invalid(format!("delta = {} must be <= eps/10 = {}", self.delta, self.eps / 10.0)));
        }
        if !(0.0..=1.0).contains(&self.theta) || !(self.mu_strong >= 0.0) {
            return Err(invalid(format!("need theta in [0, 1] and mu >= 0 (got {}, {})", self.theta, self.mu_strong)));
        }
        if self.m < 3 || self.quad_nodes < 2 {
            return Err(invalid("need M >= 3 and at least 2 quadrature nodes"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Extension {
    Chord { left: f64, right: f64 },
    Disk(DiskHull),
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|t| t * t).sum::<f64>().sqrt()
}

/// The Û construction for a base potential.
#[derive(Debug, Clone)]
pub struct ConvexifiedPotential {
    base: PotentialModel,
    params: ConvexifyParams,
    ext: Extension,
    moll: Mollifier,
    lambda0: f64,
}

/// Û for `base`: Ṽ inside R+ε, blend of Ũ and Ṽ on the shell, Ũ outside
/// R+2ε, plus g. Here Ũ = base − g.
pub fn build_hat_u(base: &PotentialModel, params: ConvexifyParams) -> Result<ConvexifiedPotential> {
    params.validate()?;
    let d = base.dim();
    if d > 2 {
        return Err(Error::Configuration(format!("convexification is implemented for d <= 2, got d = {d}")));
    }
    let mut cp = ConvexifiedPotential {
        base: base.clone(),
        ext: Extension::Chord { left: 0.0, right: 0.0 },
        moll: Mollifier::new(d, params.delta, params.quad_nodes),
        lambda0: lambda0(&base.smoothness, params.r),
        params,
    };
    let r = cp.params.r;
    cp.ext = if d == 1 {
        Extension::Chord { left: cp.u_tilde(&[-r]), right: cp.u_tilde(&[r]) }
    } else {
        let pts = cp.boundary_points();
        let vals: Vec<f64> = pts.iter().map(|p| cp.u_tilde(p)).collect();
        let mut hull = DiskHull::new(r, &vals);
        let outer = r + 2.0 * cp.params.eps + 2.0 * cp.params.delta;
        let ut = |x: &[f64]| cp.u_tilde(x);
        hull.calibrate(&ut, outer);
        Extension::Disk(hull)
    };
    Ok(cp)
}

impl ConvexifiedPotential {
    pub fn base(&self) -> &PotentialModel {
        &self.base
    }

    pub fn params(&self) -> &ConvexifyParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn mollifier(&self) -> &Mollifier {
        &self.moll
    }

    /// Points x_j = R(cos 2πj/M, sin 2πj/M) (d = 2) or ±R (d = 1).
    pub fn boundary_points(&self) -> Vec<Vec<f64>> {
        let r = self.params.r;
        if self.dim() == 1 {
            return vec![vec![-r], vec![r]];
        }
        (0..self.params.m)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * j as f64 / self.params.m as f64;
                vec![r * t.cos(), r * t.sin()]
            })
            .collect()
    }

    /// Offset added to the d = 2 hull, and the radius beyond which V = Ũ.
    pub fn hull_calibration(&self) -> (f64, f64) {
        match &self.ext {
            Extension::Chord { .. } => (0.0, self.params.r),
            Extension::Disk(h) => (h.offset(), h.agreement_radius()),
        }
    }

    /// g(x) = (μ/(2(2−θ)))(1+‖x‖²)^{1−θ/2}.
    pub fn g(&self, x: &[f64]) -> f64 {
        let (mu, th) = (self.params.mu_strong, self.params.theta);
        if mu == 0.0 {
            return 0.0;
        }
        let s = 1.0 + x.iter().map(|t| t * t).sum::<f64>();
        mu / (2.0 * (2.0 - th)) * s.powf(1.0 - th / 2.0)
    }

    /// Ũ = base − g.
    pub fn u_tilde(&self, x: &[f64]) -> f64 {
        self.base.value(x) - self.g(x)
    }

    /// V at any point (Ũ where the extension agrees with it).
    pub fn v(&self, x: &[f64]) -> f64 {
        match &self.ext {
            Extension::Chord { left, right } => {
                let r = self.params.r;
                if x[0].abs() < r {
                    left + (right - left) * (x[0] + r) / (2.0 * r)
                } else {
                    self.u_tilde(x)
                }
            }
            Extension::Disk(h) => h.value(x[0], x[1], || self.u_tilde(x)),
        }
    }

    /// V on the closed ball; outside it is a domain error.
    pub fn convex_extension_v(&self, x: &[f64]) -> Result<f64> {
        let n = norm(x);
        if n > self.params.r * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("convex extension evaluated at |x| = {n} > R = {}", self.params.r)));
        }
        Ok(self.v(x))
    }

    /// Ṽ = V * φ_δ.
    pub fn mollified_v(&self, x: &[f64]) -> f64 {
        self.moll.apply(x, |y| self.v(y))
    }

    /// Weight on Ũ in the shell R+ε ≤ ‖x‖ ≤ R+2ε.
    pub fn blend_weight(&self, r: f64) -> f64 {
        let (big_r, eps) = (self.params.r, self.params.eps);
        if r <= big_r + eps {
            0.0
        } else if r >= big_r + 2.0 * eps {
            1.0
        } else {
            let t = (r * r - (big_r + eps).powi(2)) / (eps * (2.0 * big_r + 3.0 * eps));
            0.5 - 0.5 * (std::f64::consts::PI * t).cos()
        }
    }

    /// Û − g.
    pub fn hat_minus_g(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        let (big_r, eps) = (self.params.r, self.params.eps);
        if r >= big_r + 2.0 * eps {
            return self.u_tilde(x);
        }
        let vt = self.mollified_v(x);
        if r <= big_r + eps {
            return vt;
        }
        let w = self.blend_weight(r);
        w * self.u_tilde(x) + (1.0 - w) * vt
    }

    /// Û.
    pub fn hat_u(&self, x: &[f64]) -> f64 {
        if norm(x) >= self.params.r + 2.0 * self.params.eps {
            return self.base.value(x);
        }
        self.hat_minus_g(x) + self.g(x)
    }

    /// Bound Σ L_i R^{1+α_i} + (4μ/(2−θ))R^{2−θ} on osc(Û − U).
    pub fn oscillation_bound(&self) -> f64 {
        let r = self.params.r;
        let sum: f64 = self.base.smoothness.components().iter().map(|&(l, a)| l * r.powf(1.0 + a)).sum();
        let (mu, th) = (self.params.mu_strong, self.params.theta);
        sum + 4.0 * mu / (2.0 - th) * r.powf(2.0 - th)
    }
}

/// U + q‖x‖².
struct Shifted {
    inner: Arc<dyn Potential>,
    q: f64,
}

impl Potential for Shifted {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(x) + self.q * x.iter().map(|t| t * t).sum::<f64>()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.inner.gradient(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o += 2.0 * self.q * xi;
        }
    }
}

/// Ŭ = Û[Ū] − ((L_N+λ₀)/2)‖x‖² with Ū = U + ((L_N+λ₀)/2)‖x‖².
#[derive(Debug, Clone)]
pub struct BreveU {
    original: PotentialModel,
    hat: ConvexifiedPotential,
    q: f64,
    osc_bound: f64,
}

/// Builds Ŭ; the hat construction of Ū uses μ = λ₀ and θ = 0.
pub fn build_breve_u(base: &PotentialModel, r: f64, eps: f64, delta: f64, m: usize) -> Result<BreveU> {
    let spec = &base.smoothness;
    if spec.alpha_max() != 1.0 {
        return Err(Error::UnsupportedRegime(format!("the shifted construction needs alpha_N = 1, got {}", spec.alpha_max())));
    }
    let lam0 = lambda0(spec, r);
    let q = (spec.l_last() + lam0) / 2.0;
    let bar = PotentialModel::new(
        format!("{}+quadratic", base.name()),
        Arc::new(Shifted { inner: base.potential().clone(), q }),
        spec.clone(),
    );
    let mut params = ConvexifyParams::new(r, 0.0, lam0);
    params.eps = eps;
    params.delta = delta;
    params.m = m;
    let hat = build_hat_u(&bar, params)?;
    Ok(BreveU { original: base.clone(), hat, q, osc_bound: breve_oscillation_bound(spec, r) })
}

impl BreveU {
    pub fn hat(&self) -> &ConvexifiedPotential {
        &self.hat
    }

    pub fn original(&self) -> &PotentialModel {
        &self.original
    }

    pub fn oscillation_bound(&self) -> f64 {
        self.osc_bound
    }

    /// Ū.
    pub fn bar_u(&self, x: &[f64]) -> f64 {
        self.hat.base.value(x)
    }

    /// Ŭ; equals U exactly outside R+2ε.
    pub fn value(&self, x: &[f64]) -> f64 {
        let p = self.hat.params();
        if norm(x) >= p.r + 2.0 * p.eps {
            return self.original.value(x);
        }
        self.hat.hat_u(x) - self.q * x.iter().map(|t| t * t).sum::<f64>()
    }

    /// The dissipativity Ŭ inherits: (a, b + (L_N+λ₀/2)R² + aR², 2).
    pub fn dissipativity(&self, diss: &DissipativitySpec) -> Result<DissipativitySpec> {
        let r = self.hat.params().r;
        let extra = (self.original.smoothness.l_last() + self.hat.lambda0() / 2.0) * r * r + diss.a * r * r;
        DissipativitySpec::new(diss.a, diss.b + extra, 2.0)
    }

    /// Ŭ as a potential (finite-difference gradient inside the ball).
    pub fn model(self: &Arc<Self>) -> PotentialModel {
        PotentialModel::new(format!("breve({})", self.original.name()), Arc::new(BreveModel(self.clone())), self.original.smoothness.clone())
    }
}

struct BreveModel(Arc<BreveU>);

impl Potential for BreveModel {
    fn dim(&self) -> usize {
        self.0.original.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(x)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let p = self.0.hat.params();
        let h = 1e-5 * norm(x).max(1.0);
        if norm(x) >= p.r + 2.0 * p.eps + h {
            self.0.original.gradient(x, out);
            return;
        }
        let mut y = x.to_vec();
        for k in 0..x.len() {
            y[k] = x[k] + h;
            let up = self.0.value(&y);
            y[k] = x[k] - h;
            let dn = self.0.value(&y);
            y[k] = x[k];
            out[k] = (up - dn) / (2.0 * h);
        }
    }
}

#[cfg(test)]
mod tests;
