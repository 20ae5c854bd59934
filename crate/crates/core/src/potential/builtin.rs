//! The potential zoo.
//!
//! Declared constants and their derivations:
//!
//! * `gaussian`: U = ‖x‖²/2. ∇U = x is 1-Lipschitz, ⟨∇U,x⟩ = ‖x‖², Hessian I.
//! * `holder(α, c)`: U = c‖x‖^{1+α}/(1+α), ∇U = c‖x‖^{α-1}x. The map
//!   x ↦ ‖x‖^{α-1}x is α-Hölder with constant 2^{1-α} (attained at y = −x),
//!   so L = 2^{1-α}c. ⟨∇U,x⟩ = c‖x‖^{1+α}. The Hessian has smallest
//!   eigenvalue αc‖x‖^{α-1} ≥ αc(1+‖x‖²)^{-(1-α)/2}.
//! * `mixture_holder([(c_i, α_i)])`: sum of the above; L_i = 2^{1-α_i}c_i,
//!   dissipativity from the top term, convexity from the top term alone.
//! * `cosine_perturbed_quadratic(A)`: U = ‖x‖²/2 + AΣcos x_j. ∇U = x − A sin x
//!   is (1+A)-Lipschitz. Young's inequality A|t| ≤ t²/2 + A²/2 gives
//!   ⟨∇U,x⟩ ≥ ‖x‖²/2 − dA²/2. For A < 1 the Hessian is ⪰ (1−A)I.
//! * `quartic_tail_capped(c)`: double well with quadratic tails,
//!   ∇U = (min(‖x‖,c)² − 1)x. Jacobian eigenvalues lie in [−1, 3c²−1] and
//!   ∇U is continuous, so L = max(3c²−1, 1). ⟨∇U,x⟩ ≥ (c²−1)‖x‖² − c⁴/4.
//!   Convex outside radius 1.5 with Hessian ⪰ 1.25·I (needs c ≥ 1.5).

use std::sync::Arc;

use super::{DegenerateConvexity, DissipativitySpec, Potential, PotentialModel, SmoothnessSpec};
use crate::error::{invalid, Error, Result};
use crate::special::{composite_rule, ln_sphere_area};

#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    Gaussian,
    Holder { alpha: f64, coef: f64 },
    MixtureHolder(Vec<(f64, f64)>),
    CosinePerturbedQuadratic { amplitude: f64 },
    QuarticTailCapped { cap: f64 },
}

impl Builtin {
    /// Parse a name plus a comma-separated `key=value` parameter string.
    ///
    /// `holder`: `alpha`, `L` (coefficient). `mixture_holder`: `terms=c:α|c:α`.
    /// `cosine_perturbed_quadratic`: `amplitude`. `quartic_tail_capped`: `cap`.
    pub fn parse(name: &str, params: &str) -> Result<Builtin> {
        let mut kv = Vec::new();
        for item in params.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Configuration(format!("bad potential parameter `{item}`")))?;
            kv.push((k.trim().to_string(), v.trim().to_string()));
        }
        let num = |key: &str, default: f64| -> Result<f64> {
            match kv.iter().find(|(k, _)| k == key) {
                None => Ok(default),
                Some((_, v)) => v
                    .parse::<f64>()
                    .map_err(|_| Error::Configuration(format!("parameter {key}: `{v}` is not a number"))),
            }
        };
        let known: &[&str] = match name {
            "gaussian" => &[],
            "holder" => &["alpha", "L"],
            "mixture_holder" => &["terms"],
            "cosine_perturbed_quadratic" => &["amplitude"],
            "quartic_tail_capped" => &["cap"],
            _ => return Err(Error::UnknownPotential(name.to_string())),
        };
        if let Some((k, _)) = kv.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            return Err(Error::Configuration(format!("potential {name} has no parameter `{k}`")));
        }
        Ok(match name {
            "gaussian" => Builtin::Gaussian,
            "holder" => Builtin::Holder { alpha: num("alpha", 0.5)?, coef: num("L", 1.0)? },
            "mixture_holder" => {
                let raw = kv
                    .iter()
                    .find(|(k, _)| k == "terms")
                    .map(|(_, v)| v.clone())
                    .unwrap_or_else(|| "1:0.5|1:1".into());
                let mut terms = Vec::new();
                for t in raw.split('|') {
                    let (c, a) = t
                        .split_once(':')
                        .ok_or_else(|| Error::Configuration(format!("mixture term `{t}` must be coef:alpha")))?;
                    let c: f64 = c.trim().parse().map_err(|_| Error::Configuration(format!("bad coefficient `{c}`")))?;
                    let a: f64 = a.trim().parse().map_err(|_| Error::Configuration(format!("bad exponent `{a}`")))?;
                    terms.push((c, a));
                }
                Builtin::MixtureHolder(terms)
            }
            "cosine_perturbed_quadratic" => Builtin::CosinePerturbedQuadratic { amplitude: num("amplitude", 0.5)? },
            _ => Builtin::QuarticTailCapped { cap: num("cap", 2.0)? },
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Gaussian => "gaussian",
            Builtin::Holder { .. } => "holder",
            Builtin::MixtureHolder(_) => "mixture_holder",
            Builtin::CosinePerturbedQuadratic { .. } => "cosine_perturbed_quadratic",
            Builtin::QuarticTailCapped { .. } => "quartic_tail_capped",
        }
    }

    pub fn build(&self, d: usize) -> Result<PotentialModel> {
        if d < 1 {
            return Err(invalid("dimension must be at least 1"));
        }
        match self {
            Builtin::Gaussian => {
                let m = PotentialModel::new("gaussian", Arc::new(Radial::new(d, vec![(1.0, 1.0)])), SmoothnessSpec::single(1.0, 1.0)?);
                let mut m = m.stationary()?.with_dissipativity(DissipativitySpec::new(1.0, 0.0, 2.0)?);
                m.degenerate_convexity = Some(DegenerateConvexity::new(1.0, 0.0)?);
                m.log_normalizer = Some(0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln());
                Ok(m)
            }
            Builtin::Holder { alpha, coef } => holder_model("holder", d, vec![(*coef, *alpha)]),
            Builtin::MixtureHolder(terms) => holder_model("mixture_holder", d, terms.clone()),
            Builtin::CosinePerturbedQuadratic { amplitude } => {
                let a = *amplitude;
                if !(a >= 0.0 && a.is_finite()) {
                    return Err(invalid("amplitude must be nonnegative"));
                }
                let pot = CosineQuadratic { d, amp: a };
                let ln1d = ln_integral_1d(|t| 0.5 * t * t + a * t.cos(), 40.0);
                let mut m = PotentialModel::new("cosine_perturbed_quadratic", Arc::new(pot), SmoothnessSpec::single(1.0 + a, 1.0)?)
                    .stationary()?
                    .with_dissipativity(DissipativitySpec::new(0.5, d as f64 * a * a / 2.0, 2.0)?);
                if a < 1.0 {
                    m.degenerate_convexity = Some(DegenerateConvexity::new(1.0 - a, 0.0)?);
                }
                m.log_normalizer = Some(d as f64 * ln1d);
                Ok(m)
            }
            Builtin::QuarticTailCapped { cap } => {
                let c = *cap;
                if !(c >= 1.5) {
                    return Err(invalid(format!("quartic_tail_capped needs cap >= 1.5, got {c}")));
                }
                let pot = QuarticCapped { d, cap: c };
                let l = (3.0 * c * c - 1.0).max(1.0);
                let ln_z = ln_radial_integral(d, |r| pot.profile(r), 2.0 * c + 40.0);
                let mut m = PotentialModel::new("quartic_tail_capped", Arc::new(pot), SmoothnessSpec::single(l, 1.0)?)
                    .stationary()?
                    .with_dissipativity(DissipativitySpec::new(c * c - 1.0, c.powi(4) / 4.0, 2.0)?);
                m.convexity_radius = Some(1.5);
                m.degenerate_convexity = Some(DegenerateConvexity::new(1.25, 0.0)?);
                m.log_normalizer = Some(ln_z);
                Ok(m)
            }
        }
    }
}

fn holder_model(name: &str, d: usize, terms: Vec<(f64, f64)>) -> Result<PotentialModel> {
    if terms.is_empty() {
        return Err(invalid("need at least one Hölder term"));
    }
    for &(c, a) in &terms {
        if !(c > 0.0) || !(a > 0.0 && a <= 1.0) {
            return Err(invalid(format!("Hölder term ({c}, {a}) needs coef > 0 and alpha in (0, 1]")));
        }
    }
    let spec = SmoothnessSpec::new(terms.iter().map(|&(c, a)| (2f64.powf(1.0 - a) * c, a)).collect())?;
    let (c_top, a_top) = terms[terms.len() - 1];
    let pot = Radial::new(d, terms.clone());
    let ln_z = {
        let t = terms.clone();
        let r_max = (60.0 * (1.0 + a_top) / c_top).powf(1.0 / (1.0 + a_top)) + 10.0 * d as f64;
        ln_radial_integral(d, move |r| t.iter().map(|&(c, a)| c * r.powf(1.0 + a) / (1.0 + a)).sum(), r_max)
    };
    let mut m = PotentialModel::new(name, Arc::new(pot), spec)
        .stationary()?
        .with_dissipativity(DissipativitySpec::new(c_top, 0.0, 1.0 + a_top)?);
    m.degenerate_convexity = Some(DegenerateConvexity::new(a_top * c_top, 1.0 - a_top)?);
    m.log_normalizer = Some(ln_z);
    Ok(m)
}

/// U = Σ c_i ‖x‖^{1+α_i}/(1+α_i).
struct Radial {
    d: usize,
    terms: Vec<(f64, f64)>,
}

impl Radial {
    fn new(d: usize, terms: Vec<(f64, f64)>) -> Self {
        Radial { d, terms }
    }
}

impl Potential for Radial {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if let [(c, a)] = self.terms[..] {
            if a == 1.0 {
                return 0.5 * c * r2;
            }
        }
        let r = r2.sqrt();
        self.terms.iter().map(|&(c, a)| if a == 1.0 { 0.5 * c * r2 } else { c * r.powf(1.0 + a) / (1.0 + a) }).sum()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let s = if r2 == 0.0 {
            0.0
        } else {
            let r = r2.sqrt();
            self.terms.iter().map(|&(c, a)| if a == 1.0 { c } else { c * r.powf(a - 1.0) }).sum()
        };
        for (o, v) in out.iter_mut().zip(x) {
            *o = s * v;
        }
    }
}

struct CosineQuadratic {
    d: usize,
    amp: f64,
}

impl Potential for CosineQuadratic {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| 0.5 * v * v + self.amp * v.cos()).sum()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = v - self.amp * v.sin();
        }
    }
}

struct QuarticCapped {
    d: usize,
    cap: f64,
}

impl QuarticCapped {
    fn profile(&self, r: f64) -> f64 {
        let c = self.cap;
        if r <= c {
            let s = r * r - 1.0;
            0.25 * s * s
        } else {
            let s = c * c - 1.0;
            0.25 * s * s + 0.5 * s * (r * r - c * c)
        }
    }
}

impl Potential for QuarticCapped {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.profile(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let s = r2.min(self.cap * self.cap) - 1.0;
        for (o, v) in out.iter_mut().zip(x) {
            *o = s * v;
        }
    }
}

/// ln ∫_{-t}^{t} e^{-f(s)} ds.
fn ln_integral_1d(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let (xs, ws) = composite_rule(-t, t, 400, 16);
    let vals: Vec<f64> = xs.iter().map(|&s| -f(s)).collect();
    log_sum_weighted(&vals, &ws)
}

/// ln ∫_{R^d} e^{-h(‖x‖)} dx for a radial profile h.
fn ln_radial_integral(d: usize, h: impl Fn(f64) -> f64, r_max: f64) -> f64 {
    let (rs, ws) = composite_rule(0.0, r_max, 800, 16);
    let vals: Vec<f64> = rs.iter().map(|&r| (d as f64 - 1.0) * r.ln() - h(r)).collect();
    ln_sphere_area(d) + log_sum_weighted(&vals, &ws)
}

fn log_sum_weighted(log_vals: &[f64], w: &[f64]) -> f64 {
    let m = log_vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = log_vals.iter().zip(w).map(|(v, w)| w * (v - m).exp()).sum();
    m + s.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names_and_params() {
        assert_eq!(Builtin::parse("gaussian", "").unwrap(), Builtin::Gaussian);
        assert_eq!(
            Builtin::parse("holder", "alpha=0.25, L=2").unwrap(),
            Builtin::Holder { alpha: 0.25, coef: 2.0 }
        );
        assert_eq!(
            Builtin::parse("mixture_holder", "terms=1:0.5|2:1").unwrap(),
            Builtin::MixtureHolder(vec![(1.0, 0.5), (2.0, 1.0)])
        );
        assert!(matches!(Builtin::parse("banana", ""), Err(Error::UnknownPotential(_))));
        assert!(matches!(Builtin::parse("holder", "beta=2"), Err(Error::Configuration(_))));
    }

    #[test]
    fn gaussian_declarations() {
        let m = Builtin::Gaussian.build(2).unwrap();
        assert_eq!(m.smoothness.components(), &[(1.0, 1.0)]);
        assert_eq!(m.dissipativity, Some(DissipativitySpec { a: 1.0, b: 0.0, beta: 2.0 }));
        assert!(m.stationary_at_zero);
        assert!((m.value(&[1.0, 2.0]) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn holder_values() {
        let m = Builtin::Holder { alpha: 0.5, coef: 1.0 }.build(1).unwrap();
        assert!((m.value(&[4.0]) - 8.0 / 1.5).abs() < 1e-12);
        assert!((m.gradient_vec(&[-4.0])[0] + 2.0).abs() < 1e-12);
        assert_eq!(m.gradient_vec(&[0.0]), vec![0.0]);
        let mix = Builtin::MixtureHolder(vec![(1.0, 0.5), (1.0, 1.0)]).build(1).unwrap();
        assert!((mix.value(&[4.0]) - (8.0 / 1.5 + 8.0)).abs() < 1e-12);
        assert_eq!(mix.smoothness.n(), 2);
    }

    #[test]
    fn log_normalizers_against_closed_forms() {
        // holder with one term: ∫ e^{-|x|^{q}/q} dx = 2 q^{1/q - 1} Γ(1/q) in 1-D
        let q: f64 = 1.5;
        let exact = (2.0 * q.powf(1.0 / q - 1.0) * crate::special::gamma(1.0 / q)).ln();
        let m = Builtin::Holder { alpha: 0.5, coef: 1.0 }.build(1).unwrap();
        assert!((m.log_normalizer.unwrap() - exact).abs() < 1e-9);
        // quadratic via the radial path in d = 3
        let m = Builtin::MixtureHolder(vec![(1.0, 1.0)]).build(3).unwrap();
        assert!((m.log_normalizer.unwrap() - 1.5 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-9);
        // zero amplitude reduces to the Gaussian
        let m = Builtin::CosinePerturbedQuadratic { amplitude: 0.0 }.build(2).unwrap();
        assert!((m.log_normalizer.unwrap() - (2.0 * std::f64::consts::PI).ln()).abs() < 1e-9);
    }

    #[test]
    fn quartic_gradient_is_continuous_at_cap() {
        let m = Builtin::QuarticTailCapped { cap: 2.0 }.build(1).unwrap();
        let a = m.gradient_vec(&[2.0 - 1e-9])[0];
        let b = m.gradient_vec(&[2.0 + 1e-9])[0];
        assert!((a - b).abs() < 1e-7);
        assert!((m.value(&[2.0 - 1e-9]) - m.value(&[2.0 + 1e-9])).abs() < 1e-7);
    }
}
