//! The p-generalized Gaussian N_p(0, I_d): each coordinate has density
//! proportional to exp(-|t|^p / p), 1 ≤ p ≤ 2.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::batch::SampleBatch;
use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::rng::{chunks, Seed};
use crate::special::{gamma, ln_gamma};

/// Rows drawn per independent stream when sampling batches.
pub const SAMPLE_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PGaussParams {
    p: f64,
    d: usize,
}

impl PGaussParams {
    pub fn new(p: f64, d: usize) -> Result<Self> {
        if !(1.0..=2.0).contains(&p) {
            return Err(invalid(format!("p must lie in [1, 2], got {p}")));
        }
        if d < 1 {
            return Err(invalid("dimension must be at least 1"));
        }
        Ok(PGaussParams { p, d })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// κ = ∫ exp(-‖ξ‖_p^p / p) dξ.
    pub fn normalizer(&self) -> Result<f64> {
        let d = self.d as f64;
        let v = if self.d <= 50 {
            2f64.powf(d) * gamma(1.0 / self.p).powf(d) / self.p.powf(d - d / self.p)
        } else {
            self.ln_normalizer().exp()
        };
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::OutOfRange(format!(
                "normalizer overflows for p={}, d={}; use ln_normalizer",
                self.p, self.d
            )))
        }
    }

    pub fn ln_normalizer(&self) -> f64 {
        let d = self.d as f64;
        d * (2f64.ln() + ln_gamma(1.0 / self.p)) - (d - d / self.p) * self.p.ln()
    }

    /// E‖ξ‖_p^n = p^{n/p} Γ((d+n)/p) / Γ(d/p).
    pub fn norm_moment(&self, n: f64) -> Result<f64> {
        if !(n >= 0.0) {
            return Err(invalid(format!("moment order must be nonnegative, got {n}")));
        }
        let (p, d) = (self.p, self.d as f64);
        let k = n / p;
        if (k - k.round()).abs() < 1e-12 && k.round() <= 64.0 {
            // Γ(x + k)/Γ(x) as a finite product keeps integer cases exact
            let mut v = 1.0;
            for j in 0..k.round() as usize {
                v *= p * (d / p + j as f64);
            }
            return Ok(v);
        }
        Ok((k * p.ln() + ln_gamma((d + n) / p) - ln_gamma(d / p)).exp())
    }

    /// Variance of one coordinate: p^{2/p} Γ(3/p) / Γ(1/p).
    pub fn coordinate_variance(&self) -> f64 {
        let p = self.p;
        (2.0 / p * p.ln() + ln_gamma(3.0 / p) - ln_gamma(1.0 / p)).exp()
    }

    /// Log-density of a point.
    pub fn ln_density(&self, xi: &[f64]) -> f64 {
        -xi.iter().map(|t| t.abs().powf(self.p)).sum::<f64>() / self.p - self.ln_normalizer()
    }

    /// Fill `out` with i.i.d. coordinates from `rng`.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        if self.p == 2.0 {
            // |t|^2/2 ~ Gamma(1/2) is exactly a squared standard normal halved
            for t in out.iter_mut() {
                *t = rng.sample(StandardNormal);
            }
            return;
        }
        if self.p == 1.0 {
            // Gamma(1) is the unit exponential
            for t in out.iter_mut() {
                let mag: f64 = rng.sample(Exp1);
                *t = if rng.random::<bool>() { mag } else { -mag };
            }
            return;
        }
        let shape = 1.0 / self.p;
        for t in out.iter_mut() {
            let g = sample_gamma(shape, rng);
            let mag = (self.p * g).powf(shape);
            *t = if rng.random::<bool>() { mag } else { -mag };
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut v = vec![0.0; self.d];
        self.fill(rng, &mut v);
        v
    }
}

/// n×d batch; rows in chunk c come from stream `seed.child(c)`.
pub fn sample(params: &PGaussParams, seed: Seed, n: usize) -> Result<SampleBatch> {
    if n < 1 {
        return Err(invalid("sample count must be at least 1"));
    }
    let d = params.d;
    let parts = exec::map_indexed(chunks(n, SAMPLE_CHUNK).len(), |c| {
        let (_, len) = chunks(n, SAMPLE_CHUNK)[c];
        let mut rng = seed.child(c as u64).rng();
        let mut v = vec![0.0; len * d];
        params.fill(&mut rng, &mut v);
        v
    });
    Ok(SampleBatch::new(d, parts.concat()))
}

/// Gamma(shape, 1) by the Marsaglia–Tsang squeeze; shapes below one use
/// the boost G(a) = G(a+1)·U^{1/a}.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let u: f64 = 1.0 - rng.random::<f64>();
        return sample_gamma(shape + 1.0, rng) * u.powf(1.0 / shape);
    }
    let dd = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * dd).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = rng.random();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return dd * v;
        }
        if u.ln() < 0.5 * x2 + dd * (1.0 - v + v.ln()) {
            return dd * v;
        }
    }
}
