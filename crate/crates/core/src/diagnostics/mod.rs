//! Empirical divergence and distance estimators, and the inequality
//! cross-checks built on them.

mod density;
mod knn;
mod w2;

use rand::seq::index::sample as sample_indices;
use rand::Rng;

pub use density::{canonical, log_normalizer, Grid};
pub use knn::KdTree;
pub use w2::{assignment, w2_squared_matching, w2_squared_sorted};

use crate::batch::SampleBatch;
use crate::error::{invalid, Error, Result};
use crate::exec::map_indexed;
use crate::potential::{DissipativitySpec, PotentialModel};
use crate::rng::Seed;
use crate::smoothing::smoothed_value_1d;
use crate::special::{digamma, ln_gamma};

pub const BOOTSTRAP: usize = 200;
pub const MIN_SAMPLES: usize = 100;
pub const W2_MIN_SAMPLES: usize = 64;
pub const W2_SUBSAMPLE: usize = 512;
pub const W2_DRAWS: usize = 8;
pub const KNN_K: usize = 5;

/// An estimate with its standard error. `bias` is the estimated bias already
/// removed from `estimate`; `negative` flags estimates below zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Measured {
    pub estimate: f64,
    pub stderr: f64,
    pub method: &'static str,
    pub bias: f64,
    pub negative: bool,
}

impl Measured {
    fn new(estimate: f64, stderr: f64, method: &'static str, bias: f64) -> Self {
        Measured { estimate, stderr, method, bias, negative: estimate < 0.0 }
    }

    /// |estimate − value| ≤ z·stderr.
    pub fn within(&self, value: f64, z: f64) -> bool {
        (self.estimate - value).abs() <= z * self.stderr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KlMethod {
    Quadrature,
    Knn,
}

impl KlMethod {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "quadrature" => Ok(KlMethod::Quadrature),
            "knn" => Ok(KlMethod::Knn),
            _ => Err(Error::Configuration(format!("unknown KL method `{s}` (quadrature | knn)"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KlMethod::Quadrature => "quadrature",
            KlMethod::Knn => "knn",
        }
    }
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, var.sqrt())
}

fn need(samples: &SampleBatch, n: usize) -> Result<()> {
    if samples.len() < n {
        return Err(Error::InsufficientSamples { needed: n, got: samples.len() });
    }
    Ok(())
}

fn check_dim(samples: &SampleBatch, model: &PotentialModel) -> Result<()> {
    if samples.dim() != model.dim() {
        return Err(invalid(format!("samples have d = {}, model has d = {}", samples.dim(), model.dim())));
    }
    Ok(())
}

/// KL(N(0, σ_p² I) ‖ N(0, σ_q² I)) in d dimensions.
pub fn kl_gaussian(p_var: f64, q_var: f64, d: usize) -> Result<f64> {
    if !(p_var > 0.0 && q_var > 0.0) {
        return Err(invalid(format!("variances must be positive, got {p_var} and {q_var}")));
    }
    let r = p_var / q_var;
    Ok(0.5 * d as f64 * (r - 1.0 - r.ln()))
}

/// KL(p ‖ π) from samples of p.
///
/// `Quadrature` (d ≤ 2) compares a binned Gaussian KDE of the samples with
/// π smoothed by the same kernel on a grid, bootstrap bias-corrected.
/// `Knn` uses the k = 5 Kozachenko–Leonenko entropy estimate.
pub fn kl_estimate(samples: &SampleBatch, model: &PotentialModel, method: KlMethod, seed: Seed) -> Result<Measured> {
    need(samples, MIN_SAMPLES)?;
    check_dim(samples, model)?;
    let s = canonical(samples);
    let lnz = log_normalizer(model)?;
    match method {
        KlMethod::Quadrature => kl_quadrature(&s, model, lnz, seed),
        KlMethod::Knn => kl_knn(&s, model, lnz, seed),
    }
}

fn kl_quadrature(s: &SampleBatch, model: &PotentialModel, lnz: f64, seed: Seed) -> Result<Measured> {
    let d = s.dim();
    if d > 2 {
        return Err(Error::Configuration(format!("quadrature KL needs d <= 2, got {d}")));
    }
    let n = s.len();
    let factor = (4.0 / (d as f64 + 2.0)).powf(1.0 / (d as f64 + 4.0)) * (n as f64).powf(-1.0 / (d as f64 + 4.0));
    let mut h = Vec::new();
    let mut lo = Vec::new();
    let mut step = Vec::new();
    let mut cells = Vec::new();
    for k in 0..d {
        let col = s.column(k);
        let (_, sd) = mean_sd(&col);
        let hk = (sd * factor).max(1e-12);
        let (mn, mx) = density::column_range(s, k);
        let (a, b) = (mn - 10.0 * hk, mx + 10.0 * hk);
        let cap = if d == 1 { 8192.0 } else { 300.0 };
        let dx = (hk / if d == 1 { 4.0 } else { 2.0 }).max((b - a) / cap);
        h.push(hk);
        lo.push(a);
        step.push(dx);
        cells.push(((b - a) / dx).ceil() as usize + 1);
    }
    let grid = Grid { lo, step, n: cells };
    let vol = grid.volume();
    let target: Vec<f64> = (0..grid.cells()).map(|j| (-model.value(&grid.point(j)) - lnz).exp()).collect();
    let target = density::gaussian_smooth(&grid, &target, &h);
    let kl_of = |counts: Vec<f64>| -> f64 {
        let p = density::gaussian_smooth(&grid, &counts, &h);
        let mut acc = 0.0;
        for (pj, qj) in p.iter().zip(&target) {
            if *pj > 0.0 {
                let dens = pj / (n as f64 * vol);
                acc += dens * (dens / qj.max(1e-300)).ln() * vol;
            }
        }
        acc
    };
    let point = kl_of(density::linear_bin(&grid, s.rows()));
    let boot = map_indexed(BOOTSTRAP, |b| {
        let mut rng = seed.child(b as u64).rng();
        let rows = (0..n).map(|_| s.row(rng.random_range(0..n)));
        kl_of(density::linear_bin(&grid, rows))
    });
    let (bmean, bsd) = mean_sd(&boot);
    let bias = bmean - point;
    Ok(Measured::new(point - bias, bsd, "quadrature", bias))
}

fn kl_knn(s: &SampleBatch, model: &PotentialModel, lnz: f64, seed: Seed) -> Result<Measured> {
    let d = s.dim();
    if d > 10 {
        return Err(Error::Configuration(format!("kNN KL supports d <= 10, got {d}")));
    }
    let n = s.len();
    let tree = KdTree::new(s);
    let terms = map_indexed(n, |i| {
        let eps = tree.kth_distance(i, KNN_K);
        model.value(s.row(i)) + lnz - d as f64 * eps.ln()
    });
    if terms.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain("duplicate sample points give zero neighbour distance".into()));
    }
    let ln_vd = 0.5 * d as f64 * std::f64::consts::PI.ln() - ln_gamma(0.5 * d as f64 + 1.0);
    let shift = digamma(KNN_K as f64) - digamma(n as f64) - ln_vd;
    let (m, _) = mean_sd(&terms);
    let boot = map_indexed(BOOTSTRAP, |b| {
        let mut rng = seed.child(b as u64).rng();
        (0..n).map(|_| terms[rng.random_range(0..n)]).sum::<f64>() / n as f64
    });
    let (_, bsd) = mean_sd(&boot);
    Ok(Measured::new(m + shift, bsd, "knn", 0.0))
}

/// Mean absolute deviation of a Poisson(m) variable.
fn poisson_mad(m: f64) -> f64 {
    if m <= 0.0 {
        return 0.0;
    }
    let k = m.floor();
    2.0 * (-m + (k + 1.0) * m.ln() - ln_gamma(k + 1.0)).exp()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - f) + sorted[i + 1] * f
    } else {
        sorted[i]
    }
}

/// TV(p, π): half the L¹ distance between a Freedman–Diaconis histogram
/// (≤ 256 bins per axis) and the π-mass of each bin. The expected value of
/// this statistic under p = π (a Poisson noise floor) is reported as the
/// bias and subtracted.
pub fn tv_estimate(samples: &SampleBatch, model: &PotentialModel, seed: Seed) -> Result<Measured> {
    need(samples, MIN_SAMPLES)?;
    check_dim(samples, model)?;
    let d = samples.dim();
    if d > 2 {
        return Err(Error::Configuration(format!("TV estimate needs d <= 2, got {d}")));
    }
    let s = canonical(samples);
    let n = s.len();
    let lnz = log_normalizer(model)?;
    let mut edges = Vec::new();
    for k in 0..d {
        let mut col = s.column(k);
        col.sort_by(f64::total_cmp);
        let iqr = quantile(&col, 0.75) - quantile(&col, 0.25);
        let (mn, mx) = (col[0], col[n - 1]);
        let width = 2.0 * iqr * (n as f64).powf(-1.0 / 3.0);
        let nb = if width > 0.0 { ((mx - mn) / width).ceil().clamp(1.0, 256.0) as usize } else { 1 };
        let pad = 1e-9 * (mx - mn).abs().max(1.0);
        edges.push((mn - pad, (mx - mn + 2.0 * pad) / nb as f64, nb));
    }
    let nbins: usize = edges.iter().map(|e| e.2).product();
    let bin_of = |x: &[f64]| -> usize {
        let mut idx = 0;
        for (k, &(lo, w, nb)) in edges.iter().enumerate() {
            let i = (((x[k] - lo) / w).floor().max(0.0) as usize).min(nb - 1);
            idx = idx * nb + i;
        }
        idx
    };
    let (gx, gw) = crate::special::gauss_legendre(4);
    let mass = map_indexed(nbins, |b| {
        let mut r = b;
        let mut cell = vec![0usize; d];
        for k in (0..d).rev() {
            cell[k] = r % edges[k].2;
            r /= edges[k].2;
        }
        let mut acc = 0.0;
        let node = |k: usize, t: f64| edges[k].0 + (cell[k] as f64 + 0.5 * (t + 1.0)) * edges[k].1;
        if d == 1 {
            for (t, w) in gx.iter().zip(&gw) {
                acc += 0.5 * w * edges[0].1 * (-model.value(&[node(0, *t)]) - lnz).exp();
            }
        } else {
            for (t, w) in gx.iter().zip(&gw) {
                for (u, v) in gx.iter().zip(&gw) {
                    acc += 0.25 * w * v * edges[0].1 * edges[1].1 * (-model.value(&[node(0, *t), node(1, *u)]) - lnz).exp();
                }
            }
        }
        acc
    });
    let outside = (1.0 - mass.iter().sum::<f64>()).max(0.0);
    let tv_of = |counts: &[f64]| -> f64 {
        0.5 * (counts.iter().zip(&mass).map(|(c, m)| (c / n as f64 - m).abs()).sum::<f64>() + outside)
    };
    let mut counts = vec![0.0; nbins];
    for r in s.rows() {
        counts[bin_of(r)] += 1.0;
    }
    let raw = tv_of(&counts);
    let floor = 0.5 * mass.iter().map(|m| poisson_mad(n as f64 * m)).sum::<f64>() / n as f64;
    let boot = map_indexed(BOOTSTRAP, |b| {
        let mut rng = seed.child(b as u64).rng();
        let mut c = vec![0.0; nbins];
        for _ in 0..n {
            c[bin_of(s.row(rng.random_range(0..n)))] += 1.0;
        }
        tv_of(&c)
    });
    let (_, bsd) = mean_sd(&boot);
    Ok(Measured::new(raw - floor, bsd, "histogram", floor))
}

/// Reference side of a W₂ estimate.
#[derive(Debug, Clone, Copy)]
pub enum W2Reference<'a> {
    Batch(&'a SampleBatch),
    /// d = 1 only: quantiles of π by quadrature.
    Model(&'a PotentialModel),
}

/// Quantile function of π in d = 1 on a fine grid.
pub struct Quantiles {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl Quantiles {
    pub fn from_log_density(xs: Vec<f64>, logp: &[f64]) -> Quantiles {
        let mx = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let p: Vec<f64> = logp.iter().map(|l| (l - mx).exp()).collect();
        let mut cdf = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            cdf[i] = cdf[i - 1] + 0.5 * (p[i] + p[i - 1]) * (xs[i] - xs[i - 1]);
        }
        let total = cdf[cdf.len() - 1];
        cdf.iter_mut().for_each(|c| *c /= total);
        Quantiles { xs, cdf }
    }

    pub fn for_model(model: &PotentialModel) -> Result<Quantiles> {
        let (xs, _) = support_grid(model, 20_001)?;
        let logp: Vec<f64> = xs.iter().map(|x| -model.value(&[*x])).collect();
        Ok(Quantiles::from_log_density(xs, &logp))
    }

    pub fn inverse(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.xs[i - 1] + t * (self.xs[i] - self.xs[i - 1])
    }

    /// ∫ x² dπ by the trapezoid rule on the grid.
    pub fn second_moment(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.xs.len() {
            let m = 0.5 * (self.xs[i] + self.xs[i - 1]);
            acc += m * m * (self.cdf[i] - self.cdf[i - 1]);
        }
        acc
    }
}

fn support_grid(model: &PotentialModel, n: usize) -> Result<(Vec<f64>, f64)> {
    if model.dim() != 1 {
        return Err(Error::Configuration(format!("quantile construction needs d = 1, got {}", model.dim())));
    }
    let u0 = model.value(&[0.0]);
    let mut t: f64 = 4.0;
    for _ in 0..40 {
        if model.value(&[t]) - u0 > 50.0 && model.value(&[-t]) - u0 > 50.0 {
            break;
        }
        t *= 1.25;
    }
    let xs: Vec<f64> = (0..n).map(|i| -t + 2.0 * t * i as f64 / (n - 1) as f64).collect();
    Ok((xs, t))
}

/// W₂(p, q). In d = 1 the sorted (quantile) coupling is exact; W₂² is
/// bootstrap bias-corrected and reported as a signed square root. In d ≥ 2
/// the mean over 8 exact assignments on subsamples of ≤ 512 points; batches
/// of equal length share the subsample indices.
pub fn w2_estimate(p: &SampleBatch, q: W2Reference<'_>, seed: Seed) -> Result<Measured> {
    need(p, W2_MIN_SAMPLES)?;
    let d = p.dim();
    if d == 1 {
        let mut a = p.column(0);
        a.sort_by(f64::total_cmp);
        let reference: Option<Vec<f64>> = match q {
            W2Reference::Batch(b) => {
                need(b, W2_MIN_SAMPLES)?;
                if b.dim() != 1 {
                    return Err(invalid("W2 batches must have the same dimension"));
                }
                let mut v = b.column(0);
                v.sort_by(f64::total_cmp);
                Some(v)
            }
            W2Reference::Model(_) => None,
        };
        let quant = match q {
            W2Reference::Model(m) => Some(Quantiles::for_model(m)?),
            W2Reference::Batch(_) => None,
        };
        let w_of = |a: &[f64], b: Option<&[f64]>| -> f64 {
            match b {
                Some(b) => w2_squared_sorted(a, b),
                None => {
                    let qf = quant.as_ref().expect("model quantiles");
                    let n = a.len() as f64;
                    a.iter().enumerate().map(|(i, x)| (x - qf.inverse((i as f64 + 0.5) / n)).powi(2)).sum::<f64>() / n
                }
            }
        };
        if reference.as_deref() == Some(&a[..]) {
            return Ok(Measured::new(0.0, 0.0, "quantile", 0.0));
        }
        let point = w_of(&a, reference.as_deref());
        let boot = map_indexed(BOOTSTRAP, |bi| {
            let mut rng = seed.child(bi as u64).rng();
            let mut ra: Vec<f64> = (0..a.len()).map(|_| a[rng.random_range(0..a.len())]).collect();
            ra.sort_by(f64::total_cmp);
            let rb = reference.as_ref().map(|b| {
                let mut v: Vec<f64> = (0..b.len()).map(|_| b[rng.random_range(0..b.len())]).collect();
                v.sort_by(f64::total_cmp);
                v
            });
            w_of(&ra, rb.as_deref())
        });
        let (bmean, bsd) = mean_sd(&boot);
        let corrected = 2.0 * point - bmean;
        let est = corrected.signum() * corrected.abs().sqrt();
        let se = bsd / (corrected.abs() + bsd).sqrt().max(1e-300);
        return Ok(Measured::new(est, se, "quantile", point.sqrt() - est));
    }
    let b = match q {
        W2Reference::Batch(b) => b,
        W2Reference::Model(_) => return Err(Error::Configuration("W2 against a model needs d = 1; pass reference samples".into())),
    };
    need(b, W2_MIN_SAMPLES)?;
    if b.dim() != d {
        return Err(invalid("W2 batches must have the same dimension"));
    }
    let m = W2_SUBSAMPLE.min(p.len()).min(b.len());
    let draws = map_indexed(W2_DRAWS, |k| {
        let mut rng = seed.child(k as u64).rng();
        let ia = sample_indices(&mut rng, p.len(), m).into_vec();
        let ib = if b.len() == p.len() { ia.clone() } else { sample_indices(&mut rng, b.len(), m).into_vec() };
        let ra: Vec<&[f64]> = ia.iter().map(|&i| p.row(i)).collect();
        let rb: Vec<&[f64]> = ib.iter().map(|&i| b.row(i)).collect();
        w2_squared_matching(&ra, &rb).sqrt()
    });
    let (mean, sd) = mean_sd(&draws);
    Ok(Measured::new(mean, sd / (W2_DRAWS as f64).sqrt(), "assignment", 0.0))
}

/// A measured left-hand side against a formula right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Combined standard error used as slack (3×).
    pub stderr: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, lhs: f64, rhs: f64, stderr: f64) -> Check {
        Check { name: name.to_string(), lhs, rhs, stderr, pass: lhs <= rhs + 3.0 * stderr }
    }
}

/// TV ≤ √(KL/2).
pub fn pinsker_check(kl: &Measured, tv: &Measured) -> Check {
    let k = kl.estimate.max(0.0);
    let rhs = (k / 2.0).sqrt();
    let floor = k.max(kl.stderr).max(1e-300);
    let se_rhs = kl.stderr / (2.0 * (2.0 * floor).sqrt());
    Check::new("pinsker", tv.estimate, rhs, (tv.stderr.powi(2) + se_rhs.powi(2)).sqrt())
}

/// W₂ ≤ √(2 KL/γ).
pub fn talagrand_check(kl: &Measured, w2: &Measured, gamma: f64) -> Check {
    let k = kl.estimate.max(0.0);
    let rhs = (2.0 * k / gamma).sqrt();
    let floor = k.max(kl.stderr).max(1e-300);
    let se_rhs = kl.stderr / (2.0 * gamma * floor).sqrt();
    Check::new("talagrand", w2.estimate, rhs, (w2.stderr.powi(2) + se_rhs.powi(2)).sqrt())
}

/// E‖∇U‖² ≤ 2(Σ L_i)² d^{3/p}.
pub fn grad_moment_check(samples: &SampleBatch, model: &PotentialModel, p: f64) -> Result<Check> {
    need(samples, 2)?;
    check_dim(samples, model)?;
    let vals = map_indexed(samples.len(), |i| model.gradient_vec(samples.row(i)).iter().map(|g| g * g).sum::<f64>());
    let (m, sd) = mean_sd(&vals);
    let rhs = 2.0 * model.smoothness.l_sum().powi(2) * (model.dim() as f64).powf(3.0 / p);
    Ok(Check::new("grad_moment", m, rhs, sd / (vals.len() as f64).sqrt()))
}

/// The constants d̃ and μ̃ of the moment-from-KL bound.
pub fn moment_constants(model: &PotentialModel, diss: &DissipativitySpec) -> (f64, f64) {
    let (a, b, beta) = (diss.a, diss.b, diss.beta);
    let d = model.dim() as f64;
    let d_tilde = (d / beta) * ((beta / 2.0) * std::f64::consts::PI.ln() + (4.0 * beta / a).ln() + (1.0 - beta / 2.0) * (d / (2.0 * std::f64::consts::E)).ln());
    let sum: f64 = model.smoothness.components().iter().map(|&(l, al)| (l / (al + 1.0)) * (2.0 * b / a).powf((al + 1.0) / beta)).sum();
    let mu_tilde = 0.5 * (2.0 / beta).ln() + sum + b + model.value(&vec![0.0; model.dim()]).abs();
    (d_tilde, mu_tilde)
}

/// E_ρ‖x‖^β ≤ (4β/a)(H(ρ|π) + d̃ + μ̃) given a trusted upper bound on H.
pub fn moment_from_kl_check(samples: &SampleBatch, model: &PotentialModel, kl_upper: f64) -> Result<Check> {
    need(samples, 2)?;
    check_dim(samples, model)?;
    let diss = model.dissipativity.ok_or_else(|| Error::Configuration(format!("{} declares no dissipativity", model.name())))?;
    let (dt, mt) = moment_constants(model, &diss);
    let vals: Vec<f64> = samples.rows().map(|r| r.iter().map(|t| t * t).sum::<f64>().powf(diss.beta / 2.0)).collect();
    let (m, sd) = mean_sd(&vals);
    let rhs = (4.0 * diss.beta / diss.a) * (kl_upper + dt + mt);
    Ok(Check::new("moment_from_kl", m, rhs, sd / (vals.len() as f64).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares of log KL on log η.
pub fn bias_scaling_fit(etas: &[f64], kls: &[f64]) -> Result<Fit> {
    if etas.len() != kls.len() || etas.len() < 4 {
        return Err(invalid(format!("need at least 4 (eta, KL) pairs, got {} and {}", etas.len(), kls.len())));
    }
    if etas.iter().chain(kls).any(|v| !(*v > 0.0)) {
        return Err(invalid("eta and KL values must be positive"));
    }
    let x: Vec<f64> = etas.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = kls.iter().map(|k| k.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(invalid("eta values must not all be equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(Fit { slope, intercept, r2 })
}

/// W₂²(π, π_μ) ≤ 8.24 N L μ^{1+α} d^{2/p} E₂ in d = 1, with π_μ ∝ e^{−U_μ}
/// built by quadrature and W₂² estimated from `n` common-uniform
/// inverse-CDF pairs (the optimal coupling in one dimension).
pub fn smoothing_w2_check(model: &PotentialModel, mu: f64, p: f64, e2: Option<f64>, n: usize, seed: Seed) -> Result<Check> {
    if model.dim() != 1 {
        return Err(Error::Configuration(format!("smoothing W2 check needs d = 1, got {}", model.dim())));
    }
    if !(0.0..=0.05).contains(&mu) {
        return Err(invalid(format!("need 0 <= mu <= 0.05, got {mu}")));
    }
    need(&SampleBatch::new(1, vec![0.0; n]), 2)?;
    let (xs, _) = support_grid(model, 4001)?;
    let lp: Vec<f64> = xs.iter().map(|x| -model.value(&[*x])).collect();
    let lq = map_indexed(xs.len(), |i| -smoothed_value_1d(model, mu, p, xs[i]));
    let qp = Quantiles::from_log_density(xs.clone(), &lp);
    let qq = Quantiles::from_log_density(xs, &lq);
    let e2 = e2.unwrap_or_else(|| qp.second_moment());
    let mut rng = seed.rng();
    let diffs: Vec<f64> = (0..n).map(|_| {
        let u: f64 = rng.random();
        (qp.inverse(u) - qq.inverse(u)).powi(2)
    }).collect();
    let (m, sd) = mean_sd(&diffs);
    let spec = &model.smoothness;
    let rhs = 8.24 * spec.n() as f64 * spec.l_max() * mu.powf(1.0 + spec.alpha()) * (model.dim() as f64).powf(2.0 / p) * e2;
    Ok(Check::new("smoothing_w2", m, rhs, sd / (n as f64).sqrt()))
}

/// Estimates and checks from one diagnostics pass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsReport {
    pub kl: Option<Measured>,
    pub tv: Option<Measured>,
    pub w2: Option<Measured>,
    pub checks: Vec<Check>,
}

impl DiagnosticsReport {
    pub const HEADER: [&'static str; 7] = ["quantity", "method", "estimate", "stderr", "bias", "rhs", "pass"];

    /// One row per estimate and per check; Fisher information is listed as
    /// not estimated.
    pub fn rows(&self) -> Vec<[String; 7]> {
        let mut out = Vec::new();
        for (name, m) in [("kl", &self.kl), ("tv", &self.tv), ("w2", &self.w2)] {
            if let Some(m) = m {
                out.push([name.into(), m.method.into(), fmt(m.estimate), fmt(m.stderr), fmt(m.bias), String::new(), if m.negative { "negative".into() } else { String::new() }]);
            }
        }
        out.push(["fisher".into(), "not-estimated".into(), String::new(), String::new(), String::new(), String::new(), String::new()]);
        for c in &self.checks {
            out.push([c.name.clone(), "check".into(), fmt(c.lhs), fmt(c.stderr), String::new(), fmt(c.rhs), c.pass.to_string()]);
        }
        out
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// 17 significant digits.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests;
