//! Grid densities for d ≤ 2: target normalisation, binned kernel density
//! estimates and histogram totals.

use crate::batch::SampleBatch;
use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::special::composite_rule;

/// log Z of π ∝ e^{−U}; the declared value when present, otherwise quadrature (d ≤ 2).
pub fn log_normalizer(model: &PotentialModel) -> Result<f64> {
    if let Some(z) = model.log_normalizer {
        return Ok(z);
    }
    let d = model.dim();
    if d > 2 {
        return Err(Error::Configuration(format!("normalizer of {} unknown in d = {d}", model.name())));
    }
    let u0 = model.value(&vec![0.0; d]);
    let mut t: f64 = 4.0;
    for _ in 0..40 {
        let probes: Vec<Vec<f64>> = if d == 1 { vec![vec![t], vec![-t]] } else { vec![vec![t, 0.0], vec![-t, 0.0], vec![0.0, t], vec![0.0, -t], vec![t, t], vec![-t, -t], vec![t, -t], vec![-t, t]] };
        if probes.iter().all(|x| model.value(x) - u0 > 60.0) {
            break;
        }
        t *= 1.5;
    }
    let panels = (t / 0.1).ceil() as usize;
    let (xs, ws) = composite_rule(-t, t, panels, 8);
    let mut acc = 0.0;
    if d == 1 {
        for (x, w) in xs.iter().zip(&ws) {
            acc += w * (u0 - model.value(&[*x])).exp();
        }
    } else {
        for (x, wx) in xs.iter().zip(&ws) {
            for (y, wy) in xs.iter().zip(&ws) {
                acc += wx * wy * (u0 - model.value(&[*x, *y])).exp();
            }
        }
    }
    Ok(acc.ln() - u0)
}

/// Regular grid of `n[k]` points per axis starting at `lo[k]` with spacing `step[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub lo: Vec<f64>,
    pub step: Vec<f64>,
    pub n: Vec<usize>,
}

impl Grid {
    pub fn cells(&self) -> usize {
        self.n.iter().product()
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n.len()];
        let mut r = idx;
        for k in (0..self.n.len()).rev() {
            out[k] = self.lo[k] + (r % self.n[k]) as f64 * self.step[k];
            r /= self.n[k];
        }
        out
    }

    pub fn volume(&self) -> f64 {
        self.step.iter().product()
    }
}

/// Linear binning of rows onto the grid nodes.
pub fn linear_bin(grid: &Grid, rows: impl Iterator<Item = impl AsRef<[f64]>>) -> Vec<f64> {
    let d = grid.n.len();
    let mut counts = vec![0.0; grid.cells()];
    for row in rows {
        let x = row.as_ref();
        let mut base = Vec::with_capacity(d);
        let mut frac = Vec::with_capacity(d);
        for k in 0..d {
            let t = ((x[k] - grid.lo[k]) / grid.step[k]).clamp(0.0, (grid.n[k] - 1) as f64 - 1e-9);
            let i = t.floor() as usize;
            base.push(i);
            frac.push(t - i as f64);
        }
        if d == 1 {
            counts[base[0]] += 1.0 - frac[0];
            counts[base[0] + 1] += frac[0];
        } else {
            let n1 = grid.n[1];
            for (di, wi) in [(0, 1.0 - frac[0]), (1, frac[0])] {
                for (dj, wj) in [(0, 1.0 - frac[1]), (1, frac[1])] {
                    counts[(base[0] + di) * n1 + base[1] + dj] += wi * wj;
                }
            }
        }
    }
    counts
}

/// Separable convolution with a truncated, normalised Gaussian of width
/// `h[k]` along each axis; values outside the grid count as zero.
pub fn gaussian_smooth(grid: &Grid, values: &[f64], h: &[f64]) -> Vec<f64> {
    let d = grid.n.len();
    let mut cur = values.to_vec();
    for axis in 0..d {
        let half = (5.0 * h[axis] / grid.step[axis]).ceil() as isize;
        let mut k: Vec<f64> = (-half..=half).map(|m| (-0.5 * (m as f64 * grid.step[axis] / h[axis]).powi(2)).exp()).collect();
        let s: f64 = k.iter().sum();
        k.iter_mut().for_each(|v| *v /= s);
        let n = grid.n[axis] as isize;
        let stride: usize = grid.n[axis + 1..].iter().product();
        let mut next = vec![0.0; cur.len()];
        for (idx, out) in next.iter_mut().enumerate() {
            let pos = ((idx / stride) % grid.n[axis]) as isize;
            let origin = idx as isize - pos * stride as isize;
            let mut acc = 0.0;
            for (t, w) in k.iter().enumerate() {
                let j = pos + t as isize - half;
                if j >= 0 && j < n {
                    acc += w * cur[(origin + j * stride as isize) as usize];
                }
            }
            *out = acc;
        }
        cur = next;
    }
    cur
}

/// Rows sorted lexicographically, so estimators do not depend on row order.
pub fn canonical(samples: &SampleBatch) -> SampleBatch {
    let mut rows: Vec<&[f64]> = samples.rows().collect();
    rows.sort_by(|a, b| {
        for (x, y) in a.iter().zip(b.iter()) {
            match x.total_cmp(y) {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        std::cmp::Ordering::Equal
    });
    let mut data = Vec::with_capacity(samples.as_slice().len());
    for r in rows {
        data.extend_from_slice(r);
    }
    SampleBatch::new(samples.dim(), data)
}


pub fn column_range(samples: &SampleBatch, k: usize) -> (f64, f64) {
    samples.rows().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[k]), hi.max(r[k])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Builtin;

    #[test]
    fn quadrature_normalizer_matches_declared() {
        for d in [1, 2] {
            let mut m = Builtin::parse("cosine_perturbed_quadratic", "").unwrap().build(d).unwrap();
            let declared = m.log_normalizer.take().unwrap();
            assert!((log_normalizer(&m).unwrap() - declared).abs() < 1e-8);
        }
    }

    #[test]
    fn smoothing_preserves_interior_mass() {
        let g = Grid { lo: vec![-5.0], step: vec![0.01], n: vec![1001] };
        let mut v = vec![0.0; 1001];
        v[500] = 1.0;
        let s = gaussian_smooth(&g, &v, &[0.1]);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
