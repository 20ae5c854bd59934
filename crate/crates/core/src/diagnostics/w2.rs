//! Empirical 2-Wasserstein distances: quantile coupling in d = 1 and exact
//! assignment on subsamples in higher dimension.

/// W₂² between two 1-D empirical measures given sorted samples.
pub fn w2_squared_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    if n == m {
        return a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n as f64;
    }
    // integrate (F⁻¹ − G⁻¹)² over the merged breakpoints i/n, j/m
    let (mut i, mut j) = (0usize, 0usize);
    let mut u = 0.0;
    let mut acc = 0.0;
    while i < n && j < m {
        let ui = (i + 1) as f64 / n as f64;
        let uj = (j + 1) as f64 / m as f64;
        let next = ui.min(uj);
        acc += (next - u) * (a[i] - b[j]).powi(2);
        u = next;
        if ui <= uj {
            i += 1;
        }
        if uj <= ui {
            j += 1;
        }
    }
    acc
}

/// Minimum-cost perfect matching (Hungarian method, shortest augmenting
/// paths). Returns the column assigned to each row.
pub fn assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}

/// W₂² between two equal-size point clouds by exact assignment.
pub fn w2_squared_matching(a: &[&[f64]], b: &[&[f64]]) -> f64 {
    let cost: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| x.iter().zip(y.iter()).map(|(s, t)| (s - t) * (s - t)).sum()).collect()).collect();
    let m = assignment(&cost);
    m.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>() / a.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unequal_sizes_use_quantile_functions() {
        // F⁻¹ = 0 on the lower half, 1 on the upper; G⁻¹ = 0.5
        let w = w2_squared_sorted(&[0.0, 1.0], &[0.5]);
        assert!((w - 0.25).abs() < 1e-15);
        let w = w2_squared_sorted(&[0.0, 1.0, 2.0], &[0.0, 2.0]);
        assert!((w - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn assignment_beats_every_permutation() {
        let cost = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        let m = assignment(&cost);
        let total: f64 = m.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let best = perms.iter().map(|p| (0..3).map(|i| cost[i][p[i]]).sum::<f64>()).fold(f64::INFINITY, f64::min);
        assert_eq!(total, best);
    }
}
