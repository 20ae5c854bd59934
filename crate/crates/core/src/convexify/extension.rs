//! Convex extension V of a function known outside the ball ‖x‖ ≥ R.
//!
//! d = 1: V is the chord between the values at ±R.
//! d = 2: V is the lower convex hull of the lifted boundary samples
//! (x_j, Ũ(x_j)), x_j equally spaced on the circle. The hull is built by
//! gift wrapping over contiguous index ranges of the (convex) boundary
//! polygon, which yields a triangulation whose facet planes give
//! V = max_f P_f on the polygon.
//!
//! The hull is raised by an offset c so that it strictly dominates Ũ on
//! the circle; in a thin band outside the circle V = max(hull + c, Ũ).
//! V equals Ũ exactly beyond `agreement_radius`.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy)]
struct Plane {
    a: f64,
    b: f64,
    c: f64,
}

impl Plane {
    fn through(p: [(f64, f64, f64); 3]) -> Option<Plane> {
        let (x0, y0, z0) = p[0];
        let (ux, uy, uz) = (p[1].0 - x0, p[1].1 - y0, p[1].2 - z0);
        let (vx, vy, vz) = (p[2].0 - x0, p[2].1 - y0, p[2].2 - z0);
        let nz = ux * vy - uy * vx;
        if nz.abs() < 1e-300 {
            return None;
        }
        let nx = uy * vz - uz * vy;
        let ny = uz * vx - ux * vz;
        let a = -nx / nz;
        let b = -ny / nz;
        Some(Plane { a, b, c: z0 - a * x0 - b * y0 })
    }

    #[inline]
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.a * x + self.b * y + self.c
    }
}

/// Lower hull of lifted points on a circle.
#[derive(Debug, Clone)]
pub struct DiskHull {
    r: f64,
    pts: Vec<(f64, f64, f64)>,
    planes: Vec<Plane>,
    triangles: Vec<[usize; 3]>,
    grid: usize,
    cells: Vec<Vec<u32>>,
    inner_radius: f64,
    offset: f64,
    agreement_radius: f64,
}

impl DiskHull {
    /// Hull of `values[j]` at angle 2πj/M on the circle of radius `r`.
    pub fn new(r: f64, values: &[f64]) -> DiskHull {
        let m = values.len();
        assert!(m >= 3);
        let pts: Vec<(f64, f64, f64)> = (0..m)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / m as f64;
                (r * t.cos(), r * t.sin(), values[j])
            })
            .collect();
        let triangles = lower_hull_triangles(&pts);
        let planes: Vec<Plane> = triangles
            .iter()
            .map(|t| Plane::through([pts[t[0]], pts[t[1]], pts[t[2]]]).expect("boundary points are in convex position"))
            .collect();
        let grid = (m / 6).clamp(8, 256);
        let mut hull = DiskHull {
            r,
            pts,
            planes,
            triangles,
            grid,
            cells: vec![Vec::new(); grid * grid],
            inner_radius: r * (PI / m as f64).cos() * (1.0 - 1e-12),
            offset: 0.0,
            agreement_radius: r,
        };
        hull.bucket();
        hull
    }

    fn cell_bounds(&self, i: usize, j: usize) -> (f64, f64, f64, f64) {
        let w = 2.0 * self.r / self.grid as f64;
        let x0 = -self.r + i as f64 * w;
        let y0 = -self.r + j as f64 * w;
        (x0, y0, x0 + w, y0 + w)
    }

    fn bucket(&mut self) {
        let w = 2.0 * self.r / self.grid as f64;
        let pad = 1e-9 * self.r;
        for (ti, t) in self.triangles.iter().enumerate() {
            let p: Vec<(f64, f64)> = t.iter().map(|&k| (self.pts[k].0, self.pts[k].1)).collect();
            let (xmin, xmax) = (p.iter().map(|q| q.0).fold(f64::INFINITY, f64::min), p.iter().map(|q| q.0).fold(f64::NEG_INFINITY, f64::max));
            let (ymin, ymax) = (p.iter().map(|q| q.1).fold(f64::INFINITY, f64::min), p.iter().map(|q| q.1).fold(f64::NEG_INFINITY, f64::max));
            let to_cell = |v: f64| (((v + self.r) / w).floor().max(0.0) as usize).min(self.grid - 1);
            for i in to_cell(xmin - pad)..=to_cell(xmax + pad) {
                for j in to_cell(ymin - pad)..=to_cell(ymax + pad) {
                    let b = self.cell_bounds(i, j);
                    if triangle_meets_box(&p, (b.0 - pad, b.1 - pad, b.2 + pad, b.3 + pad)) {
                        self.cells[i * self.grid + j].push(ti as u32);
                    }
                }
            }
        }
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Raise the hull so it dominates `ut` on the circle, and find the radius
    /// beyond which `ut` dominates the raised hull.
    pub fn calibrate(&mut self, ut: &dyn Fn(&[f64]) -> f64, outer: f64) {
        let m = self.pts.len();
        let sub = 64;
        let mut worst: f64 = 0.0;
        let mut zmax: f64 = 0.0;
        for k in 0..m * sub {
            let t = 2.0 * PI * k as f64 / (m * sub) as f64;
            let (x, y) = (self.r * t.cos(), self.r * t.sin());
            let u = ut(&[x, y]);
            zmax = zmax.max(u.abs());
            worst = worst.max(u - self.global(x, y));
        }
        self.offset = 1.05 * worst + 1e-12 * (1.0 + zmax);
        // radial scan for the band where the raised hull can still exceed Ũ
        let n_ang = 8 * m;
        let n_rad = 512;
        let dr = (outer - self.r) / n_rad as f64;
        let h = 1e-7 * outer;
        let mut band: f64 = 0.0;
        for k in 0..n_ang {
            let t = 2.0 * PI * k as f64 / n_ang as f64;
            let (c, s) = (t.cos(), t.sin());
            let spacing = dr.max(2.0 * PI * outer / n_ang as f64);
            for i in (0..=n_rad).rev() {
                let rr = self.r + i as f64 * dr;
                let (x, y) = (rr * c, rr * s);
                let (hv, pi) = self.global_arg(x, y);
                let u = ut(&[x, y]);
                let gx = (ut(&[x + h, y]) - ut(&[x - h, y])) / (2.0 * h);
                let gy = (ut(&[x, y + h]) - ut(&[x, y - h])) / (2.0 * h);
                let slope = self.planes[pi].a.hypot(self.planes[pi].b) + gx.hypot(gy);
                if hv + self.offset - u > -2.0 * slope * spacing {
                    band = band.max((i + 2) as f64 * dr);
                    break;
                }
            }
        }
        self.agreement_radius = (self.r + band).min(outer);
    }

    fn global_arg(&self, x: f64, y: f64) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, p) in self.planes.iter().enumerate() {
            let v = p.eval(x, y);
            if v > best.0 {
                best = (v, i);
            }
        }
        best
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn agreement_radius(&self) -> f64 {
        self.agreement_radius
    }

    fn global(&self, x: f64, y: f64) -> f64 {
        self.planes.iter().map(|p| p.eval(x, y)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Unshifted hull value (max over facet planes).
    pub fn hull(&self, x: f64, y: f64) -> f64 {
        if x.hypot(y) < self.inner_radius {
            let w = 2.0 * self.r / self.grid as f64;
            let i = (((x + self.r) / w).floor().max(0.0) as usize).min(self.grid - 1);
            let j = (((y + self.r) / w).floor().max(0.0) as usize).min(self.grid - 1);
            let cell = &self.cells[i * self.grid + j];
            if !cell.is_empty() {
                return cell.iter().map(|&t| self.planes[t as usize].eval(x, y)).fold(f64::NEG_INFINITY, f64::max);
            }
        }
        self.global(x, y)
    }

    /// V at an arbitrary point, given Ũ there.
    pub fn value(&self, x: f64, y: f64, ut: impl FnOnce() -> f64) -> f64 {
        let r = x.hypot(y);
        if r < self.r {
            self.hull(x, y) + self.offset
        } else if r < self.agreement_radius {
            f64::max(self.global(x, y) + self.offset, ut())
        } else {
            ut()
        }
    }
}

/// Lower-hull triangulation of lifted points whose projections are in
/// counter-clockwise convex position.
fn lower_hull_triangles(pts: &[(f64, f64, f64)]) -> Vec<[usize; 3]> {
    let m = pts.len();
    let scale = pts.iter().map(|p| p.2.abs()).fold(1.0, f64::max);
    let mut out = Vec::with_capacity(m - 2);
    let mut stack = vec![(0usize, m - 1)];
    while let Some((s, e)) = stack.pop() {
        if e < s + 2 {
            continue;
        }
        let mut best = s + 1;
        let mut plane = Plane::through([pts[s], pts[e], pts[best]]).expect("convex position");
        for k in s + 2..e {
            let (x, y, z) = pts[k];
            if z < plane.eval(x, y) - 1e-13 * scale {
                best = k;
                plane = Plane::through([pts[s], pts[e], pts[k]]).expect("convex position");
            }
        }
        out.push([s, best, e]);
        stack.push((s, best));
        stack.push((best, e));
    }
    out
}

/// Separating-axis test between a triangle and an axis-aligned box.
fn triangle_meets_box(t: &[(f64, f64)], b: (f64, f64, f64, f64)) -> bool {
    let (x0, y0, x1, y1) = b;
    if t.iter().all(|p| p.0 < x0) || t.iter().all(|p| p.0 > x1) || t.iter().all(|p| p.1 < y0) || t.iter().all(|p| p.1 > y1) {
        return false;
    }
    let corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
    for i in 0..3 {
        let (p, q, o) = (t[i], t[(i + 1) % 3], t[(i + 2) % 3]);
        let (nx, ny) = (q.1 - p.1, p.0 - q.0);
        let side = |c: (f64, f64)| nx * (c.0 - p.0) + ny * (c.1 - p.1);
        let so = side(o);
        if corners.iter().all(|&c| side(c) * so < 0.0) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(r: f64, values: &[f64], x: f64, y: f64) -> f64 {
        // minimise over all boundary triples containing (x, y)
        let m = values.len();
        let p: Vec<(f64, f64)> = (0..m).map(|j| {
            let t = 2.0 * PI * j as f64 / m as f64;
            (r * t.cos(), r * t.sin())
        }).collect();
        let mut best = f64::INFINITY;
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    let (a, b, c) = (p[i], p[j], p[k]);
                    let det = (b.0 - a.0) * (c.1 - a.1) - (c.0 - a.0) * (b.1 - a.1);
                    let l1 = ((x - a.0) * (c.1 - a.1) - (c.0 - a.0) * (y - a.1)) / det;
                    let l2 = ((b.0 - a.0) * (y - a.1) - (x - a.0) * (b.1 - a.1)) / det;
                    let l0 = 1.0 - l1 - l2;
                    if l0 >= -1e-12 && l1 >= -1e-12 && l2 >= -1e-12 {
                        best = best.min(l0 * values[i] + l1 * values[j] + l2 * values[k]);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn hull_matches_triple_enumeration() {
        let m = 40;
        let r = 1.5;
        let vals: Vec<f64> = (0..m).map(|j| {
            let t = 2.0 * PI * j as f64 / m as f64;
            (3.0 * t).sin() + 0.3 * (7.0 * t).cos() + 0.2 * t.cos()
        }).collect();
        let h = DiskHull::new(r, &vals);
        assert_eq!(h.triangles().len(), m - 2);
        for &(x, y) in &[(0.0, 0.0), (0.3, -0.7), (-1.1, 0.4), (1.2, 0.6), (0.01, 1.4)] {
            let want = brute_force(r, &vals, x, y);
            assert!((h.hull(x, y) - want).abs() < 1e-12, "({x},{y}): {} vs {want}", h.hull(x, y));
        }
    }

    #[test]
    fn constant_boundary_gives_flat_hull() {
        let h = DiskHull::new(2.0, &vec![4.0; 360]);
        for &(x, y) in &[(0.0, 0.0), (1.0, -1.3), (-1.9, 0.1)] {
            assert!((h.hull(x, y) - 4.0).abs() < 1e-12);
        }
    }
}
