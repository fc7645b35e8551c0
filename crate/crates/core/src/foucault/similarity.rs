//! Similarity registration of two sampled curves under the symmetric
//! Hausdorff distance.
//!
//! The distance from a point to a curve is measured against a piecewise
//! cubic through the samples (Lagrange interpolation in the parameter,
//! which assumes uniform parameter spacing), so that a dense sampling of
//! two identical smooth curves at different parameter phases gives a
//! residual far below the chord sagitta.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::C64;

use super::PlanarCurve;

/// Maps `w ↦ scale·e^{i·rotation}·R(w − from) + to` where `R` is complex
/// conjugation when `reflection` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transform {
    pub scale: f64,
    pub rotation: f64,
    pub reflection: bool,
    pub from: (f64, f64),
    pub to: (f64, f64),
}

impl Transform {
    fn linear(&self, w: C64) -> C64 {
        let w = if self.reflection { w.conj() } else { w };
        C64::from_polar(self.scale, self.rotation) * w
    }

    fn linear_inverse(&self, z: C64) -> C64 {
        let w = C64::from_polar(1.0 / self.scale, -self.rotation) * z;
        if self.reflection {
            w.conj()
        } else {
            w
        }
    }

    pub fn apply(&self, p: (f64, f64)) -> (f64, f64) {
        let z = self.linear(C64::new(p.0 - self.from.0, p.1 - self.from.1));
        (z.re + self.to.0, z.im + self.to.1)
    }
}

/// Transform mapping the second curve onto the first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilarityFit {
    pub scale: f64,
    /// In `(−π, π]`.
    pub rotation: f64,
    pub reflection: bool,
    /// Symmetric Hausdorff distance after the transform, divided by the
    /// larger of the two diameters.
    pub residual: f64,
    pub translation: (f64, f64),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Precision {
    /// Nearest sample only; error bounded by half the longest segment.
    Vertex,
    /// Nearest point on the interpolating cubic.
    Curve,
}

struct CurveIndex {
    pts: Vec<C64>,
    closed: bool,
    origin: C64,
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<u32>,
    items: Vec<u32>,
    max_seg: f64,
}

const MAX_CELLS_PER_AXIS: usize = 2048;

impl CurveIndex {
    fn new(pts: Vec<C64>, closed: bool) -> Self {
        let n = pts.len();
        let (mut lo, mut hi) = (pts[0], pts[0]);
        for z in &pts {
            lo = C64::new(lo.re.min(z.re), lo.im.min(z.im));
            hi = C64::new(hi.re.max(z.re), hi.im.max(z.im));
        }
        let segs = if closed { n } else { n - 1 };
        let max_seg = (0..segs)
            .map(|i| (pts[(i + 1) % n] - pts[i]).norm())
            .fold(0.0, f64::max);
        let (w, h) = (hi.re - lo.re, hi.im - lo.im);
        let extent = w.max(h).max(f64::MIN_POSITIVE);
        let mut cell = max_seg
            .max((w * h / (4.0 * n as f64)).sqrt())
            .max(extent / MAX_CELLS_PER_AXIS as f64);
        if cell <= 0.0 || !cell.is_finite() {
            cell = 1.0;
        }
        let nx = ((w / cell) as usize + 1).min(MAX_CELLS_PER_AXIS + 1);
        let ny = ((h / cell) as usize + 1).min(MAX_CELLS_PER_AXIS + 1);
        let mut index = Self {
            pts,
            closed,
            origin: lo,
            cell,
            nx,
            ny,
            start: Vec::new(),
            items: Vec::new(),
            max_seg,
        };
        let cells: Vec<usize> = index
            .pts
            .iter()
            .map(|&z| {
                let (i, j) = index.cell_of(z);
                j as usize * nx + i as usize
            })
            .collect();
        let mut counts = vec![0u32; nx * ny + 1];
        for &c in &cells {
            counts[c + 1] += 1;
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; n];
        for (v, &c) in cells.iter().enumerate() {
            items[fill[c] as usize] = v as u32;
            fill[c] += 1;
        }
        index.start = counts;
        index.items = items;
        index
    }

    fn cell_of(&self, z: C64) -> (i64, i64) {
        let fx = ((z.re - self.origin.re) / self.cell).floor();
        let fy = ((z.im - self.origin.im) / self.cell).floor();
        let clamp = |f: f64, n: usize| {
            if f.is_nan() {
                0
            } else {
                (f.max(0.0) as i64).min(n as i64 - 1)
            }
        };
        (clamp(fx, self.nx), clamp(fy, self.ny))
    }

    fn cell_items(&self, i: i64, j: i64) -> &[u32] {
        let c = j as usize * self.nx + i as usize;
        &self.items[self.start[c] as usize..self.start[c + 1] as usize]
    }

    fn nearest_vertex(&self, q: C64) -> f64 {
        self.nearest_vertex_capped(q, f64::INFINITY)
    }

    /// Ring search outward from the query's (clamped) cell. A vertex in ring
    /// `k + 1` lies at least `k·cell` away, even for queries outside the grid.
    /// Gives up with a value `≥ cap` once every remaining vertex is that far.
    fn nearest_vertex_capped(&self, q: C64, cap: f64) -> f64 {
        let (ci, cj) = self.cell_of(q);
        let max_ring = self.nx.max(self.ny) as i64;
        let mut best = f64::INFINITY;
        for k in 0..=max_ring {
            let mut visit = |i: i64, j: i64| {
                if i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny {
                    for &v in self.cell_items(i, j) {
                        best = best.min((self.pts[v as usize] - q).norm());
                    }
                }
            };
            if k == 0 {
                visit(ci, cj);
            } else {
                for i in (ci - k)..=(ci + k) {
                    visit(i, cj - k);
                    visit(i, cj + k);
                }
                for j in (cj - k + 1)..=(cj + k - 1) {
                    visit(ci - k, j);
                    visit(ci + k, j);
                }
            }
            let cleared = k as f64 * self.cell;
            if best <= cleared || cleared >= cap {
                break;
            }
        }
        best
    }

    fn distance(&self, q: C64, precision: Precision) -> f64 {
        let dv = self.nearest_vertex(q);
        if precision == Precision::Vertex || dv == 0.0 {
            return dv;
        }
        // Any segment closer than dv has an endpoint within dv + max_seg.
        let reach = dv + self.max_seg;
        let (i0, j0) = self.cell_of(q - C64::new(reach, reach));
        let (i1, j1) = self.cell_of(q + C64::new(reach, reach));
        let n = self.pts.len();
        let mut best = dv;
        for j in j0..=j1 {
            for i in i0..=i1 {
                for &v in self.cell_items(i, j) {
                    let v = v as usize;
                    if (self.pts[v] - q).norm() > reach {
                        continue;
                    }
                    if v + 1 < n || self.closed {
                        best = best.min(self.segment_distance(v, q));
                    }
                    if v > 0 || self.closed {
                        best = best.min(self.segment_distance((v + n - 1) % n, q));
                    }
                }
            }
        }
        best
    }

    /// Distance from `q` to the cubic through samples `s−1, s, s+1, s+2`,
    /// restricted to the stretch between samples `s` and `s + 1`.
    fn segment_distance(&self, s: usize, q: C64) -> f64 {
        let n = self.pts.len();
        let p1 = self.pts[s];
        let p2 = self.pts[(s + 1) % n];
        let chord = p2 - p1;
        let len2 = chord.norm_sqr();
        let mut u = if len2 > 0.0 {
            ((q - p1).re * chord.re + (q - p1).im * chord.im) / len2
        } else {
            0.0
        };
        u = u.clamp(0.0, 1.0);
        let interior = self.closed || (s >= 1 && s + 2 < n);
        if !interior {
            return (p1 + chord * u - q).norm();
        }
        let p0 = self.pts[(s + n - 1) % n];
        let p3 = self.pts[(s + 2) % n];
        let a0 = p1;
        let a1 = -p0 / 3.0 - p1 / 2.0 + p2 - p3 / 6.0;
        let a2 = p0 / 2.0 - p1 + p2 / 2.0;
        let a3 = -p0 / 6.0 + p1 / 2.0 - p2 / 2.0 + p3 / 6.0;
        let eval = |u: f64| a0 + (a1 + (a2 + a3 * u) * u) * u;
        for _ in 0..8 {
            let e = eval(u) - q;
            let d1 = a1 + (a2 * 2.0 + a3 * (3.0 * u)) * u;
            let d2 = a2 * 2.0 + a3 * (6.0 * u);
            let g = e.re * d1.re + e.im * d1.im;
            let h = d1.norm_sqr() + e.re * d2.re + e.im * d2.im;
            if !(h > 0.0) {
                break;
            }
            let next = (u - g / h).clamp(0.0, 1.0);
            if (next - u).abs() < 1e-15 {
                u = next;
                break;
            }
            u = next;
        }
        (eval(u) - q).norm()
    }
}

struct Problem {
    a: CurveIndex,
    b: CurveIndex,
    center_a: C64,
    center_b: C64,
    diam_a: f64,
    diam_b: f64,
}

impl Problem {
    fn transform(&self, scale: f64, rotation: f64, reflection: bool) -> Transform {
        Transform {
            scale,
            rotation,
            reflection,
            from: (self.center_b.re, self.center_b.im),
            to: (self.center_a.re, self.center_a.im),
        }
    }

    /// Normalized symmetric Hausdorff distance, evaluated on every
    /// `stride`-th sample of each curve.
    fn residual(&self, t: &Transform, precision: Precision, stride: usize) -> f64 {
        let forward = self
            .b
            .pts
            .par_iter()
            .step_by(stride)
            .map(|&w| self.a.distance(t.linear(w), precision))
            .reduce(|| 0.0, f64::max);
        let backward = self
            .a
            .pts
            .par_iter()
            .step_by(stride)
            .map(|&z| self.b.distance(t.linear_inverse(z), precision))
            .reduce(|| 0.0, f64::max)
            * t.scale;
        forward.max(backward) / self.diam_a.max(t.scale * self.diam_b)
    }

    /// Vertex-precision residual that stops as soon as it is known to
    /// exceed `bound`, returning infinity in that case.
    fn vertex_residual_below(&self, t: &Transform, stride: usize, bound: f64) -> f64 {
        let norm = self.diam_a.max(t.scale * self.diam_b);
        let cap = bound * norm;
        let mut worst: f64 = 0.0;
        for &w in self.b.pts.iter().step_by(stride) {
            worst = worst.max(self.a.nearest_vertex_capped(t.linear(w), cap));
            if worst >= cap {
                return f64::INFINITY;
            }
        }
        for &z in self.a.pts.iter().step_by(stride) {
            worst = worst.max(self.b.nearest_vertex_capped(t.linear_inverse(z), cap / t.scale) * t.scale);
            if worst >= cap {
                return f64::INFINITY;
            }
        }
        worst / norm
    }
}

fn centered(curve: &PlanarCurve) -> (Vec<C64>, C64) {
    let (cx, cy) = curve.centroid();
    let c = C64::new(cx, cy);
    (curve.complex_points().into_iter().map(|z| z - c).collect(), c)
}

/// Symmetric Hausdorff distance between `a` and `t(b)`, normalized by the
/// larger diameter.
pub fn hausdorff(a: &PlanarCurve, b: &PlanarCurve, t: &Transform) -> f64 {
    let shift = |z: C64, p: (f64, f64)| z - C64::new(p.0, p.1);
    let problem = Problem {
        a: CurveIndex::new(a.complex_points().into_iter().map(|z| shift(z, t.to)).collect(), a.closed),
        b: CurveIndex::new(b.complex_points().into_iter().map(|z| shift(z, t.from)).collect(), b.closed),
        center_a: C64::new(t.to.0, t.to.1),
        center_b: C64::new(t.from.0, t.from.1),
        diam_a: a.diameter(),
        diam_b: b.diameter(),
    };
    problem.residual(t, Precision::Curve, 1)
}

fn golden<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

const COARSE_ANGLES: usize = 720;
const COARSE_QUERIES: usize = 256;
const REFINE_ROUNDS: usize = 4;

/// Finds the similarity `T` minimizing the symmetric Hausdorff distance
/// between `a` and `T(b)`. Curves are centred on their sample centroids;
/// the initial scale is the ratio of RMS radii, the rotation comes from a
/// fixed scan over both orientations, and both are then polished by
/// alternating golden-section searches on shrinking brackets. Ties in the
/// scan go to the unreflected orientation and the smallest angle.
pub fn similarity_match(a: &PlanarCurve, b: &PlanarCurve) -> Result<SimilarityFit> {
    let diam_a = a.diameter();
    let diam_b = b.diameter();
    if !(diam_a > 0.0) || !(diam_b > 0.0) {
        return Err(Error::Degenerate("similarity_match needs curves of positive diameter".into()));
    }
    let (pa, center_a) = centered(a);
    let (pb, center_b) = centered(b);
    let rms = |p: &[C64]| (p.iter().map(|z| z.norm_sqr()).sum::<f64>() / p.len() as f64).sqrt();
    let (rms_a, rms_b) = (rms(&pa), rms(&pb));
    let mut scale = if rms_a > 0.0 && rms_b > 0.0 {
        rms_a / rms_b
    } else {
        diam_a / diam_b
    };
    let problem = Problem {
        a: CurveIndex::new(pa, a.closed),
        b: CurveIndex::new(pb, b.closed),
        center_a,
        center_b,
        diam_a,
        diam_b,
    };

    let stride = (a.len().max(b.len()) / COARSE_QUERIES).max(1);
    let mut best = (f64::INFINITY, 0.0, false);
    for reflection in [false, true] {
        for k in 0..COARSE_ANGLES {
            let rotation = 2.0 * PI * k as f64 / COARSE_ANGLES as f64;
            let t = problem.transform(scale, rotation, reflection);
            let r = problem.vertex_residual_below(&t, stride, best.0);
            if r < best.0 * (1.0 - 1e-12) {
                best = (r, rotation, reflection);
            }
        }
    }
    let (_, mut rotation, reflection) = best;

    // Each round brackets the previous optimum with a window 50× narrower
    // and only needs to resolve it to a tenth of that window.
    let mut rot_half = 2.0 * PI / COARSE_ANGLES as f64;
    let mut log_half = 0.02;
    for round in 0..REFINE_ROUNDS {
        let last = round + 1 == REFINE_ROUNDS;
        let stride = if last { 2 } else { 8 };
        let (rot_tol, log_tol) = if last {
            (1e-13, 1e-14)
        } else {
            (rot_half / 500.0, log_half / 500.0)
        };
        let (r, _) = golden(
            |rot| problem.residual(&problem.transform(scale, rot, reflection), Precision::Curve, stride),
            rotation - rot_half,
            rotation + rot_half,
            rot_tol,
        );
        rotation = r;
        let center = scale.ln();
        let (ls, _) = golden(
            |ls| problem.residual(&problem.transform(ls.exp(), rotation, reflection), Precision::Curve, stride),
            center - log_half,
            center + log_half,
            log_tol,
        );
        scale = ls.exp();
        rot_half /= 50.0;
        log_half /= 50.0;
    }

    let t = problem.transform(scale, rotation, reflection);
    let residual = problem.residual(&t, Precision::Curve, 1);
    let lin_center = t.linear(center_b);
    Ok(SimilarityFit {
        scale,
        rotation: wrap_angle(rotation),
        reflection,
        residual,
        translation: (center_a.re - lin_center.re, center_a.im - lin_center.im),
    })
}
