use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::closure_period_f64;
use crate::trajectory::quadratures_pt;
use crate::C64;

use super::HypotrochoidParams;

pub const DEFAULT_CURVE_SAMPLES: usize = 4096;
pub const MIN_CURVE_SAMPLES: usize = 8;

/// Span used for hypotrochoids whose ratio `(R − r)/r` is irrational.
pub const DEFAULT_OPEN_SPAN: f64 = 40.0 * PI;

/// Samples of a planar curve at uniformly spaced parameter values. A closed
/// curve stores one period without repeating the starting point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanarCurve {
    pub points: Vec<(f64, f64)>,
    pub params: Vec<f64>,
    pub closed: bool,
}

impl PlanarCurve {
    pub fn new(points: Vec<(f64, f64)>, params: Vec<f64>, closed: bool) -> Result<Self> {
        if points.len() < MIN_CURVE_SAMPLES {
            return Err(Error::invalid(
                "samples",
                format!("a curve needs at least {MIN_CURVE_SAMPLES} samples"),
            ));
        }
        if points.len() != params.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: params.len(),
            });
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::invalid("points", "coordinates must be finite"));
        }
        Ok(Self {
            points,
            params,
            closed,
        })
    }

    fn from_complex(points: Vec<C64>, params: Vec<f64>, closed: bool) -> Result<Self> {
        Self::new(points.into_iter().map(|z| (z.re, z.im)).collect(), params, closed)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub(crate) fn complex_points(&self) -> Vec<C64> {
        self.points.iter().map(|&(x, y)| C64::new(x, y)).collect()
    }

    pub fn centroid(&self) -> (f64, f64) {
        let n = self.len() as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x, sy + y));
        (sx / n, sy / n)
    }

    /// `(min_x, min_y, max_x, max_y)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        self.points.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), &(x, y)| (a.min(x), b.min(y), c.max(x), d.max(y)),
        )
    }

    /// Largest distance between two samples.
    pub fn diameter(&self) -> f64 {
        let hull = convex_hull(&self.points);
        let mut best: f64 = 0.0;
        for (i, a) in hull.iter().enumerate() {
            for b in &hull[i + 1..] {
                best = best.max((a.0 - b.0).hypot(a.1 - b.1));
            }
        }
        best
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain.
fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn uniform_params(span: f64, samples: usize, closed: bool) -> Vec<f64> {
    let denom = if closed { samples } else { samples - 1 } as f64;
    (0..samples).map(|k| span * k as f64 / denom).collect()
}

/// `h(θ) = (R−r)e^{iθ} + d·e^{−iθ(R−r)/r}` over one closure period, or over
/// `open_span` (default [`DEFAULT_OPEN_SPAN`]) when `(R − r)/r` is
/// irrational. A vanishing rolling radius yields the circle of radius `|d|`.
pub fn hypotrochoid_curve(
    params: &HypotrochoidParams,
    samples: usize,
    open_span: Option<f64>,
) -> Result<PlanarCurve> {
    HypotrochoidParams::new(params.R, params.r, params.d)?;
    if samples < MIN_CURVE_SAMPLES {
        return Err(Error::invalid(
            "samples",
            format!("must be at least {MIN_CURVE_SAMPLES}"),
        ));
    }
    let Some(ratio) = params.ratio() else {
        let thetas = uniform_params(2.0 * PI, samples, true);
        let pts = thetas
            .iter()
            .map(|&th| C64::from_polar(params.d.abs(), th))
            .collect();
        return PlanarCurve::from_complex(pts, thetas, true);
    };
    let (span, closed) = match closure_period_f64(ratio).period() {
        Some(period) => (period, true),
        None => (open_span.unwrap_or(DEFAULT_OPEN_SPAN), false),
    };
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::invalid("span", "must be positive and finite"));
    }
    let thetas = uniform_params(span, samples, closed);
    let outer = params.R - params.r;
    let pts = thetas
        .iter()
        .map(|&th| C64::from_polar(outer, th) + C64::from_polar(params.d, -th * ratio))
        .collect();
    PlanarCurve::from_complex(pts, thetas, closed)
}

/// The closed-form trajectory over one closure period as a planar curve in
/// the `(x, p)` plane.
pub fn trajectory_curve(n0: f64, f0: f64, omega_eff: f64, samples: usize) -> Result<PlanarCurve> {
    if samples < MIN_CURVE_SAMPLES {
        return Err(Error::invalid(
            "samples",
            format!("must be at least {MIN_CURVE_SAMPLES}"),
        ));
    }
    let period = closure_period_f64(omega_eff)
        .period()
        .ok_or(Error::NoFiniteClosure(omega_eff))?;
    let times = uniform_params(period, samples, true);
    let mut pts = Vec::with_capacity(samples);
    for &t in &times {
        pts.push(quadratures_pt(n0, f0, omega_eff, t)?);
    }
    PlanarCurve::new(pts, times, true)
}
