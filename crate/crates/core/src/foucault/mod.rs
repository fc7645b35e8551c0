//! The dual classical curve of a closed-form trajectory: a hypotrochoid,
//! the figure traced by a pen at distance `d` from the centre of a circle
//! of radius `r` rolling inside a circle of radius `R`.
//!
//! The forward map is
//!
//! ```text
//! r = n0 + (F0 + n0)/ω,   R = (ω+1)(F0 + n0(ω+1))/ω,   d = F0
//! ```
//!
//! which gives `R − r = F0 + n0(ω+1)` and `(R − r)/r = ω`. Writing the
//! hypotrochoid as `h(θ) = (R−r)e^{iθ} + d·e^{−iθ(R−r)/r}`, the trajectory
//! is `z(t) = κ·h(φ − t)` with `φ = π/(1+ω)` and `|κ| = √2/|1+ω|`, so the
//! two curves agree up to a similarity.

mod curve;
mod duality;
mod similarity;

pub use curve::{hypotrochoid_curve, trajectory_curve, PlanarCurve, DEFAULT_CURVE_SAMPLES};
pub use duality::{verify_duality, DualityReport, DUALITY_TOL};
pub use similarity::{hausdorff, similarity_match, SimilarityFit, Transform};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radii at or below this magnitude are treated as degenerate.
pub const DEGENERATE_RADIUS: f64 = 1e-12;

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypotrochoidParams {
    #[serde(rename = "R")]
    pub R: f64,
    pub r: f64,
    pub d: f64,
}

impl HypotrochoidParams {
    #[allow(non_snake_case)]
    pub fn new(R: f64, r: f64, d: f64) -> Result<Self> {
        for (name, v) in [("R", R), ("r", r), ("d", d)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(Self { R, r, d })
    }

    pub fn rolling_degenerate(&self) -> bool {
        self.r.abs() <= DEGENERATE_RADIUS
    }

    pub fn fixed_degenerate(&self) -> bool {
        self.R.abs() <= DEGENERATE_RADIUS
    }

    /// Frequency ratio `(R − r)/r` of the two rotating terms.
    pub fn ratio(&self) -> Option<f64> {
        (!self.rolling_degenerate()).then(|| (self.R - self.r) / self.r)
    }
}

pub fn to_hypotrochoid(n0: f64, f0: f64, omega: f64) -> Result<HypotrochoidParams> {
    if omega == 0.0 {
        return Err(Error::invalid("omega", "the hypotrochoid map is undefined at omega = 0"));
    }
    let r = n0 + (f0 + n0) / omega;
    let big_r = (omega + 1.0) * (f0 + n0 * (omega + 1.0)) / omega;
    HypotrochoidParams::new(big_r, r, f0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatorParams {
    pub n0: f64,
    pub f0: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Unmappable {
    pub reason: String,
    pub candidate_family: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseMap {
    /// Sorted by `|omega|`.
    pub solutions: Vec<OscillatorParams>,
    pub unmappable: Option<Unmappable>,
}

pub const ROUND_TRIP_TOL: f64 = 1e-9;

fn relative_gap(a: &HypotrochoidParams, b: &HypotrochoidParams) -> f64 {
    let scale = a.R.abs().max(a.r.abs()).max(a.d.abs()).max(1.0);
    (a.R - b.R).abs().max((a.r - b.r).abs()).max((a.d - b.d).abs()) / scale
}

/// Inverts [`to_hypotrochoid`]. With `F0 = d` fixed the two remaining
/// equations are linear in `n0` once `ω = (R − r)/r` is known, so a
/// mappable triple has exactly one preimage. A Newton step on the full
/// system polishes rounding before the round-trip check.
pub fn from_hypotrochoid(params: &HypotrochoidParams) -> InverseMap {
    let unmappable = |reason: &str, family: Option<&str>| InverseMap {
        solutions: Vec::new(),
        unmappable: Some(Unmappable {
            reason: reason.to_string(),
            candidate_family: family.map(str::to_string),
        }),
    };
    if params.rolling_degenerate() {
        return unmappable(
            "rolling radius r is zero: the curve is a circle of radius |d| and every (n0, omega) with F0 = -n0(omega+1) maps onto it",
            Some("circle, use circular_drive_strength"),
        );
    }
    let f0 = params.d;
    let mut omega = (params.R - params.r) / params.r;
    if omega.abs() <= 1e-12 {
        return unmappable("R = r corresponds to omega = 0, where the forward map is undefined", None);
    }
    if (omega + 1.0).abs() <= 1e-12 {
        return unmappable(
            "R = 0 corresponds to the secular point omega = -1",
            Some("secular, use secular_limit"),
        );
    }
    let mut n0 = (params.R - params.r - f0) / (omega + 1.0);

    for _ in 0..3 {
        // Residuals of r(n0, ω) and R(n0, ω) at fixed F0.
        let res_r = n0 + (f0 + n0) / omega - params.r;
        let res_big = (omega + 1.0) * (f0 + n0 * (omega + 1.0)) / omega - params.R;
        let j11 = 1.0 + 1.0 / omega;
        let j12 = -(f0 + n0) / (omega * omega);
        let j21 = (omega + 1.0).powi(2) / omega;
        // d/dω of (ω+1)F0/ω + n0(ω+1)²/ω
        let j22 = -f0 / (omega * omega) + n0 * (1.0 - 1.0 / (omega * omega));
        let det = j11 * j22 - j12 * j21;
        if !det.is_finite() || det.abs() < 1e-300 {
            break;
        }
        let dn = (res_r * j22 - j12 * res_big) / det;
        let dw = (j11 * res_big - j21 * res_r) / det;
        n0 -= dn;
        omega -= dw;
    }

    let candidate = OscillatorParams { n0, f0, omega };
    match to_hypotrochoid(n0, f0, omega) {
        Ok(back) if relative_gap(params, &back) <= ROUND_TRIP_TOL => InverseMap {
            solutions: vec![candidate],
            unmappable: None,
        },
        _ => unmappable("no preimage survives the round-trip check", None),
    }
}
