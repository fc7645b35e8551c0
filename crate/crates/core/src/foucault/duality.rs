use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SECULAR_THRESHOLD;

use super::{
    hypotrochoid_curve, similarity_match, to_hypotrochoid, trajectory_curve, HypotrochoidParams,
    OscillatorParams, SimilarityFit, DEFAULT_CURVE_SAMPLES,
};

/// Largest normalized Hausdorff residual accepted as a match.
pub const DUALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityReport {
    pub params: OscillatorParams,
    pub hypotrochoid: HypotrochoidParams,
    pub fit: SimilarityFit,
    /// `√2/|ω + 1|`, the analytic ratio of trajectory size to hypotrochoid
    /// size.
    pub expected_scale: f64,
    pub scale_relative_error: f64,
    pub pass: bool,
}

/// Samples the trajectory and its hypotrochoid over one closure period and
/// registers the hypotrochoid onto the trajectory.
pub fn verify_duality(n0: f64, f0: f64, omega: f64) -> Result<DualityReport> {
    if (omega + 1.0).abs() <= SECULAR_THRESHOLD {
        return Err(Error::SecularSingular {
            omega_eff: omega,
            threshold: SECULAR_THRESHOLD,
        });
    }
    let hypotrochoid = to_hypotrochoid(n0, f0, omega)?;
    let traj = trajectory_curve(n0, f0, omega, DEFAULT_CURVE_SAMPLES)?;
    let hypo = hypotrochoid_curve(&hypotrochoid, DEFAULT_CURVE_SAMPLES, None)?;
    let fit = similarity_match(&traj, &hypo)?;
    let expected_scale = SQRT_2 / (omega + 1.0).abs();
    Ok(DualityReport {
        params: OscillatorParams { n0, f0, omega },
        hypotrochoid,
        fit,
        expected_scale,
        scale_relative_error: (fit.scale - expected_scale).abs() / expected_scale,
        pass: fit.residual <= DUALITY_TOL,
    })
}
