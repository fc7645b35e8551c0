//! Closed-form Wigner-space trajectories of an initial coherent state under
//! the PT drive `F0·e^{iω_eff t}`.
//!
//! With lobe amplitudes
//! `c1 = √2(F0 + n0(ω_eff+1))/(ω_eff+1)` and `c2 = √2·F0/(ω_eff+1)`
//!
//! ```text
//! ⟨x(t)⟩ =   c1 cos t − c2 cos(ω_eff t)
//! ⟨p(t)⟩ = −(c1 sin t + c2 sin(ω_eff t))
//! ```
//!
//! i.e. `z = x + ip = c1 e^{−it} − c2 e^{iω_eff t}`, a two-frequency curve.
//! The quadrature variances stay at the coherent-state value 1/2.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DriveSpec, SimulationGrid, RESONANT_THRESHOLD, SECULAR_THRESHOLD};
use crate::rational::{closure_period_f64, rational_approx, Closure, DEFAULT_MAX_DENOMINATOR};

pub use crate::rational::closure_period;

/// Coherent-state quadrature variance in the `x = (a + a†)/√2` convention.
pub const COHERENT_VARIANCE: f64 = 0.5;

pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

fn check_secular(omega_eff: f64) -> Result<()> {
    if (omega_eff + 1.0).abs() <= SECULAR_THRESHOLD {
        Err(Error::SecularSingular {
            omega_eff,
            threshold: SECULAR_THRESHOLD,
        })
    } else {
        Ok(())
    }
}

pub fn lobe_amplitudes(n0: f64, f0: f64, omega_eff: f64) -> Result<(f64, f64)> {
    check_secular(omega_eff)?;
    let denom = omega_eff + 1.0;
    let c1 = SQRT_2 * (f0 + n0 * denom) / denom;
    let c2 = SQRT_2 * f0 / denom;
    Ok((c1, c2))
}

/// `(⟨x(t)⟩, ⟨p(t)⟩)`. The expression is arranged so that `t = 0` yields
/// `(√2·n0, 0)` exactly.
pub fn quadratures_pt(n0: f64, f0: f64, omega_eff: f64, t: f64) -> Result<(f64, f64)> {
    check_secular(omega_eff)?;
    let denom = omega_eff + 1.0;
    let (s, c) = t.sin_cos();
    let (sw, cw) = (omega_eff * t).sin_cos();
    let x = SQRT_2 * (n0 * c + f0 * (c - cw) / denom);
    let p = -SQRT_2 * (n0 * s + f0 * (s + sw) / denom);
    Ok((x, p))
}

/// Limit of the closed form at ω_eff = −1, where the drive co-rotates with
/// the oscillator and the orbit grows linearly in time.
pub fn secular_limit(n0: f64, f0: f64, t: f64) -> (f64, f64) {
    let (s, c) = t.sin_cos();
    let x = SQRT_2 * (n0 * c - f0 * t * s);
    let p = -SQRT_2 * (n0 * s + f0 * t * c);
    (x, p)
}

/// Resonant drive (ω_eff = 1): an ellipse with semi-axes `√2|n0|` and
/// `√2|n0 + F0|`.
pub fn resonant_quadratures(n0: f64, f0: f64, t: f64) -> (f64, f64) {
    let (s, c) = t.sin_cos();
    (SQRT_2 * n0 * c, -SQRT_2 * (n0 + f0) * s)
}

/// Drive strength that cancels the `e^{−it}` lobe (`c1 = 0`), leaving a
/// circle of radius `√2|n0|` traversed at angular frequency `|ω_eff|`.
pub fn circular_drive_strength(n0: f64, omega_eff: f64) -> Result<f64> {
    check_secular(omega_eff)?;
    Ok(-n0 * (omega_eff + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircularFit {
    pub circular: bool,
    /// Largest `|r(t) − r(0)|` over the sampled span.
    pub max_deviation: f64,
    /// Mean sampled radius.
    pub radius: f64,
    /// Magnitude of the mean angular velocity.
    pub frequency: f64,
    pub span: f64,
}

const CIRCLE_SAMPLES: usize = 4096;

/// Samples the orbit over one closure period (or over one period of the
/// radius law when the frequency ratio is irrational) and tests whether the
/// radius stays within `tol` of its initial value.
pub fn is_circular(n0: f64, f0: f64, omega_eff: f64, tol: f64) -> Result<CircularFit> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be > 0"));
    }
    check_secular(omega_eff)?;
    let span = closure_period_f64(omega_eff)
        .period()
        .unwrap_or(2.0 * PI / (1.0 + omega_eff).abs());
    let r0 = {
        let (x, p) = quadratures_pt(n0, f0, omega_eff, 0.0)?;
        x.hypot(p)
    };
    let mut max_dev: f64 = 0.0;
    let mut radius_sum = 0.0;
    let mut unwrapped = 0.0;
    let mut prev_angle: Option<f64> = None;
    for k in 0..=CIRCLE_SAMPLES {
        let t = span * k as f64 / CIRCLE_SAMPLES as f64;
        let (x, p) = quadratures_pt(n0, f0, omega_eff, t)?;
        let r = x.hypot(p);
        max_dev = max_dev.max((r - r0).abs());
        if k < CIRCLE_SAMPLES {
            radius_sum += r;
        }
        let angle = p.atan2(x);
        if let Some(prev) = prev_angle {
            let mut d = angle - prev;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            unwrapped += d;
        }
        prev_angle = Some(angle);
    }
    // The exact extrema of r(t) sit at (1 + ω_eff)t ∈ {0, π}; include them.
    let (c1, c2) = lobe_amplitudes(n0, f0, omega_eff)?;
    let r_far = (c1 + c2).abs();
    max_dev = max_dev.max((r_far - r0).abs());

    let radius = radius_sum / CIRCLE_SAMPLES as f64;
    let frequency = if radius > 0.0 { (unwrapped / span).abs() } else { 0.0 };
    Ok(CircularFit {
        circular: max_dev <= tol,
        max_deviation: max_dev,
        radius,
        frequency,
        span,
    })
}

/// Geometric family of a closed-form trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CurveFamily {
    Circle { radius: f64, frequency: f64 },
    Ellipse { semi_axis_x: f64, semi_axis_p: f64 },
    Rose { petals: u64 },
    /// Limaçons: both lobes rotate the same way with a 2:1 frequency ratio.
    CardioidLike { min_radius: f64, max_radius: f64 },
    RoundedPolygon { sides: u64 },
    Hypocycloid { cusps: u64 },
    /// Equal-amplitude counter-rotating lobes with a non-integer rational
    /// ratio: star polygons such as the pentagram at ω_eff = 2/3.
    PentagramClass { points: u64 },
    FixedPoint,
    FixedPositionOscillatingMomentum { amplitude: f64 },
    SecularUnbounded,
    Generic,
}

impl CurveFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CurveFamily::Circle { .. } => "CIRCLE",
            CurveFamily::Ellipse { .. } => "ELLIPSE",
            CurveFamily::Rose { .. } => "ROSE",
            CurveFamily::CardioidLike { .. } => "CARDIOID_LIKE",
            CurveFamily::RoundedPolygon { .. } => "ROUNDED_POLYGON",
            CurveFamily::Hypocycloid { .. } => "HYPOCYCLOID",
            CurveFamily::PentagramClass { .. } => "PENTAGRAM_CLASS",
            CurveFamily::FixedPoint => "FIXED_POINT",
            CurveFamily::FixedPositionOscillatingMomentum { .. } => {
                "FIXED_POSITION_OSCILLATING_MOMENTUM"
            }
            CurveFamily::SecularUnbounded => "SECULAR_UNBOUNDED",
            CurveFamily::Generic => "GENERIC",
        }
    }
}

/// Decision tree on `(c1, c2, ω_eff)`. Amplitude comparisons are relative
/// to `max(|c1|, |c2|)`; only the fixed-point test is absolute.
pub fn classify(n0: f64, f0: f64, omega_eff: f64, tol: f64) -> Result<CurveFamily> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be > 0"));
    }
    if (omega_eff + 1.0).abs() <= SECULAR_THRESHOLD {
        let scale = SQRT_2 * n0.abs().max(f0.abs());
        return Ok(if scale <= tol {
            CurveFamily::FixedPoint
        } else if f0.abs() <= tol * n0.abs() {
            CurveFamily::Circle {
                radius: SQRT_2 * n0.abs(),
                frequency: 1.0,
            }
        } else {
            CurveFamily::SecularUnbounded
        });
    }
    let (c1, c2) = lobe_amplitudes(n0, f0, omega_eff)?;
    let (a1, a2) = (c1.abs(), c2.abs());
    let scale = a1.max(a2);
    if scale <= tol {
        return Ok(CurveFamily::FixedPoint);
    }
    let rel = tol * scale;
    if a1 <= rel {
        return Ok(CurveFamily::Circle {
            radius: a2,
            frequency: omega_eff.abs(),
        });
    }
    if a2 <= rel || omega_eff.abs() <= tol {
        // ω_eff = 0 only shifts the circle's centre.
        return Ok(CurveFamily::Circle {
            radius: a1,
            frequency: 1.0,
        });
    }
    if (omega_eff - 1.0).abs() <= tol.max(RESONANT_THRESHOLD) {
        let semi_x = (c1 - c2).abs();
        let semi_p = (c1 + c2).abs();
        if semi_x <= rel {
            return Ok(CurveFamily::FixedPositionOscillatingMomentum { amplitude: semi_p });
        }
        return Ok(CurveFamily::Ellipse {
            semi_axis_x: semi_x,
            semi_axis_p: semi_p,
        });
    }
    if (omega_eff + 2.0).abs() <= tol || (omega_eff + 0.5).abs() <= tol {
        return Ok(CurveFamily::CardioidLike {
            min_radius: (a1 - a2).abs(),
            max_radius: a1 + a2,
        });
    }
    let Some(ratio) = rational_approx(omega_eff, DEFAULT_MAX_DENOMINATOR, tol) else {
        return Ok(CurveFamily::Generic);
    };
    if omega_eff < 0.0 {
        return Ok(CurveFamily::Generic);
    }
    let (p, q) = (*ratio.numer() as u64, *ratio.denom() as u64);
    let lobes = p + q;
    if (a1 - a2).abs() <= rel {
        return Ok(if q == 1 {
            CurveFamily::Rose { petals: lobes }
        } else {
            CurveFamily::PentagramClass { points: lobes }
        });
    }
    // Velocity −i(c1 e^{−it} + ω c2 e^{iωt}) vanishes iff |c1| = ω|c2|.
    let cusp = omega_eff * a2;
    if (a1 - cusp).abs() <= rel {
        return Ok(CurveFamily::Hypocycloid { cusps: lobes });
    }
    if a1 > cusp {
        return Ok(CurveFamily::RoundedPolygon { sides: lobes });
    }
    Ok(CurveFamily::Generic)
}

/// Closed-form Pegg–Barnett phase of the resonant vacuum mode,
/// `arctan(−F0 sin t)`.
pub fn phase_closed(f0: f64, t: f64) -> f64 {
    (-f0 * t.sin()).atan()
}

/// Largest `||θ(t)| − π/2|` over grid points where `|sin t| > guard`.
/// `None` when no grid point survives the guard band.
pub fn phase_square_wave_deviation(f0: f64, times: &[f64], guard: f64) -> Option<f64> {
    times
        .iter()
        .filter(|t| t.sin().abs() > guard)
        .map(|&t| (phase_closed(f0, t).abs() - PI / 2.0).abs())
        .reduce(f64::max)
}

/// Times in `(t_start, t_end)` where the closed-form phase changes sign,
/// bracketed on a uniform grid of `samples` points and bisected to
/// machine precision.
pub fn phase_flip_times(f0: f64, t_start: f64, t_end: f64, samples: usize) -> Vec<f64> {
    let samples = samples.max(2);
    let h = (t_end - t_start) / (samples - 1) as f64;
    let theta = |t: f64| phase_closed(f0, t);
    let mut flips = Vec::new();
    let mut a = t_start;
    let mut fa = theta(a);
    for k in 1..samples {
        let b = t_start + k as f64 * h;
        let fb = theta(b);
        if fa == 0.0 && k > 1 {
            flips.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = theta(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            flips.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    flips
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x_mean: f64,
    pub p_mean: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub radius: f64,
    /// Closed-form phase; only defined for the resonant vacuum mode.
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecularPolicy {
    Reject,
    UseLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub n0: f64,
    pub drive: DriveSpec,
    pub omega_eff: f64,
    pub points: Vec<TrajectoryPoint>,
    pub closure_period: Option<f64>,
}

impl Trajectory {
    pub fn closed_form(
        n0: f64,
        drive: &DriveSpec,
        grid: &SimulationGrid,
        policy: SecularPolicy,
    ) -> Result<Self> {
        let w = drive.effective_omega()?;
        let f0 = drive.f0;
        let secular = (w + 1.0).abs() <= SECULAR_THRESHOLD;
        if secular && policy == SecularPolicy::Reject {
            check_secular(w)?;
        }
        let with_phase = (w - 1.0).abs() <= RESONANT_THRESHOLD && n0 == 0.0;
        let points = grid
            .times()
            .into_iter()
            .map(|t| {
                let (x, p) = if secular {
                    secular_limit(n0, f0, t)
                } else {
                    quadratures_pt(n0, f0, w, t).expect("secular regime handled above")
                };
                TrajectoryPoint {
                    t,
                    x_mean: x,
                    p_mean: p,
                    var_x: COHERENT_VARIANCE,
                    var_p: COHERENT_VARIANCE,
                    radius: x.hypot(p),
                    theta: with_phase.then(|| phase_closed(f0, t)),
                }
            })
            .collect();
        let closure = if secular && f0 != 0.0 {
            Closure::NoFiniteClosure
        } else {
            closure_period_f64(w)
        };
        Ok(Self {
            n0,
            drive: *drive,
            omega_eff: w,
            points,
            closure_period: closure.period(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn lobe_amplitude_examples() {
        let (c1, c2) = lobe_amplitudes(8.0, 8.0, -2.0).unwrap();
        assert_eq!(c1, 0.0);
        assert!(close(c2, -8.0 * SQRT_2, EPS));

        for w in [-3.0, 0.5, 2.0, 7.0] {
            let (c1, c2) = lobe_amplitudes(5.0, 0.0, w).unwrap();
            assert!(close(c1, 5.0 * SQRT_2, EPS));
            assert_eq!(c2, 0.0);
        }

        let (c1, c2) = lobe_amplitudes(0.0, 15.0, 2.0).unwrap();
        assert!(close(c1, 5.0 * SQRT_2, EPS) && close(c2, 5.0 * SQRT_2, EPS));

        assert!(matches!(
            lobe_amplitudes(1.0, 1.0, -1.0),
            Err(Error::SecularSingular { .. })
        ));
    }

    #[test]
    fn quadratures_examples() {
        let (x, p) = quadratures_pt(3.3, -1.2, 0.7, 0.0).unwrap();
        assert_eq!(x, SQRT_2 * 3.3);
        assert_eq!(p, 0.0);

        for t in [0.0, 0.3, 1.0, 2.5, 7.9] {
            let (x, p) = quadratures_pt(2.0, 1.0, 1.0, t).unwrap();
            assert!(close(x, 2.0 * SQRT_2 * t.cos(), EPS));
            assert!(close(p, -3.0 * SQRT_2 * t.sin(), EPS));
            let (xr, pr) = resonant_quadratures(2.0, 1.0, t);
            assert!(close(x, xr, EPS) && close(p, pr, EPS));
        }
    }

    #[test]
    fn secular_limit_examples() {
        for t in [0.0, 1.0, 4.0] {
            let (x, p) = secular_limit(1.5, 0.0, t);
            assert!(close(x, SQRT_2 * 1.5 * t.cos(), EPS));
            assert!(close(p, -SQRT_2 * 1.5 * t.sin(), EPS));
        }
        // n0 = 0, F0 = 1, t = π: L'Hôpital gives p = −√2·π·cos π = √2π.
        let (x, p) = secular_limit(0.0, 1.0, PI);
        assert!(x.abs() < 1e-12);
        assert!(close(p, SQRT_2 * PI, 1e-12));
        for eps in [1e-6, -1e-6] {
            let (xe, pe) = quadratures_pt(0.0, 1.0, -1.0 + eps, PI).unwrap();
            assert!(close(xe, x, 1e-4) && close(pe, p, 1e-4));
        }
    }

    #[test]
    fn secular_envelope_grows_linearly() {
        let envelope = |span: f64| {
            (0..=20_000)
                .map(|k| secular_limit(0.0, 1.0, span * k as f64 / 20_000.0).0.abs())
                .fold(0.0, f64::max)
        };
        assert!(envelope(20.0 * PI) >= 10.0 * envelope(2.0 * PI));
    }

    #[test]
    fn circular_strength_examples() {
        assert_eq!(circular_drive_strength(8.0, -2.0).unwrap(), 8.0);
        assert_eq!(circular_drive_strength(10.0, -2.0).unwrap(), 10.0);
        assert_eq!(circular_drive_strength(0.0, 3.7).unwrap(), 0.0);
        assert!(circular_drive_strength(1.0, -1.0).is_err());
    }

    #[test]
    fn is_circular_examples() {
        let fit = is_circular(10.0, 10.0, -2.0, 1e-9).unwrap();
        assert!(fit.circular);
        assert!(close(fit.radius, 10.0 * SQRT_2, 1e-9));
        assert!(close(fit.frequency, 2.0, 1e-9));

        let fit = is_circular(10.0, 8.0, -2.0, 1e-9).unwrap();
        assert!(!fit.circular);

        let fit = is_circular(5.0, 0.0, 3.0, 1e-9).unwrap();
        assert!(fit.circular);
        assert!(close(fit.radius, 5.0 * SQRT_2, 1e-9));
        assert!(close(fit.frequency, 1.0, 1e-9));
    }

    #[test]
    fn circular_strength_always_gives_a_circle() {
        for (n0, w) in [(3.0, 2.0), (1.5, -3.0), (7.0, 2.0 / 3.0), (2.0, 0.25)] {
            let f0 = circular_drive_strength(n0, w).unwrap();
            let fit = is_circular(n0, f0, w, 1e-9).unwrap();
            assert!(fit.circular, "{n0} {w}: {fit:?}");
            assert!(close(fit.radius, SQRT_2 * n0, 1e-9));
            assert!(close(fit.frequency, w.abs(), 1e-9));
        }
    }

    #[test]
    fn resonant_examples() {
        let (x, p) = resonant_quadratures(0.0, 3.0, PI / 2.0);
        assert_eq!(x, 0.0);
        assert!(close(p, -3.0 * SQRT_2, EPS));
        for t in [0.1, 1.0, 2.0] {
            let (x, p) = resonant_quadratures(1.0, 0.0, t);
            assert!(close(x.hypot(p), SQRT_2, EPS));
        }
        let maxes = (0..1000)
            .map(|k| resonant_quadratures(2.0, 1.0, 2.0 * PI * k as f64 / 1000.0))
            .fold((0.0f64, 0.0f64), |(mx, mp), (x, p)| (mx.max(x.abs()), mp.max(p.abs())));
        assert!(close(maxes.0, 2.0 * SQRT_2, 1e-9));
        assert!(close(maxes.1, 3.0 * SQRT_2, 1e-9));
    }

    #[test]
    fn closure_returns_to_start() {
        for (w, period) in [(2.0 / 3.0, 6.0 * PI), (2.0, 2.0 * PI), (1.0, 2.0 * PI)] {
            assert!(close(closure_period_f64(w).period().unwrap(), period, 1e-12));
            let (x0, p0) = quadratures_pt(0.0, -3.0, w, 0.0).unwrap();
            let (x1, p1) = quadratures_pt(0.0, -3.0, w, period).unwrap();
            assert!((x1 - x0).hypot(p1 - p0) <= 1e-9);
        }
    }

    #[test]
    fn classify_figure_examples() {
        match classify(8.0, 8.0, -2.0, DEFAULT_CLASSIFY_TOL).unwrap() {
            CurveFamily::Circle { radius, frequency } => {
                assert!(close(radius, 8.0 * SQRT_2, 1e-12));
                assert_eq!(frequency, 2.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            classify(10.0, 6.0, -2.0, DEFAULT_CLASSIFY_TOL).unwrap(),
            CurveFamily::CardioidLike { .. }
        ));
        assert_eq!(
            classify(0.0, -3.0, 2.0 / 3.0, DEFAULT_CLASSIFY_TOL).unwrap(),
            CurveFamily::PentagramClass { points: 5 }
        );
        assert_eq!(
            classify(5.0, 5.0, 2.0, DEFAULT_CLASSIFY_TOL).unwrap(),
            CurveFamily::RoundedPolygon { sides: 3 }
        );
        assert_eq!(
            classify(7.0, 4.5, 3.0, DEFAULT_CLASSIFY_TOL).unwrap(),
            CurveFamily::RoundedPolygon { sides: 4 }
        );
        assert_eq!(
            classify(0.0, 15.0, 2.0, DEFAULT_CLASSIFY_TOL).unwrap(),
            CurveFamily::Rose { petals: 3 }
        );
    }

    #[test]
    fn classify_special_modes() {
        assert_eq!(classify(0.0, 0.0, 2.0, 1e-9).unwrap(), CurveFamily::FixedPoint);
        assert_eq!(
            classify(0.0, 3.0, 1.0, 1e-9).unwrap(),
            CurveFamily::FixedPositionOscillatingMomentum {
                amplitude: 3.0 * SQRT_2
            }
        );
        match classify(2.0, 1.0, 1.0, 1e-9).unwrap() {
            CurveFamily::Ellipse { semi_axis_x, semi_axis_p } => {
                assert!(close(semi_axis_x, 2.0 * SQRT_2, 1e-12));
                assert!(close(semi_axis_p, 3.0 * SQRT_2, 1e-12));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(classify(1.0, 1.0, -1.0, 1e-9).unwrap(), CurveFamily::SecularUnbounded);
        // deltoid: |c1| = 2|c2| at ω_eff = 2 means F0 + 3n0 = 2F0
        assert_eq!(
            classify(1.0, 3.0, 2.0, 1e-9).unwrap(),
            CurveFamily::Hypocycloid { cusps: 3 }
        );
        assert_eq!(classify(1.0, 1.0, SQRT_2, 1e-9).unwrap(), CurveFamily::Generic);
    }

    #[test]
    fn ehrenfest_violation_of_vacuum_mode() {
        // dx/dt − p = √2 F0 sin(ω_eff t) for every non-secular ω_eff
        let h = 1e-5;
        for (n0, f0, w) in [(1.0, 0.5, 2.0), (3.0, -2.0, -3.0), (0.0, 3.0, 1.0)] {
            for t in [0.4, 1.3, 2.9] {
                let xp = quadratures_pt(n0, f0, w, t + h).unwrap().0;
                let xm = quadratures_pt(n0, f0, w, t - h).unwrap().0;
                let dxdt = (xp - xm) / (2.0 * h);
                let p = quadratures_pt(n0, f0, w, t).unwrap().1;
                assert!(close(dxdt - p, SQRT_2 * f0 * (w * t).sin(), 1e-7));
            }
        }
        // Vacuum at resonance: x is frozen while p oscillates.
        for t in [0.4, 1.3, 2.9] {
            let (x, p) = quadratures_pt(0.0, 3.0, 1.0, t).unwrap();
            assert!(x.abs() < 1e-14);
            assert!(p.abs() > 0.1);
        }
    }

    #[test]
    fn phase_examples() {
        assert_eq!(phase_closed(5.0, 0.0), 0.0);
        assert!(close(phase_closed(1.0, PI / 2.0), -PI / 4.0, EPS));
        assert!(close(phase_closed(1e3, PI / 2.0), -PI / 2.0, 1e-3));
        let grid: Vec<f64> = (0..=10_000).map(|k| 4.0 * PI * k as f64 / 10_000.0).collect();
        assert!(close(phase_square_wave_deviation(0.0, &grid, 0.1).unwrap(), PI / 2.0, EPS));
        assert!(phase_square_wave_deviation(1e3, &grid, 0.1).unwrap() <= 0.011);
        let flips = phase_flip_times(1e3, 0.1, 4.0 * PI - 0.1, 1000);
        assert_eq!(flips.len(), 3);
        for (k, t) in flips.iter().enumerate() {
            assert!(close(*t, (k + 1) as f64 * PI, 1e-12), "{t}");
        }
    }

    #[test]
    fn square_wave_deviation_decreases_with_drive() {
        let grid: Vec<f64> = (0..=2000).map(|k| 2.0 * PI * k as f64 / 2000.0).collect();
        let mut last = f64::INFINITY;
        for f0 in [1.0, 10.0, 100.0, 1e3, 1e4] {
            let d = phase_square_wave_deviation(f0, &grid, 0.1).unwrap();
            assert!(d < last);
            last = d;
        }
    }

    #[test]
    fn trajectory_sampling() {
        let grid = SimulationGrid::new(0.0, 2.0 * PI, 1e-2).unwrap();
        let tr = Trajectory::closed_form(0.0, &DriveSpec::pt(3.0, 1.0).unwrap(), &grid, SecularPolicy::Reject)
            .unwrap();
        assert!(tr.points.windows(2).all(|w| w[1].t > w[0].t));
        assert!(tr.points.iter().all(|p| p.theta.is_some() && p.var_x == 0.5 && p.radius >= 0.0));
        assert_eq!(tr.closure_period, Some(2.0 * PI));

        let secular = DriveSpec::pt(1.0, -1.0).unwrap();
        assert!(Trajectory::closed_form(0.0, &secular, &grid, SecularPolicy::Reject).is_err());
        let tr = Trajectory::closed_form(0.0, &secular, &grid, SecularPolicy::UseLimit).unwrap();
        assert_eq!(tr.closure_period, None);
    }

    proptest! {
        #[test]
        fn starts_at_coherent_amplitude(n0 in -10.0..10.0f64, f0 in -10.0..10.0f64, w in -5.0..5.0f64) {
            prop_assume!((w + 1.0).abs() > 1e-6);
            let (x, p) = quadratures_pt(n0, f0, w, 0.0).unwrap();
            prop_assert_eq!(x, SQRT_2 * n0);
            prop_assert_eq!(p, 0.0);
        }

        #[test]
        fn radius_law(n0 in -10.0..10.0f64, f0 in -10.0..10.0f64, w in -5.0..5.0f64, t in 0.0..30.0f64) {
            prop_assume!((w + 1.0).abs() > 0.1);
            let (c1, c2) = lobe_amplitudes(n0, f0, w).unwrap();
            let (x, p) = quadratures_pt(n0, f0, w, t).unwrap();
            let law = c1 * c1 + c2 * c2 - 2.0 * c1 * c2 * ((1.0 + w) * t).cos();
            prop_assert!((x * x + p * p - law).abs() <= 1e-10 * (1.0 + c1 * c1 + c2 * c2));
        }

        #[test]
        fn lobe_form_matches_quadratures(n0 in -10.0..10.0f64, f0 in -10.0..10.0f64, w in -5.0..5.0f64, t in 0.0..30.0f64) {
            prop_assume!((w + 1.0).abs() > 0.1);
            let (c1, c2) = lobe_amplitudes(n0, f0, w).unwrap();
            let (x, p) = quadratures_pt(n0, f0, w, t).unwrap();
            prop_assert!((x - (c1 * t.cos() - c2 * (w * t).cos())).abs() <= 1e-10 * (1.0 + c1.abs() + c2.abs()));
            prop_assert!((p + (c1 * t.sin() + c2 * (w * t).sin())).abs() <= 1e-10 * (1.0 + c1.abs() + c2.abs()));
        }

        #[test]
        fn classify_is_scale_invariant(n0 in -10.0..10.0f64, f0 in -10.0..10.0f64, k in 0usize..8, lambda in 0.01..100.0f64) {
            let ws = [-2.0, -0.5, 1.0, 2.0, 3.0, 2.0 / 3.0, 0.25, SQRT_2];
            let w = ws[k];
            prop_assume!(n0.abs().max(f0.abs()) > 1e-3);
            let a = classify(n0, f0, w, 1e-9).unwrap();
            let b = classify(lambda * n0, lambda * f0, w, 1e-9).unwrap();
            prop_assert_eq!(a.name(), b.name());
        }
    }
}
