//! Wei–Norman coefficients of the driven-oscillator propagator
//!
//! `U(t) = e^{−i f0} e^{−i f1 a†a} e^{−i f2 a†} e^{−i f3 a}` with
//!
//! ```text
//! f1(t) = t
//! f2(t) = ∫₀ᵗ F(s) e^{−is} ds
//! f3(t) = f2(t)* = ∫₀ᵗ F*(s) e^{is} ds
//! f0(t) = −i ∫₀ᵗ f2(s) ∂ₛf3(s) ds = −i ∫₀ᵗ ds F*(s) e^{is} ∫₀ˢ du F(u) e^{−iu}
//! ```
//!
//! so the coefficient ODEs read `∂f0 = −i f2 ∂f3`, `∂f1 = 1`,
//! `∂f2 = F e^{−it}` and `∂f3 = F* e^{it}`. [`wn_residual`] checks exactly
//! these relations by finite differences.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DriveSpec, RESONANT_THRESHOLD};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeiNormanCoefficients {
    pub t: f64,
    pub f0: C64,
    pub f1: C64,
    pub f2: C64,
    pub f3: C64,
}

/// An arbitrary drive `t ↦ F(t)` together with a human-readable label.
#[derive(Clone)]
pub struct DriveFunction {
    f: Arc<dyn Fn(f64) -> C64 + Send + Sync>,
    pub description: String,
}

impl DriveFunction {
    pub fn new(description: impl Into<String>, f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            description: description.into(),
        }
    }

    pub fn zero() -> Self {
        Self::new("F = 0", |_| C64::new(0.0, 0.0))
    }

    #[inline]
    pub fn eval(&self, t: f64) -> C64 {
        (self.f)(t)
    }
}

impl fmt::Debug for DriveFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriveFunction")
            .field("description", &self.description)
            .finish()
    }
}

impl From<DriveSpec> for DriveFunction {
    fn from(spec: DriveSpec) -> Self {
        let description = format!(
            "{:?} F0={} omega={} sign={}",
            spec.family,
            spec.f0,
            spec.omega,
            spec.sign.value()
        );
        Self::new(description, move |t| spec.value(t))
    }
}

/// `(e^{iδt} − 1)/(iδ)` without cancellation for small `δ`.
fn phase_integral(delta: f64, t: f64) -> C64 {
    if delta.abs() <= RESONANT_THRESHOLD {
        return C64::new(t, 0.0);
    }
    let x = delta * t;
    let half = (0.5 * x).sin();
    let numerator = C64::new(-2.0 * half * half, x.sin());
    numerator / C64::new(0.0, delta)
}

/// Closed-form `f2(t)` for the PT drive `F0·e^{iω_eff t}`.
pub fn f2_closed_pt(drive: &DriveSpec, t: f64) -> Result<C64> {
    let w = drive.effective_omega()?;
    Ok(phase_integral(w - 1.0, t) * drive.f0)
}

pub fn f3_closed_pt(drive: &DriveSpec, t: f64) -> Result<C64> {
    Ok(f2_closed_pt(drive, t)?.conj())
}

/// `f2(t) = ∫₀ᵗ F(s)e^{−is} ds` alone, by adaptive quadrature.
pub fn f2_numeric(drive: &DriveFunction, t: f64, tol: f64) -> Result<C64> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be > 0"));
    }
    integrate(|s| drive.eval(s) * C64::new(0.0, -s).exp(), 0.0, t, &QuadratureConfig::with_tol(tol)).into_result()
}

/// All four coefficients at `t` by adaptive quadrature. `f0` is the nested
/// double integral; the inner integral is evaluated to a tighter tolerance
/// than the outer one.
pub fn f_numeric(drive: &DriveFunction, t: f64, tol: f64) -> Result<WeiNormanCoefficients> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be > 0"));
    }
    let cfg = QuadratureConfig::with_tol(tol);
    let f2 = f2_numeric(drive, t, tol)?;
    let f3 = integrate(|s| drive.eval(s).conj() * C64::new(0.0, s).exp(), 0.0, t, &cfg).into_result()?;

    let inner_cfg = QuadratureConfig {
        tol: tol * 1e-2 / t.abs().max(1.0),
        ..cfg
    };
    let mut inner_failure = None;
    let outer = integrate(
        |s| {
            let inner = integrate(|u| drive.eval(u) * C64::new(0.0, -u).exp(), 0.0, s, &inner_cfg);
            if !inner.converged && inner_failure.is_none() {
                inner_failure = Some(inner.error);
            }
            drive.eval(s).conj() * C64::new(0.0, s).exp() * inner.value
        },
        0.0,
        t,
        &cfg,
    );
    let f0 = -I * outer.value;
    if let Some(err) = inner_failure {
        return Err(Error::QuadratureNotConverged {
            best_re: f0.re,
            best_im: f0.im,
            error: err.max(outer.error),
        });
    }
    outer.into_result()?;
    Ok(WeiNormanCoefficients {
        t,
        f0,
        f1: C64::new(t, 0.0),
        f2,
        f3,
    })
}

/// Coefficients on an increasing time grid, integrating panel by panel so
/// the cost is linear in the number of grid points.
pub fn coefficient_grid(drive: &DriveFunction, times: &[f64], tol: f64) -> Result<Vec<WeiNormanCoefficients>> {
    check_increasing(times)?;
    let Some(&t_first) = times.first() else {
        return Ok(Vec::new());
    };
    let start = f_numeric(drive, t_first, tol)?;
    let panel_tol = tol / times.len().max(1) as f64;
    let cfg = QuadratureConfig {
        tol: panel_tol,
        initial_panels: 1,
        ..QuadratureConfig::default()
    };
    let mut out = Vec::with_capacity(times.len());
    out.push(start);
    let mut cur = start;
    for w in times.windows(2) {
        let (a, b) = (w[0], w[1]);
        let f2_a = cur.f2;
        let df2 = integrate(|s| drive.eval(s) * C64::new(0.0, -s).exp(), a, b, &cfg).into_result()?;
        let df3 = integrate(|s| drive.eval(s).conj() * C64::new(0.0, s).exp(), a, b, &cfg).into_result()?;
        let df0 = integrate(
            |s| {
                let partial = integrate(|u| drive.eval(u) * C64::new(0.0, -u).exp(), a, s, &cfg).value;
                drive.eval(s).conj() * C64::new(0.0, s).exp() * (f2_a + partial)
            },
            a,
            b,
            &cfg,
        )
        .into_result()?;
        cur = WeiNormanCoefficients {
            t: b,
            f0: cur.f0 - I * df0,
            f1: C64::new(b, 0.0),
            f2: cur.f2 + df2,
            f3: cur.f3 + df3,
        };
        out.push(cur);
    }
    Ok(out)
}

/// PT-drive coefficients on a grid: closed-form `f1..f3`, with `f0`
/// accumulated numerically from the closed-form `f2`.
pub fn closed_pt_grid(drive: &DriveSpec, times: &[f64], tol: f64) -> Result<Vec<WeiNormanCoefficients>> {
    check_increasing(times)?;
    let Some(&t_first) = times.first() else {
        return Ok(Vec::new());
    };
    let func = DriveFunction::from(*drive);
    let f0_first = f_numeric(&func, t_first, tol)?.f0;
    let cfg = QuadratureConfig {
        tol: tol / times.len().max(1) as f64,
        initial_panels: 1,
        ..QuadratureConfig::default()
    };
    let integrand = |s: f64| -> C64 {
        let f2 = f2_closed_pt(drive, s).expect("PT drive checked above");
        drive.value(s).conj() * C64::new(0.0, s).exp() * f2
    };
    let mut f0 = f0_first;
    let mut out = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        if k > 0 {
            f0 -= I * integrate(integrand, times[k - 1], t, &cfg).into_result()?;
        }
        let f2 = f2_closed_pt(drive, t)?;
        out.push(WeiNormanCoefficients {
            t,
            f0,
            f1: C64::new(t, 0.0),
            f2,
            f3: f2.conj(),
        });
    }
    Ok(out)
}

fn check_increasing(times: &[f64]) -> Result<()> {
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("times", "must be strictly increasing"));
    }
    Ok(())
}

/// Largest finite-difference violation of each coefficient ODE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub f0: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub points: usize,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.f0.max(self.f1).max(self.f2).max(self.f3)
    }
}

/// Second-order central differences of the coefficients compared against
/// the right-hand sides of the coefficient ODEs, at every interior point.
pub fn wn_residual(coeffs: &[WeiNormanCoefficients], drive: &DriveFunction) -> ResidualReport {
    let mut report = ResidualReport {
        f0: 0.0,
        f1: 0.0,
        f2: 0.0,
        f3: 0.0,
        points: 0,
    };
    for w in coeffs.windows(3) {
        let (prev, cur, next) = (&w[0], &w[1], &w[2]);
        let h1 = cur.t - prev.t;
        let h2 = next.t - cur.t;
        let d = |a: C64, b: C64, c: C64| -> C64 {
            (c * (h1 * h1) - a * (h2 * h2) + b * (h2 * h2 - h1 * h1)) / (h1 * h2 * (h1 + h2))
        };
        let t = cur.t;
        let f = drive.eval(t);
        let rhs2 = f * C64::new(0.0, -t).exp();
        let rhs3 = f.conj() * C64::new(0.0, t).exp();
        let rhs0 = -I * cur.f2 * rhs3;

        let r0 = (d(prev.f0, cur.f0, next.f0) - rhs0).norm();
        let r1 = (d(prev.f1, cur.f1, next.f1) - 1.0).norm();
        let r2 = (d(prev.f2, cur.f2, next.f2) - rhs2).norm();
        let r3 = (d(prev.f3, cur.f3, next.f3) - rhs3).norm();
        report.f0 = report.f0.max(r0);
        report.f1 = report.f1.max(r1);
        report.f2 = report.f2.max(r2);
        report.f3 = report.f3.max(r3);
        report.points += 1;
    }
    report
}
