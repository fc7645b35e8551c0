//! Adaptive Simpson quadrature for complex-valued integrands on a real
//! interval.
//!
//! The interval is first cut into a few equal panels so that oscillatory
//! integrands cannot fool the very first error estimate, then each panel is
//! bisected until the Richardson error estimate `|S₂ − S₁|/15` falls below
//! its share of the tolerance.

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Absolute tolerance on the whole integral.
    pub tol: f64,
    pub max_depth: u32,
    pub initial_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_depth: 48,
            initial_panels: 8,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: C64,
    /// Sum of the local Richardson error estimates.
    pub error: f64,
    pub evaluations: usize,
    /// False when some subinterval hit the depth cap before meeting its
    /// tolerance. `value` is still the best available estimate.
    pub converged: bool,
}

impl Estimate {
    /// Converts a non-converged estimate into an error carrying the best
    /// value.
    pub fn into_result(self) -> Result<C64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::QuadratureNotConverged {
                best_re: self.value.re,
                best_im: self.value.im,
                error: self.error,
            })
        }
    }
}

struct Accumulator {
    value: C64,
    error: f64,
    evaluations: usize,
    converged: bool,
}

pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Estimate
where
    F: FnMut(f64) -> C64,
{
    let mut acc = Accumulator {
        value: C64::new(0.0, 0.0),
        error: 0.0,
        evaluations: 0,
        converged: true,
    };
    if a == b {
        return Estimate {
            value: acc.value,
            error: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    let panels = cfg.initial_panels.max(1);
    let width = (b - a) / panels as f64;
    let panel_tol = cfg.tol / panels as f64;
    let mut left = a;
    let mut f_left = f(left);
    acc.evaluations += 1;
    for k in 0..panels {
        let right = if k + 1 == panels {
            b
        } else {
            a + (k + 1) as f64 * width
        };
        let mid = 0.5 * (left + right);
        let f_mid = f(mid);
        let f_right = f(right);
        acc.evaluations += 2;
        let whole = simpson(left, right, f_left, f_mid, f_right);
        refine(
            &mut f, left, right, f_left, f_mid, f_right, whole, panel_tol, 0, cfg, &mut acc,
        );
        left = right;
        f_left = f_right;
    }
    Estimate {
        value: acc.value,
        error: acc.error,
        evaluations: acc.evaluations,
        converged: acc.converged,
    }
}

fn simpson(a: f64, b: f64, fa: C64, fm: C64, fb: C64) -> C64 {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn refine<F>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: C64,
    fm: C64,
    fb: C64,
    whole: C64,
    tol: f64,
    depth: u32,
    cfg: &QuadratureConfig,
    acc: &mut Accumulator,
) where
    F: FnMut(f64) -> C64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    acc.evaluations += 2;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    let err = delta.norm() / 15.0;
    // Never accept the first bisection: a panel that happens to span whole
    // periods of the integrand gives delta ≈ 0 by accident.
    let accept = depth >= 1 && err <= tol;
    if accept || depth >= cfg.max_depth || m <= a || m >= b {
        if !accept {
            acc.converged = false;
        }
        acc.value += left + right + delta / 15.0;
        acc.error += err;
        return;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, cfg, acc);
    refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, cfg, acc);
}
