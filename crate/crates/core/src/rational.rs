//! Rational frequency ratios and closure periods of two-frequency curves.

use std::f64::consts::PI;

use num_rational::Rational64;
use serde::Serialize;

pub const DEFAULT_MAX_DENOMINATOR: i64 = 1000;
pub const DEFAULT_RATIONAL_TOL: f64 = 1e-9;

/// Best rational approximation `p/q` with `q ≤ max_den` by continued
/// fractions, accepted only if it lies within `tol` of `x`.
pub fn rational_approx(x: f64, max_den: i64, tol: f64) -> Option<Rational64> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if ((h1 as f64) / (k1 as f64) - x).abs() <= tol {
            return Some(Rational64::new(h1, k1));
        }
        let frac = r - a as f64;
        if frac.abs() < 1e-300 {
            break;
        }
        r = 1.0 / frac;
    }
    if k1 != 0 && ((h1 as f64) / (k1 as f64) - x).abs() <= tol {
        Some(Rational64::new(h1, k1))
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Closure {
    Finite { period: f64 },
    /// Irrational ratio, or the secular point ω_eff = −1 where the orbit
    /// grows without bound.
    NoFiniteClosure,
}

impl Closure {
    pub fn period(&self) -> Option<f64> {
        match self {
            Closure::Finite { period } => Some(*period),
            Closure::NoFiniteClosure => None,
        }
    }
}

/// Smallest `T > 0` with `e^{−iT} = 1` and `e^{iω_eff T} = 1`, i.e. `2πq`
/// for `ω_eff = p/q` in lowest terms.
pub fn closure_period(omega_eff: Rational64) -> Closure {
    if omega_eff == Rational64::from_integer(-1) {
        return Closure::NoFiniteClosure;
    }
    // Rational64 keeps itself reduced with a positive denominator.
    Closure::Finite {
        period: 2.0 * PI * *omega_eff.denom() as f64,
    }
}

/// [`closure_period`] for a floating-point ratio, detecting rationality
/// with [`rational_approx`].
pub fn closure_period_f64(omega_eff: f64) -> Closure {
    match rational_approx(omega_eff, DEFAULT_MAX_DENOMINATOR, DEFAULT_RATIONAL_TOL) {
        Some(r) => closure_period(r),
        None => Closure::NoFiniteClosure,
    }
}
