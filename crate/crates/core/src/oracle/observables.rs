use std::f64::consts::{PI, SQRT_2};

use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::C64;

use super::fock::FockVector;

/// Expectation values of a (generally unnormalized) state, all divided by
/// `⟨ψ|ψ⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservableRecord {
    pub t: f64,
    pub x_mean: f64,
    pub p_mean: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub n_mean: f64,
    pub norm: f64,
    pub theta_pb: f64,
    pub tail_mass: f64,
}

impl ObservableRecord {
    pub fn at(mut self, t: f64) -> Self {
        self.t = t;
        self
    }
}

struct Moments {
    norm_sqr: f64,
    a: C64,
    a2: C64,
    n: f64,
}

fn moments(psi: &FockVector) -> Result<Moments> {
    let c = psi.amplitudes();
    let norm_sqr = psi.norm_sqr();
    if !(norm_sqr > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let mut a = C64::new(0.0, 0.0);
    let mut a2 = C64::new(0.0, 0.0);
    let mut n = 0.0;
    for k in 0..c.len() {
        n += k as f64 * c[k].norm_sqr();
        if k + 1 < c.len() {
            a += c[k].conj() * c[k + 1] * ((k + 1) as f64).sqrt();
        }
        if k + 2 < c.len() {
            a2 += c[k].conj() * c[k + 2] * (((k + 1) * (k + 2)) as f64).sqrt();
        }
    }
    Ok(Moments {
        norm_sqr,
        a: a / norm_sqr,
        a2: a2 / norm_sqr,
        n: n / norm_sqr,
    })
}

/// Normalized observables. Second moments use the untruncated identity
/// `⟨x²⟩ = Re⟨a²⟩ + ⟨n⟩ + 1/2`, i.e. `‖xψ‖²` with `xψ` allowed to reach
/// level `N`.
pub fn observables(psi: &FockVector, theta0: Option<f64>) -> Result<ObservableRecord> {
    let m = moments(psi)?;
    let x_mean = SQRT_2 * m.a.re;
    let p_mean = SQRT_2 * m.a.im;
    let x2 = m.a2.re + m.n + 0.5;
    let p2 = -m.a2.re + m.n + 0.5;
    Ok(ObservableRecord {
        t: 0.0,
        x_mean,
        p_mean,
        var_x: x2 - x_mean * x_mean,
        var_p: p2 - p_mean * p_mean,
        n_mean: m.n,
        norm: m.norm_sqr.sqrt(),
        theta_pb: pegg_barnett_theta(psi, theta0.unwrap_or_else(|| default_theta0(psi.dim())))?,
        tail_mass: psi.tail_mass(),
    })
}

/// `(⟨ψ|x|ψ⟩, ⟨ψ|p|ψ⟩)` without dividing by the norm. Only a diagnostic:
/// under non-unitary evolution these drift away from the closed form.
pub fn unnormalized_quadratures(psi: &FockVector) -> (f64, f64) {
    let c = psi.amplitudes();
    let a: C64 = (0..c.len() - 1)
        .map(|k| c[k].conj() * c[k + 1] * ((k + 1) as f64).sqrt())
        .sum();
    (SQRT_2 * a.re, SQRT_2 * a.im)
}

/// Window start that centres the phase grid on zero:
/// `θ_m = θ0 + 2πm/(s+1)` is symmetric about 0 for `θ0 = −π·s/(s+1)`.
pub fn default_theta0(dim: usize) -> f64 {
    let s = (dim - 1) as f64;
    -PI * s / (s + 1.0)
}

/// Probabilities `|⟨θ_m|ψ⟩|²/⟨ψ|ψ⟩` on the Pegg–Barnett grid, with
/// `|θ_m⟩ = (s+1)^{−1/2} Σ_n e^{inθ_m}|n⟩`, `s + 1 = N`.
pub fn pegg_barnett_distribution(psi: &FockVector, theta0: f64) -> Result<Vec<(f64, f64)>> {
    let norm_sqr = psi.norm_sqr();
    if !(norm_sqr > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let dim = psi.dim();
    // ⟨θ_m|ψ⟩ = N^{−1/2} Σ_n ψ_n e^{−inθ0} e^{−2πi nm/N}: a forward DFT.
    let mut buf: Vec<C64> = psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, c)| c * C64::from_polar(1.0, -(n as f64) * theta0))
        .collect();
    FftPlanner::<f64>::new().plan_fft_forward(dim).process(&mut buf);
    let step = 2.0 * PI / dim as f64;
    Ok(buf
        .iter()
        .enumerate()
        .map(|(m, z)| (theta0 + step * m as f64, z.norm_sqr() / (dim as f64 * norm_sqr)))
        .collect())
}

pub fn pegg_barnett_theta(psi: &FockVector, theta0: f64) -> Result<f64> {
    Ok(pegg_barnett_distribution(psi, theta0)?
        .iter()
        .map(|(theta, prob)| theta * prob)
        .sum())
}
