//! Wigner function of a Fock-space state on a rectangular `(x, p)` grid,
//! from the displaced-parity form
//! `W(x, p) = (1/π) Σ_{m,n} c_m* c_n (−1)ⁿ ⟨m|D(2β)|n⟩ / ⟨ψ|ψ⟩`,
//! `β = (x + ip)/√2`.

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::C64;

use super::fock::FockVector;

pub const DEFAULT_GRID_POINT_CAP: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// `values[[i, j]] = W(x[i], p[j])`.
    pub values: Array2<f64>,
    /// Riemann sum `Σ W·Δx·Δp` (uniform axes only).
    pub integral: Option<f64>,
    /// Largest `|W|` on the grid boundary relative to the largest `|W|`.
    pub edge_fraction: f64,
    /// Set when the grid evidently misses part of the support.
    pub support_clipped: bool,
}

impl WignerGrid {
    /// Grid point of largest `W`.
    pub fn peak(&self) -> (f64, f64, f64) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for ((i, j), &w) in self.values.indexed_iter() {
            if w > best.2 {
                best = (i, j, w);
            }
        }
        (self.x[best.0], self.p[best.1], best.2)
    }
}

/// `ℓ_n^{(k)}(u) = √(n!/(n+k)!) u^{k/2} e^{−u/2} L_n^{(k)}(u)` for
/// `n = 0..count`, by the normalized three-term recurrence.
fn laguerre_functions(k: usize, u: f64, count: usize, ln_fact_k: f64, out: &mut Vec<f64>) {
    out.clear();
    if count == 0 {
        return;
    }
    let kf = k as f64;
    let l0 = if u == 0.0 {
        if k == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (0.5 * kf * u.ln() - 0.5 * u - 0.5 * ln_fact_k).exp()
    };
    out.push(l0);
    if count == 1 {
        return;
    }
    out.push((1.0 + kf - u) * l0 / (1.0 + kf).sqrt());
    for n in 1..count - 1 {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + kf - u) * out[n] - (nf * (nf + kf)).sqrt() * out[n - 1])
            / ((nf + 1.0) * (nf + 1.0 + kf)).sqrt();
        out.push(next);
    }
}

fn wigner_point(c: &[C64], norm_sqr: f64, ln_fact: &[f64], x: f64, p: f64, scratch: &mut Vec<f64>) -> f64 {
    let dim = c.len();
    // γ = 2β = √2(x + ip)
    let gamma = C64::new(x, p) * std::f64::consts::SQRT_2;
    let u = gamma.norm_sqr();
    let phase = C64::from_polar(1.0, gamma.arg());
    let mut total = C64::new(0.0, 0.0);
    let mut rot = C64::new(1.0, 0.0);
    for k in 0..dim {
        laguerre_functions(k, u, dim - k, ln_fact[k], scratch);
        // ⟨n+k|D(γ)|n⟩ = e^{ikφ} ℓ_n^{(k)},  ⟨n|D(γ)|n+k⟩ = (−1)^k e^{−ikφ} ℓ_n^{(k)}
        let mut lower = C64::new(0.0, 0.0);
        let mut upper = C64::new(0.0, 0.0);
        for (n, &l) in scratch.iter().enumerate() {
            let sign_n = if n % 2 == 0 { 1.0 } else { -1.0 };
            let sign_nk = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
            // term c_m* c_n (−1)ⁿ ⟨m|D|n⟩ with (m, n) = (n+k, n) and (n, n+k)
            lower += c[n + k].conj() * c[n] * (sign_n * l);
            if k > 0 {
                upper += c[n].conj() * c[n + k] * (sign_nk * l);
            }
        }
        let sign_k = if k % 2 == 0 { 1.0 } else { -1.0 };
        total += rot * lower + rot.conj() * upper * sign_k;
        rot *= phase;
    }
    total.re / (std::f64::consts::PI * norm_sqr)
}

/// Evaluates `W` on the outer product of `x_samples` and `p_samples`.
pub fn wigner_grid(psi: &FockVector, x_samples: &[f64], p_samples: &[f64]) -> Result<WignerGrid> {
    wigner_grid_capped(psi, x_samples, p_samples, DEFAULT_GRID_POINT_CAP)
}

pub fn wigner_grid_capped(
    psi: &FockVector,
    x_samples: &[f64],
    p_samples: &[f64],
    cap: usize,
) -> Result<WignerGrid> {
    let norm_sqr = psi.norm_sqr();
    if !(norm_sqr > 0.0) {
        return Err(Error::ZeroNorm);
    }
    if x_samples.is_empty() || p_samples.is_empty() {
        return Err(Error::invalid("grid", "needs at least one sample per axis"));
    }
    if x_samples.len().saturating_mul(p_samples.len()) > cap {
        return Err(Error::invalid("grid", format!("more than {cap} points")));
    }
    if x_samples.iter().chain(p_samples).any(|v| !v.is_finite()) {
        return Err(Error::invalid("grid", "samples must be finite"));
    }
    let c = psi.amplitudes();
    let mut ln_fact = vec![0.0; c.len()];
    for k in 1..c.len() {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let rows: Vec<Vec<f64>> = x_samples
        .par_iter()
        .map(|&x| {
            let mut scratch = Vec::with_capacity(c.len());
            p_samples
                .iter()
                .map(|&p| wigner_point(c, norm_sqr, &ln_fact, x, p, &mut scratch))
                .collect()
        })
        .collect();
    let (nx, np) = (x_samples.len(), p_samples.len());
    let values = Array2::from_shape_fn((nx, np), |(i, j)| rows[i][j]);

    let step = |v: &[f64]| -> Option<f64> {
        if v.len() < 2 {
            return None;
        }
        let h = (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64;
        v.windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300))
            .then_some(h.abs())
    };
    let integral = match (step(x_samples), step(p_samples)) {
        (Some(hx), Some(hp)) => Some(values.sum() * hx * hp),
        _ => None,
    };
    let peak = values.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let mut edge: f64 = 0.0;
    for i in 0..nx {
        edge = edge.max(values[[i, 0]].abs()).max(values[[i, np - 1]].abs());
    }
    for j in 0..np {
        edge = edge.max(values[[0, j]].abs()).max(values[[nx - 1, j]].abs());
    }
    let edge_fraction = if peak > 0.0 { edge / peak } else { 0.0 };
    let support_clipped = edge_fraction > 1e-6 || integral.is_some_and(|s| (s - 1.0).abs() > 1e-3);
    Ok(WignerGrid {
        x: x_samples.to_vec(),
        p: p_samples.to_vec(),
        values,
        integral,
        edge_fraction,
        support_clipped,
    })
}

/// `n` equally spaced samples from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}
