//! Extended-precision Taylor integration of the lab-frame equation.
//!
//! Under a complex drive the truncated propagator is strongly non-normal:
//! the constant-coefficient `a` part acts like `exp(−i F t a)`, which
//! amplifies a perturbation sitting at level `n` roughly like
//! `(|F| t)^n/√n!`. Starting from the vacuum with `F0 = 3`, double-precision
//! rounding is amplified past the signal within one period, so no f64
//! integrator can reproduce the exact trajectory there. Running the same
//! brute-force equation with a few hundred bits of mantissa and a Taylor
//! series summed to working precision removes both rounding and step error
//! as sources of contamination.
//!
//! The drive is expanded about each step start as a sum of exponentials,
//! `F(t0 + τ) = Σ_m A_m e^{iλ_m τ}`, which is exact for both families.

use rug::ops::CompleteRound;
use rug::{Assign, Float};

use crate::error::{Error, Result};
use crate::model::{DriveFamily, DriveSpec, SimulationGrid};
use crate::C64;

use super::fock::FockVector;

pub const DEFAULT_PRECISION_BITS: u32 = 192;
pub const MIN_PRECISION_BITS: u32 = 64;
/// Convergence tests run in f64, whose range ends near 2^−1022.
pub const MAX_PRECISION_BITS: u32 = 512;
const MAX_TAYLOR_ORDER: usize = 2000;
const MAX_RATE_TIMES_STEP: f64 = 12.0;

#[derive(Clone)]
struct Cx {
    re: Float,
    im: Float,
}

impl Cx {
    fn zero(prec: u32) -> Self {
        Self {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    fn from_c64(prec: u32, z: C64) -> Self {
        Self {
            re: Float::with_val(prec, z.re),
            im: Float::with_val(prec, z.im),
        }
    }

    fn to_c64(&self) -> C64 {
        C64::new(self.re.to_f64(), self.im.to_f64())
    }

    fn norm_sqr_f64(&self) -> f64 {
        let (re, im) = (self.re.to_f64(), self.im.to_f64());
        re * re + im * im
    }

    /// `self += s·i^j·z` for real `s`.
    fn add_rotated_scaled(&mut self, quarter_turns: usize, s: &Float, z: &Cx, tmp: &mut Float) {
        let (src, negate) = match quarter_turns % 4 {
            0 => ((&z.re, &z.im), (false, false)),
            1 => ((&z.im, &z.re), (true, false)),
            2 => ((&z.re, &z.im), (true, true)),
            _ => ((&z.im, &z.re), (false, true)),
        };
        *tmp = (s * src.0).complete(tmp.prec());
        if negate.0 {
            self.re -= &*tmp;
        } else {
            self.re += &*tmp;
        }
        *tmp = (s * src.1).complete(tmp.prec());
        if negate.1 {
            self.im -= &*tmp;
        } else {
            self.im += &*tmp;
        }
    }

    /// `self = a·b`.
    fn set_product(&mut self, a: &Cx, b: &Cx, tmp: &mut Float) {
        let prec = tmp.prec();
        self.re = (&a.re * &b.re).complete(prec);
        *tmp = (&a.im * &b.im).complete(prec);
        self.re -= &*tmp;
        self.im = (&a.re * &b.im).complete(prec);
        *tmp = (&a.im * &b.re).complete(prec);
        self.im += &*tmp;
    }
}

/// One exponential component `A e^{iλt}` of the drive.
struct Component {
    amplitude: C64,
    rate: f64,
}

fn components(drive: &DriveSpec) -> Vec<Component> {
    match drive.family {
        DriveFamily::PtComplex => vec![Component {
            amplitude: C64::new(drive.f0, 0.0),
            rate: drive.sign.value() * drive.omega,
        }],
        DriveFamily::RealCosine => vec![
            Component {
                amplitude: C64::new(0.5 * drive.f0, 0.0),
                rate: drive.omega,
            },
            Component {
                amplitude: C64::new(0.5 * drive.f0, 0.0),
                rate: -drive.omega,
            },
        ],
    }
}

struct Integrator {
    prec: u32,
    dim: usize,
    components: Vec<Component>,
    sqrt_n: Vec<Float>,
    diag: Vec<Float>,
    /// Stop once a scaled Taylor term is below this fraction of the state.
    eps_sqr: f64,
}

impl Integrator {
    fn new(prec: u32, dim: usize, drive: &DriveSpec) -> Self {
        Self {
            prec,
            dim,
            components: components(drive),
            sqrt_n: (0..=dim).map(|n| Float::with_val(prec, n).sqrt()).collect(),
            diag: (0..dim).map(|n| Float::with_val(prec, n) + 0.5).collect(),
            eps_sqr: 2f64.powi(-2 * prec as i32 + 8).max(f64::MIN_POSITIVE),
        }
    }

    /// Highest level carrying more than the working precision's share of
    /// the norm, which sets the fastest rate that matters in a step.
    fn active_level(&self, y: &[Cx]) -> usize {
        let weights: Vec<f64> = y.iter().map(Cx::norm_sqr_f64).collect();
        let total: f64 = weights.iter().sum();
        weights
            .iter()
            .rposition(|w| *w > self.eps_sqr * total)
            .unwrap_or(0)
    }

    fn step(&self, t0: f64, t1: f64, y: &mut Vec<Cx>) -> Result<()> {
        let prec = self.prec;
        let tau = Float::with_val(prec, t1) - t0;
        // A_m e^{iλ_m t0} in full precision.
        let amps: Vec<Cx> = self
            .components
            .iter()
            .map(|c| {
                let phase = Float::with_val(prec, c.rate) * t0;
                let (sin, cos) = phase.sin_cos(Float::new(prec));
                let a = Cx::from_c64(prec, c.amplitude);
                let mut out = Cx::zero(prec);
                let rot = Cx { re: cos, im: sin };
                let mut tmp = Float::new(prec);
                out.set_product(&a, &rot, &mut tmp);
                out
            })
            .collect();
        // r_{m,j} = (λ_m τ)^j / j!, cut once negligible.
        let mut scaled_rates: Vec<Vec<Float>> = Vec::new();
        for c in &self.components {
            let x = Float::with_val(prec, c.rate) * &tau;
            let mut terms = vec![Float::with_val(prec, 1)];
            loop {
                let j = terms.len();
                let next = Float::with_val(prec, terms[j - 1].clone() * &x) / j as u32;
                if next.is_zero() || next.to_f64().abs() < self.eps_sqr.sqrt() * 1e-3 || j > MAX_TAYLOR_ORDER {
                    break;
                }
                terms.push(next);
            }
            scaled_rates.push(terms);
        }

        let dim = self.dim;
        let mut coeffs: Vec<Vec<Cx>> = vec![y.clone()];
        let mut sum = y.clone();
        let mut tmp = Float::new(prec);
        let mut drive_part = vec![Cx::zero(prec); dim];
        let mut conv = vec![Cx::zero(prec); dim];
        let mut small_terms = 0;
        for k in 0..MAX_TAYLOR_ORDER {
            // Σ_m A_m Σ_j i^j r_{m,j} y_{k−j}
            for z in drive_part.iter_mut() {
                z.re.assign(0);
                z.im.assign(0);
            }
            for (amp, rates) in amps.iter().zip(&scaled_rates) {
                for z in conv.iter_mut() {
                    z.re.assign(0);
                    z.im.assign(0);
                }
                for (j, r) in rates.iter().enumerate().take(k + 1) {
                    let src = &coeffs[k - j];
                    for n in 0..dim {
                        conv[n].add_rotated_scaled(j, r, &src[n], &mut tmp);
                    }
                }
                let mut prod = Cx::zero(prec);
                for n in 0..dim {
                    prod.set_product(amp, &conv[n], &mut tmp);
                    drive_part[n].re += &prod.re;
                    drive_part[n].im += &prod.im;
                }
            }
            // z = D y_k + X·drive_part, then y_{k+1} = −iτ z/(k+1).
            let factor = Float::with_val(prec, &tau / (k as u32 + 1));
            let yk = &coeffs[k];
            let mut next = Vec::with_capacity(dim);
            let mut size = 0.0;
            for n in 0..dim {
                let mut z = Cx::zero(prec);
                z.re = (&self.diag[n] * &yk[n].re).complete(prec);
                z.im = (&self.diag[n] * &yk[n].im).complete(prec);
                if n > 0 {
                    tmp = (&self.sqrt_n[n] * &drive_part[n - 1].re).complete(prec);
                    z.re += &tmp;
                    tmp = (&self.sqrt_n[n] * &drive_part[n - 1].im).complete(prec);
                    z.im += &tmp;
                }
                if n + 1 < dim {
                    tmp = (&self.sqrt_n[n + 1] * &drive_part[n + 1].re).complete(prec);
                    z.re += &tmp;
                    tmp = (&self.sqrt_n[n + 1] * &drive_part[n + 1].im).complete(prec);
                    z.im += &tmp;
                }
                // −i(re + i·im) = im − i·re
                let out = Cx {
                    re: (&z.im * &factor).complete(prec),
                    im: -(&z.re * &factor).complete(prec),
                };
                sum[n].re += &out.re;
                sum[n].im += &out.im;
                size += out.norm_sqr_f64();
                next.push(out);
            }
            coeffs.push(next);
            let total: f64 = sum.iter().map(Cx::norm_sqr_f64).sum();
            if !total.is_finite() {
                return Err(Error::NormOverflow { t: t1, norm: total.sqrt() });
            }
            if size <= self.eps_sqr * total {
                small_terms += 1;
                if small_terms >= 2 {
                    *y = sum;
                    return Ok(());
                }
            } else {
                small_terms = 0;
            }
        }
        Err(Error::SeriesNotConverged { t: t0 })
    }

    /// Substep count keeping `τ × (fastest active rate)` below
    /// [`MAX_RATE_TIMES_STEP`]. Larger products need more terms and lose
    /// about `1.44·rate·τ` bits to cancellation.
    fn substeps(&self, y: &[Cx], f_abs: f64, h: f64) -> usize {
        let n = self.active_level(y).max(1) as f64;
        let rate = n + 0.5 + 2.0 * f_abs * (n + 1.0).sqrt();
        (rate * h.abs() / MAX_RATE_TIMES_STEP).ceil().max(1.0) as usize
    }
}

/// Integrates `i dψ/dt = [(n + 1/2) + F(t)(a† + a)]ψ` over `grid` with
/// `precision_bits` of mantissa, handing every `record_stride`-th state
/// (rounded to f64) to `observer`.
pub fn evolve_extended<F>(
    psi0: &FockVector,
    drive: &DriveSpec,
    grid: &SimulationGrid,
    precision_bits: u32,
    record_stride: u64,
    norm_guard: f64,
    mut observer: F,
) -> Result<FockVector>
where
    F: FnMut(f64, &FockVector) -> Result<()>,
{
    if !(MIN_PRECISION_BITS..=MAX_PRECISION_BITS).contains(&precision_bits) {
        return Err(Error::invalid(
            "precision_bits",
            format!("must lie in {MIN_PRECISION_BITS}..={MAX_PRECISION_BITS}"),
        ));
    }
    if record_stride == 0 {
        return Err(Error::invalid("record_stride", "must be at least 1"));
    }
    if psi0.norm_sqr() == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let dim = psi0.dim();
    let integrator = Integrator::new(precision_bits, dim, drive);
    let f_abs = drive.f0.abs();
    let mut y: Vec<Cx> = psi0
        .amplitudes()
        .iter()
        .map(|&z| Cx::from_c64(precision_bits, z))
        .collect();
    let round = |y: &[Cx]| FockVector::from_raw(y.iter().map(Cx::to_c64).collect());
    observer(grid.time(0), psi0)?;
    let steps = grid.steps();
    for k in 0..steps {
        let (t, t_next) = (grid.time(k), grid.time(k + 1));
        let parts = integrator.substeps(&y, f_abs, t_next - t);
        for s in 0..parts {
            let a = t + (t_next - t) * s as f64 / parts as f64;
            let b = if s + 1 == parts {
                t_next
            } else {
                t + (t_next - t) * (s + 1) as f64 / parts as f64
            };
            integrator.step(a, b, &mut y)?;
        }
        let norm = y.iter().map(Cx::norm_sqr_f64).sum::<f64>().sqrt();
        if !(norm <= norm_guard) {
            return Err(Error::NormOverflow { t: t_next, norm });
        }
        if (k + 1) % record_stride == 0 || k + 1 == steps {
            observer(t_next, &round(&y))?;
        }
    }
    Ok(round(&y))
}
