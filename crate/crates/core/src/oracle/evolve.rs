//! Direct integration of `i dψ/dt = H(t)ψ` with
//! `H(t) = (n + 1/2) + F(t)(a† + a)` in a truncated Fock space.
//!
//! For complex `F` the Hamiltonian is not Hermitian and the norm of `ψ`
//! changes; states are stored as computed. In the interaction frame
//! `ψ = e^{−i(n+1/2)t}φ` the large diagonal disappears and
//! `i dφ/dt = F(t)(e^{it}a† + e^{−it}a)φ`, which is what makes long runs in
//! big spaces affordable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DriveSpec, SimulationGrid};
use crate::C64;

use super::fock::{FockVector, OperatorMatrix};
use super::observables::{observables, ObservableRecord};
use super::precise::{evolve_extended, DEFAULT_PRECISION_BITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Rk4,
    /// `ψ ← exp(−i H(t + h/2) h) ψ`, with the exponential summed as a
    /// Taylor series on substeps short enough for fast convergence.
    MidpointExponential,
    /// Taylor series summed to working precision in extended-precision
    /// arithmetic (see `precise`). Slow; meant for the strongly non-normal
    /// regimes where f64 rounding alone swamps the answer. Always works in
    /// the lab frame, so `frame` is ignored.
    ExtendedTaylor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Frame {
    Lab,
    Interaction,
}

pub const DEFAULT_NORM_GUARD: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub method: Method,
    pub frame: Frame,
    /// Record every `record_stride`-th grid sample; the final sample is
    /// always recorded.
    pub record_stride: u64,
    pub norm_guard: f64,
    /// Mantissa bits for [`Method::ExtendedTaylor`].
    pub precision_bits: u32,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            frame: Frame::Lab,
            record_stride: 1,
            norm_guard: DEFAULT_NORM_GUARD,
            precision_bits: DEFAULT_PRECISION_BITS,
        }
    }
}

/// `H(t) = (n + 1/2) + F(t)(a† + a)` as a dense matrix.
pub fn hamiltonian_at(t: f64, drive: &DriveSpec, dim: usize) -> Result<OperatorMatrix> {
    if dim < 2 {
        return Err(Error::invalid("dim", "must be at least 2"));
    }
    let f = drive.value(t);
    let mut h = OperatorMatrix::zeros(dim);
    for n in 0..dim {
        h.matrix[[n, n]] = C64::new(n as f64 + 0.5, 0.0);
        if n + 1 < dim {
            let s = ((n + 1) as f64).sqrt();
            h.matrix[[n, n + 1]] = f * s;
            h.matrix[[n + 1, n]] = f * s;
        }
    }
    Ok(h)
}

struct Generator {
    sqrt_n: Vec<f64>,
    frame: Frame,
}

impl Generator {
    fn new(dim: usize, frame: Frame) -> Self {
        Self {
            sqrt_n: (0..=dim).map(|n| (n as f64).sqrt()).collect(),
            frame,
        }
    }

    /// `out = −i·M(t)·y` where `M` is `H` or the interaction-frame coupling.
    fn derivative(&self, t: f64, f: C64, y: &[C64], out: &mut [C64]) {
        let n = y.len();
        let (up, down) = match self.frame {
            Frame::Lab => (f, f),
            Frame::Interaction => (f * C64::from_polar(1.0, t), f * C64::from_polar(1.0, -t)),
        };
        let diag = self.frame == Frame::Lab;
        for k in 0..n {
            // (a†)_{k,k−1} = √k, (a)_{k,k+1} = √(k+1)
            let mut acc = if diag {
                y[k] * (k as f64 + 0.5)
            } else {
                C64::new(0.0, 0.0)
            };
            if k > 0 {
                acc += up * (y[k - 1] * self.sqrt_n[k]);
            }
            if k + 1 < n {
                acc += down * (y[k + 1] * self.sqrt_n[k + 1]);
            }
            out[k] = C64::new(acc.im, -acc.re);
        }
    }

    /// Bound on the row-sum norm of `M(t)`.
    fn norm_bound(&self, f: C64, dim: usize) -> f64 {
        let diag = if self.frame == Frame::Lab {
            dim as f64 - 0.5
        } else {
            0.0
        };
        diag + 2.0 * f.norm() * self.sqrt_n[dim]
    }
}

fn to_lab(phi: &[C64], t: f64, frame: Frame) -> FockVector {
    match frame {
        Frame::Lab => FockVector::from_raw(phi.to_vec()),
        Frame::Interaction => FockVector::from_raw(
            phi.iter()
                .enumerate()
                .map(|(n, c)| c * C64::from_polar(1.0, -(n as f64 + 0.5) * t))
                .collect(),
        ),
    }
}

fn from_lab(psi: &FockVector, t: f64, frame: Frame) -> Vec<C64> {
    match frame {
        Frame::Lab => psi.amplitudes().to_vec(),
        Frame::Interaction => psi
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(n, c)| c * C64::from_polar(1.0, (n as f64 + 0.5) * t))
            .collect(),
    }
}

struct Stepper {
    gen: Generator,
    method: Method,
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl Stepper {
    fn new(dim: usize, frame: Frame, method: Method) -> Self {
        let z = || vec![C64::new(0.0, 0.0); dim];
        Self {
            gen: Generator::new(dim, frame),
            method,
            k: [z(), z(), z(), z()],
            tmp: z(),
        }
    }

    fn step(&mut self, drive: &DriveSpec, t: f64, h: f64, y: &mut [C64]) {
        match self.method {
            Method::Rk4 => self.rk4(drive, t, h, y),
            Method::MidpointExponential => self.midpoint_exp(drive, t, h, y),
            Method::ExtendedTaylor => unreachable!("dispatched before stepping"),
        }
    }

    fn rk4(&mut self, drive: &DriveSpec, t: f64, h: f64, y: &mut [C64]) {
        let n = y.len();
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        let (f0, fm, f1) = (drive.value(t), drive.value(t + 0.5 * h), drive.value(t + h));
        self.gen.derivative(t, f0, y, k1);
        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        self.gen.derivative(t + 0.5 * h, fm, tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        self.gen.derivative(t + 0.5 * h, fm, tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + k3[i] * h;
        }
        self.gen.derivative(t + h, f1, tmp, k4);
        for i in 0..n {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }

    fn midpoint_exp(&mut self, drive: &DriveSpec, t: f64, h: f64, y: &mut [C64]) {
        let n = y.len();
        let tm = t + 0.5 * h;
        let f = drive.value(tm);
        let substeps = (self.gen.norm_bound(f, n) * h.abs() / 0.5).ceil().max(1.0) as usize;
        let hs = h / substeps as f64;
        let [term, next, acc, _] = &mut self.k;
        for _ in 0..substeps {
            term.copy_from_slice(y);
            acc.copy_from_slice(y);
            for order in 1..=60 {
                self.gen.derivative(tm, f, term, next);
                let c = hs / order as f64;
                let mut size = 0.0;
                for i in 0..n {
                    term[i] = next[i] * c;
                    acc[i] += term[i];
                    size += term[i].norm_sqr();
                }
                let total: f64 = acc.iter().map(|z| z.norm_sqr()).sum();
                if size <= 1e-34 * total {
                    break;
                }
            }
            y.copy_from_slice(acc);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub states: Vec<FockVector>,
}

/// Integrates over `grid`, handing each recorded lab-frame state to
/// `observer`, and returns the final state.
pub fn evolve_with<F>(
    psi0: &FockVector,
    drive: &DriveSpec,
    grid: &SimulationGrid,
    opts: &EvolveOptions,
    mut observer: F,
) -> Result<FockVector>
where
    F: FnMut(f64, &FockVector) -> Result<()>,
{
    if opts.method == Method::ExtendedTaylor {
        return evolve_extended(
            psi0,
            drive,
            grid,
            opts.precision_bits,
            opts.record_stride,
            opts.norm_guard,
            observer,
        );
    }
    if opts.record_stride == 0 {
        return Err(Error::invalid("record_stride", "must be at least 1"));
    }
    if psi0.norm_sqr() == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let dim = psi0.dim();
    let mut stepper = Stepper::new(dim, opts.frame, opts.method);
    let t0 = grid.time(0);
    let mut y = from_lab(psi0, t0, opts.frame);
    observer(t0, psi0)?;
    let steps = grid.steps();
    for k in 0..steps {
        let t = grid.time(k);
        let t_next = grid.time(k + 1);
        stepper.step(drive, t, t_next - t, &mut y);
        let norm_sqr: f64 = y.iter().map(|c| c.norm_sqr()).sum();
        if !(norm_sqr.sqrt() <= opts.norm_guard) {
            return Err(Error::NormOverflow {
                t: t_next,
                norm: norm_sqr.sqrt(),
            });
        }
        if (k + 1) % opts.record_stride == 0 || k + 1 == steps {
            observer(t_next, &to_lab(&y, t_next, opts.frame))?;
        }
    }
    Ok(to_lab(&y, grid.time(steps), opts.frame))
}

pub fn evolve(
    psi0: &FockVector,
    drive: &DriveSpec,
    grid: &SimulationGrid,
    opts: &EvolveOptions,
) -> Result<Evolution> {
    let mut out = Evolution {
        times: Vec::new(),
        states: Vec::new(),
    };
    evolve_with(psi0, drive, grid, opts, |t, psi| {
        out.times.push(t);
        out.states.push(psi.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Observable time series with the Pegg–Barnett window `theta0` (`None`
/// selects the symmetric default).
pub fn observe(
    psi0: &FockVector,
    drive: &DriveSpec,
    grid: &SimulationGrid,
    opts: &EvolveOptions,
    theta0: Option<f64>,
) -> Result<Vec<ObservableRecord>> {
    let mut records = Vec::new();
    evolve_with(psi0, drive, grid, opts, |t, psi| {
        records.push(observables(psi, theta0)?.at(t));
        Ok(())
    })?;
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalvingCheck {
    pub coarse: ObservableRecord,
    pub fine: ObservableRecord,
    /// Largest change in `x`, `p`, `var_x`, `var_p` and `n` between the
    /// two runs.
    pub max_change: f64,
}

/// Repeats the run with half the step and compares the final observables.
pub fn halving_check(
    psi0: &FockVector,
    drive: &DriveSpec,
    grid: &SimulationGrid,
    opts: &EvolveOptions,
) -> Result<HalvingCheck> {
    let fine_grid = SimulationGrid::new(grid.t_start, grid.t_end, grid.dt / 2.0)?;
    let last = |g: &SimulationGrid| -> Result<ObservableRecord> {
        let psi = evolve_with(psi0, drive, g, opts, |_, _| Ok(()))?;
        Ok(observables(&psi, None)?.at(g.t_end))
    };
    let coarse = last(grid)?;
    let fine = last(&fine_grid)?;
    let max_change = [
        coarse.x_mean - fine.x_mean,
        coarse.p_mean - fine.p_mean,
        coarse.var_x - fine.var_x,
        coarse.var_p - fine.var_p,
        coarse.n_mean - fine.n_mean,
    ]
    .iter()
    .fold(0.0f64, |m, d| m.max(d.abs()));
    Ok(HalvingCheck {
        coarse,
        fine,
        max_change,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{PI, SQRT_2};

    use super::*;
    use crate::model::{DriveFamily, Sign};
    use crate::oracle::fock::coherent_state;

    fn grid(t_end: f64, dt: f64) -> SimulationGrid {
        SimulationGrid::new(0.0, t_end, dt).unwrap()
    }

    #[test]
    fn hamiltonian_examples() {
        let h = hamiltonian_at(1.3, &DriveSpec::zero(), 6).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i == j { i as f64 + 0.5 } else { 0.0 };
                assert_eq!(h.matrix[[i, j]], C64::new(expect, 0.0));
            }
        }

        let real = DriveSpec::real_cosine(1.7, 1.3).unwrap();
        for t in [0.0, 0.4, 2.2] {
            assert_eq!(hamiltonian_at(t, &real, 16).unwrap().hermiticity_defect(), 0.0);
        }

        // H − H† = 2i·Im F·(a† + a), so ‖H − H†‖_F = 2|Im F|·‖a† + a‖_F.
        let pt = DriveSpec::pt(1.0, 1.0).unwrap();
        let dim = 16;
        let h = hamiltonian_at(PI / 2.0, &pt, dim).unwrap();
        let x = OperatorMatrix::annihilation(dim).matrix + OperatorMatrix::creation(dim).matrix;
        let x_norm = OperatorMatrix { matrix: x }.frobenius_norm();
        assert!((h.hermiticity_defect() - 2.0 * x_norm).abs() < 1e-12);
        assert!(hamiltonian_at(0.3, &pt, dim).unwrap().hermiticity_defect() > 0.0);
    }

    #[test]
    fn free_rotation() {
        let psi0 = coherent_state(C64::new(1.0, 0.0), 32).unwrap();
        let g = grid(4.0 * PI, 1e-3);
        let opts = EvolveOptions {
            record_stride: 100,
            ..Default::default()
        };
        let rec = observe(&psi0, &DriveSpec::zero(), &g, &opts, None).unwrap();
        for r in &rec {
            assert!((r.x_mean - SQRT_2 * r.t.cos()).abs() <= 1e-8);
        }
        assert_eq!(rec.last().unwrap().t, 4.0 * PI);
    }

    #[test]
    fn frames_and_methods_agree() {
        let psi0 = coherent_state(C64::new(1.0, 0.5), 48).unwrap();
        let drive = DriveSpec::new(0.5, 2.0, Sign::Plus, DriveFamily::PtComplex).unwrap();
        let g = grid(3.0, 1e-3);
        let run = |method, frame| {
            let opts = EvolveOptions {
                method,
                frame,
                ..Default::default()
            };
            let psi = evolve_with(&psi0, &drive, &g, &opts, |_, _| Ok(())).unwrap();
            observables(&psi, None).unwrap()
        };
        let reference = run(Method::Rk4, Frame::Lab);
        for (m, f) in [
            (Method::Rk4, Frame::Interaction),
            (Method::MidpointExponential, Frame::Lab),
            (Method::MidpointExponential, Frame::Interaction),
        ] {
            let r = run(m, f);
            assert!((r.x_mean - reference.x_mean).abs() < 1e-6, "{m:?} {f:?}");
            assert!((r.p_mean - reference.p_mean).abs() < 1e-6, "{m:?} {f:?}");
        }
    }

    #[test]
    fn hermitian_drive_preserves_norm() {
        let psi0 = coherent_state(C64::new(1.0, 0.0), 48).unwrap();
        let drive = DriveSpec::real_cosine(1.0, 1.3).unwrap();
        let psi = evolve_with(&psi0, &drive, &grid(4.0 * PI, 1e-3), &EvolveOptions::default(), |_, _| Ok(()))
            .unwrap();
        assert!((psi.norm() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let psi0 = coherent_state(C64::new(1.0, 0.0), 32).unwrap();
        let drive = DriveSpec::real_cosine(0.7, 1.3).unwrap();
        let final_state = |dt: f64| {
            evolve_with(&psi0, &drive, &grid(2.0, dt), &EvolveOptions::default(), |_, _| Ok(())).unwrap()
        };
        let reference = final_state(0.1 / 8.0);
        let err = |dt: f64| {
            let psi = final_state(dt);
            psi.amplitudes()
                .iter()
                .zip(reference.amplitudes())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn norm_guard_aborts() {
        let psi0 = FockVector::vacuum(64).unwrap();
        let drive = DriveSpec::pt(3.0, -1.0).unwrap();
        let opts = EvolveOptions {
            norm_guard: 1e6,
            ..Default::default()
        };
        match evolve_with(&psi0, &drive, &grid(20.0, 1e-3), &opts, |_, _| Ok(())) {
            Err(Error::NormOverflow { t, norm }) => assert!(t > 0.0 && norm > 1e6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn halving_check_is_small_for_smooth_runs() {
        let psi0 = coherent_state(C64::new(1.0, 0.0), 32).unwrap();
        let drive = DriveSpec::pt(0.5, 2.0).unwrap();
        let coarse = halving_check(&psi0, &drive, &grid(1.0, 1e-2), &EvolveOptions::default()).unwrap();
        let fine = halving_check(&psi0, &drive, &grid(1.0, 5e-3), &EvolveOptions::default()).unwrap();
        assert!(coarse.max_change < 1e-5);
        let ratio = coarse.max_change / fine.max_change;
        assert!((10.0..=24.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn evolve_records_with_stride() {
        let psi0 = FockVector::vacuum(8).unwrap();
        let opts = EvolveOptions {
            record_stride: 3,
            ..Default::default()
        };
        let ev = evolve(&psi0, &DriveSpec::zero(), &grid(1.0, 0.1), &opts).unwrap();
        assert_eq!(ev.times.len(), 5);
        assert_eq!(*ev.times.last().unwrap(), 1.0);
        assert!(ev.times.windows(2).all(|w| w[1] > w[0]));
        assert!(matches!(
            evolve(&psi0, &DriveSpec::zero(), &grid(1.0, 0.1), &EvolveOptions { record_stride: 0, ..opts }),
            Err(Error::InvalidParameter { .. })
        ));
    }
}
