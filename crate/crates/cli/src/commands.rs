use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Result};
use rayon::prelude::*;
use serde::Serialize;

use foucault_core::figures::{figure_set, FigureSet, FIGURE_SETS};
use foucault_core::foucault::{
    self, from_hypotrochoid, to_hypotrochoid, trajectory_curve, DualityReport, HypotrochoidParams,
    DEFAULT_CURVE_SAMPLES,
};
use foucault_core::model::{DriveSpec, SimulationGrid};
use foucault_core::oracle::{
    coherent_state, linspace, observe, unnormalized_quadratures, wigner_grid, EvolveOptions, FockVector,
    Frame, Method, ObservableRecord, DEFAULT_PRECISION_BITS, DEFAULT_TAIL_CAP,
};
use foucault_core::rational::closure_period_f64;
use foucault_core::trajectory::{
    classify as classify_curve, circular_drive_strength, is_circular, phase_closed, quadratures_pt,
    secular_limit, CircularFit, CurveFamily, SecularPolicy, Trajectory, DEFAULT_CLASSIFY_TOL,
};
use foucault_core::wei_norman::{closed_pt_grid, coefficient_grid, wn_residual, DriveFunction};
use foucault_core::{DriveFamily, Error, C64};

use crate::config::{FrameArg, MethodArg, RunConfig, OUT_DIR_ENV};
use crate::config::Format;
use crate::output::{emit, json, num, opt_num, svg_polyline, write_atomic, Csv};
use crate::Verdict;

const DEFAULT_WN_TOL: f64 = 1e-10;
const DEFAULT_COMPARE_TOL: f64 = 1e-5;
const DEFAULT_DIM: usize = 64;
const DEFAULT_ORACLE_DT: f64 = 1e-3;

fn grid(cfg: &RunConfig, default_t_max: f64, default_dt: f64) -> Result<SimulationGrid> {
    let t_max = cfg.t_max.unwrap_or(default_t_max);
    let dt = cfg.dt.unwrap_or(default_dt);
    Ok(SimulationGrid::new(0.0, t_max, dt)?)
}

fn out(cfg: &RunConfig) -> Option<&Path> {
    cfg.out.as_deref()
}

fn secular_error(e: Error) -> anyhow::Error {
    match e {
        Error::SecularSingular { .. } => anyhow!("{e} (pass --secular-limit)"),
        other => other.into(),
    }
}

pub fn trajectory(cfg: &RunConfig, secular_limit_ok: bool) -> Result<Verdict> {
    let n0 = cfg.n0()?;
    let drive = cfg.drive()?;
    let w = drive.effective_omega()?;
    let period = closure_period_f64(w).period().unwrap_or(2.0 * PI);
    let t_max = cfg.t_max.unwrap_or(period);
    let grid = grid(cfg, t_max, t_max / 1000.0)?;
    let policy = if secular_limit_ok {
        SecularPolicy::UseLimit
    } else {
        SecularPolicy::Reject
    };
    let traj = Trajectory::closed_form(n0, &drive, &grid, policy).map_err(secular_error)?;
    let text = match cfg.format(Format::Csv) {
        Format::Json => json(&traj)?,
        Format::Csv => {
            let mut csv = Csv::new(&["t", "x_mean", "p_mean", "var_x", "var_p", "radius", "theta"]);
            for p in &traj.points {
                csv.row([
                    num(p.t),
                    num(p.x_mean),
                    num(p.p_mean),
                    num(p.var_x),
                    num(p.var_p),
                    num(p.radius),
                    opt_num(p.theta),
                ]);
            }
            csv.into_string()
        }
    };
    emit(out(cfg), &text)?;
    Ok(Verdict::Ok)
}

pub fn wn(cfg: &RunConfig, numeric: bool) -> Result<Verdict> {
    let drive = cfg.drive()?;
    let times = grid(cfg, 2.0 * PI, 1e-3)?.times();
    let tol = cfg.tol.unwrap_or(DEFAULT_WN_TOL);
    let func = DriveFunction::from(drive);
    let coeffs = if drive.family == DriveFamily::PtComplex && !numeric {
        closed_pt_grid(&drive, &times, tol)?
    } else {
        coefficient_grid(&func, &times, tol)?
    };
    let residual = wn_residual(&coeffs, &func);
    let text = match cfg.format(Format::Csv) {
        Format::Json => {
            #[derive(Serialize)]
            struct Report<'a, C, R> {
                coefficients: &'a C,
                residual: R,
            }
            json(&Report {
                coefficients: &coeffs,
                residual,
            })?
        }
        Format::Csv => {
            let mut csv = Csv::new(&["t", "f0_re", "f0_im", "f1_re", "f1_im", "f2_re", "f2_im", "f3_re", "f3_im"]);
            for c in &coeffs {
                let mut row = vec![num(c.t)];
                for z in [c.f0, c.f1, c.f2, c.f3] {
                    row.push(num(z.re));
                    row.push(num(z.im));
                }
                csv.row(row);
            }
            eprintln!(
                "residuals: f0 {:e}, f1 {:e}, f2 {:e}, f3 {:e} over {} points",
                residual.f0, residual.f1, residual.f2, residual.f3, residual.points
            );
            csv.into_string()
        }
    };
    emit(out(cfg), &text)?;
    Ok(Verdict::Ok)
}

pub fn circular(cfg: &RunConfig) -> Result<Verdict> {
    #[derive(Serialize)]
    struct Report {
        n0: f64,
        omega_eff: f64,
        circular_f0: f64,
        f0: f64,
        fit: CircularFit,
    }
    let n0 = cfg.n0()?;
    let w = RunConfig {
        f0: Some(cfg.f0.unwrap_or(0.0)),
        ..cfg.clone()
    }
    .omega_eff()?;
    let circular_f0 = circular_drive_strength(n0, w).map_err(secular_error)?;
    let f0 = cfg.f0.unwrap_or(circular_f0);
    let fit = is_circular(n0, f0, w, cfg.tol.unwrap_or(DEFAULT_CLASSIFY_TOL))?;
    emit(
        out(cfg),
        &json(&Report {
            n0,
            omega_eff: w,
            circular_f0,
            f0,
            fit,
        })?,
    )?;
    Ok(Verdict::Ok)
}

pub fn classify(cfg: &RunConfig) -> Result<Verdict> {
    #[derive(Serialize)]
    struct Report {
        n0: f64,
        f0: f64,
        omega_eff: f64,
        #[serde(flatten)]
        classification: CurveFamily,
        closure_period: Option<f64>,
    }
    let (n0, f0, w) = (cfg.n0()?, cfg.f0()?, cfg.omega_eff()?);
    let classification = classify_curve(n0, f0, w, cfg.tol.unwrap_or(DEFAULT_CLASSIFY_TOL))?;
    let closure_period = if classification == CurveFamily::SecularUnbounded {
        None
    } else {
        closure_period_f64(w).period()
    };
    emit(
        out(cfg),
        &json(&Report {
            n0,
            f0,
            omega_eff: w,
            classification,
            closure_period,
        })?,
    )?;
    Ok(Verdict::Ok)
}

pub fn map(cfg: &RunConfig) -> Result<Verdict> {
    #[derive(Serialize)]
    struct Report {
        params: foucault::OscillatorParams,
        hypotrochoid: HypotrochoidParams,
    }
    let (n0, f0, omega) = (cfg.n0()?, cfg.f0()?, cfg.omega_eff()?);
    let hypotrochoid = to_hypotrochoid(n0, f0, omega)?;
    emit(
        out(cfg),
        &json(&Report {
            params: foucault::OscillatorParams { n0, f0, omega },
            hypotrochoid,
        })?,
    )?;
    Ok(Verdict::Ok)
}

#[allow(non_snake_case)]
pub fn inverse_map(cfg: &RunConfig, R: f64, r: f64, d: f64) -> Result<Verdict> {
    let params = HypotrochoidParams::new(R, r, d)?;
    emit(out(cfg), &json(&from_hypotrochoid(&params))?)?;
    Ok(Verdict::Ok)
}

pub fn verify_duality(cfg: &RunConfig) -> Result<Verdict> {
    let report: DualityReport = foucault::verify_duality(cfg.n0()?, cfg.f0()?, cfg.omega_eff()?)?;
    emit(out(cfg), &json(&report)?)?;
    Ok(if report.pass {
        Verdict::Ok
    } else {
        Verdict::VerificationFailed
    })
}

fn evolve_options(cfg: &RunConfig) -> Result<EvolveOptions> {
    let stride = cfg.stride.unwrap_or(1);
    if stride == 0 {
        bail!("--stride must be at least 1");
    }
    Ok(EvolveOptions {
        method: match cfg.method.unwrap_or(MethodArg::Rk4) {
            MethodArg::Rk4 => Method::Rk4,
            MethodArg::Midpoint => Method::MidpointExponential,
            MethodArg::Extended => Method::ExtendedTaylor,
        },
        frame: match cfg.frame.unwrap_or(FrameArg::Lab) {
            FrameArg::Lab => Frame::Lab,
            FrameArg::Interaction => Frame::Interaction,
        },
        record_stride: stride,
        precision_bits: cfg.precision_bits.unwrap_or(DEFAULT_PRECISION_BITS),
        ..Default::default()
    })
}

fn initial_state(cfg: &RunConfig) -> Result<FockVector> {
    let dim = cfg.dim.unwrap_or(DEFAULT_DIM);
    let psi0 = coherent_state(C64::new(cfg.n0()?, 0.0), dim)?;
    if !psi0.truncation_safe(DEFAULT_TAIL_CAP) {
        eprintln!(
            "warning: initial tail mass {:e} exceeds {DEFAULT_TAIL_CAP:e}; increase --N",
            psi0.tail_mass()
        );
    }
    Ok(psi0)
}

fn warn_on_tail(records: &[ObservableRecord]) {
    let tail = records.iter().map(|r| r.tail_mass).fold(0.0, f64::max);
    if tail > DEFAULT_TAIL_CAP {
        eprintln!("warning: tail mass reached {tail:e}; the truncation is not safe, increase --N");
    }
}

fn oracle_records(cfg: &RunConfig, drive: &DriveSpec) -> Result<Vec<ObservableRecord>> {
    let psi0 = initial_state(cfg)?;
    let grid = grid(cfg, 2.0 * PI, DEFAULT_ORACLE_DT)?;
    let records = observe(&psi0, drive, &grid, &evolve_options(cfg)?, cfg.theta0)?;
    warn_on_tail(&records);
    Ok(records)
}

fn records_csv(records: &[ObservableRecord]) -> String {
    let mut csv = Csv::new(&[
        "t", "x_mean", "p_mean", "var_x", "var_p", "n_mean", "norm", "theta_pb", "tail_mass",
    ]);
    for r in records {
        csv.row(
            [r.t, r.x_mean, r.p_mean, r.var_x, r.var_p, r.n_mean, r.norm, r.theta_pb, r.tail_mass].map(num),
        );
    }
    csv.into_string()
}

pub fn oracle(cfg: &RunConfig) -> Result<Verdict> {
    let records = oracle_records(cfg, &cfg.drive()?)?;
    let text = match cfg.format(Format::Csv) {
        Format::Csv => records_csv(&records),
        Format::Json => json(&records)?,
    };
    emit(out(cfg), &text)?;
    Ok(Verdict::Ok)
}

pub fn compare(cfg: &RunConfig, unnormalized: bool) -> Result<Verdict> {
    #[derive(Serialize)]
    #[allow(non_snake_case)]
    struct Report {
        n0: f64,
        f0: f64,
        omega_eff: f64,
        N: usize,
        dt: f64,
        t_max: f64,
        method: MethodArg,
        max_dx: f64,
        max_dp: f64,
        max_variance_deviation: f64,
        max_tail_mass: f64,
        tol: f64,
        pass: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        unnormalized_max_dx: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        unnormalized_max_dp: Option<f64>,
    }
    let drive = cfg.drive()?;
    let (n0, w) = (cfg.n0()?, drive.effective_omega()?);
    let closed = |t: f64| -> Result<(f64, f64)> {
        if (w + 1.0).abs() <= foucault_core::model::SECULAR_THRESHOLD {
            Ok(secular_limit(n0, drive.f0, t))
        } else {
            Ok(quadratures_pt(n0, drive.f0, w, t)?)
        }
    };
    let psi0 = initial_state(cfg)?;
    let grid = grid(cfg, 2.0 * PI, DEFAULT_ORACLE_DT)?;
    let opts = evolve_options(cfg)?;
    let (mut dx, mut dp, mut dvar, mut tail) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut udx, mut udp) = (0.0f64, 0.0f64);
    let mut failure: Option<anyhow::Error> = None;
    foucault_core::oracle::evolve_with(&psi0, &drive, &grid, &opts, |t, psi| {
        let r = foucault_core::oracle::observables(psi, cfg.theta0)?;
        match closed(t) {
            Ok((x, p)) => {
                dx = dx.max((r.x_mean - x).abs());
                dp = dp.max((r.p_mean - p).abs());
                if unnormalized {
                    let (xu, pu) = unnormalized_quadratures(psi);
                    udx = udx.max((xu - x).abs());
                    udp = udp.max((pu - p).abs());
                }
            }
            Err(e) => failure = Some(e),
        }
        dvar = dvar.max((r.var_x - 0.5).abs()).max((r.var_p - 0.5).abs());
        tail = tail.max(r.tail_mass);
        Ok(())
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if tail > DEFAULT_TAIL_CAP {
        eprintln!("warning: tail mass reached {tail:e}; the truncation is not safe, increase --N");
    }
    let tol = cfg.tol.unwrap_or(DEFAULT_COMPARE_TOL);
    let pass = dx <= tol && dp <= tol;
    let report = Report {
        n0,
        f0: drive.f0,
        omega_eff: w,
        N: psi0.dim(),
        dt: grid.dt,
        t_max: grid.t_end,
        method: cfg.method.unwrap_or(MethodArg::Rk4),
        max_dx: dx,
        max_dp: dp,
        max_variance_deviation: dvar,
        max_tail_mass: tail,
        tol,
        pass,
        unnormalized_max_dx: unnormalized.then_some(udx),
        unnormalized_max_dp: unnormalized.then_some(udp),
    };
    emit(out(cfg), &json(&report)?)?;
    Ok(if pass {
        Verdict::Ok
    } else {
        Verdict::VerificationFailed
    })
}

pub fn phase(cfg: &RunConfig, with_oracle: bool) -> Result<Verdict> {
    let f0 = cfg.f0()?;
    let g = grid(cfg, 4.0 * PI, 1e-2)?;
    let times = g.times();
    let oracle = if with_oracle {
        let vacuum_cfg = RunConfig {
            n0: Some(0.0),
            ..cfg.clone()
        };
        let records = oracle_records(&vacuum_cfg, &DriveSpec::pt(f0, 1.0)?)?;
        Some(records)
    } else {
        None
    };
    let text = match (cfg.format(Format::Csv), &oracle) {
        (Format::Csv, None) => {
            let mut csv = Csv::new(&["t", "theta_closed"]);
            for &t in &times {
                csv.row([num(t), num(phase_closed(f0, t))]);
            }
            csv.into_string()
        }
        (Format::Csv, Some(records)) => {
            let mut csv = Csv::new(&["t", "theta_closed", "theta_pb", "discrepancy"]);
            for r in records {
                let closed = phase_closed(f0, r.t);
                csv.row([num(r.t), num(closed), num(r.theta_pb), num(r.theta_pb - closed)]);
            }
            csv.into_string()
        }
        (Format::Json, _) => {
            #[derive(Serialize)]
            struct Point {
                t: f64,
                theta_closed: f64,
                #[serde(skip_serializing_if = "Option::is_none")]
                theta_pb: Option<f64>,
            }
            let points: Vec<Point> = match &oracle {
                None => times
                    .iter()
                    .map(|&t| Point {
                        t,
                        theta_closed: phase_closed(f0, t),
                        theta_pb: None,
                    })
                    .collect(),
                Some(records) => records
                    .iter()
                    .map(|r| Point {
                        t: r.t,
                        theta_closed: phase_closed(f0, r.t),
                        theta_pb: Some(r.theta_pb),
                    })
                    .collect(),
            };
            json(&points)?
        }
    };
    emit(out(cfg), &text)?;
    Ok(Verdict::Ok)
}

pub struct WignerAxes {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
    pub points: usize,
}

pub fn wigner(cfg: &RunConfig, axes: WignerAxes) -> Result<Verdict> {
    let psi0 = initial_state(cfg)?;
    let t = cfg.t_max.unwrap_or(0.0);
    let psi = if t > 0.0 {
        let grid = SimulationGrid::new(0.0, t, cfg.dt.unwrap_or(DEFAULT_ORACLE_DT))?;
        let opts = EvolveOptions {
            record_stride: u64::MAX,
            ..evolve_options(cfg)?
        };
        foucault_core::oracle::evolve_with(&psi0, &cfg.drive()?, &grid, &opts, |_, _| Ok(()))?
    } else {
        psi0
    };
    if !psi.truncation_safe(DEFAULT_TAIL_CAP) {
        eprintln!("warning: tail mass {:e}; the truncation is not safe, increase --N", psi.tail_mass());
    }
    let moments = foucault_core::oracle::observables(&psi, None)?;
    let half = 5.0;
    let xs = linspace(
        axes.x_min.unwrap_or(moments.x_mean - half),
        axes.x_max.unwrap_or(moments.x_mean + half),
        axes.points,
    );
    let ps = linspace(
        axes.p_min.unwrap_or(moments.p_mean - half),
        axes.p_max.unwrap_or(moments.p_mean + half),
        axes.points,
    );
    let g = wigner_grid(&psi, &xs, &ps)?;
    if g.support_clipped {
        eprintln!("warning: the grid clips the Wigner function (edge fraction {:e})", g.edge_fraction);
    }
    let text = match cfg.format(Format::Csv) {
        Format::Json => json(&g)?,
        Format::Csv => {
            let mut header = vec!["x\\p".to_string()];
            header.extend(ps.iter().map(|&p| num(p)));
            let mut text = header.join(",") + "\n";
            for (i, &x) in xs.iter().enumerate() {
                let mut row = vec![num(x)];
                row.extend(g.values.row(i).iter().map(|&w| num(w)));
                text += &(row.join(",") + "\n");
            }
            text
        }
    };
    emit(out(cfg), &text)?;
    Ok(Verdict::Ok)
}

#[derive(Serialize)]
struct FigureReport {
    id: &'static str,
    description: &'static str,
    n0: f64,
    f0: f64,
    omega: f64,
    #[serde(flatten)]
    classification: CurveFamily,
    hypotrochoid: HypotrochoidParams,
    closure_period: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    duality: Option<DualityReport>,
}

fn figure(set: &FigureSet, dir: &Path, verify: bool) -> Result<bool> {
    let classification = classify_curve(set.n0, set.f0, set.omega, DEFAULT_CLASSIFY_TOL)?;
    let curve = trajectory_curve(set.n0, set.f0, set.omega, DEFAULT_CURVE_SAMPLES)?;
    let mut points = curve.points.clone();
    if curve.closed {
        points.push(points[0]);
    }
    let duality = if verify {
        Some(foucault::verify_duality(set.n0, set.f0, set.omega)?)
    } else {
        None
    };
    let pass = duality.as_ref().map_or(true, |d| d.pass);
    let report = FigureReport {
        id: set.id,
        description: set.description,
        n0: set.n0,
        f0: set.f0,
        omega: set.omega,
        classification,
        hypotrochoid: to_hypotrochoid(set.n0, set.f0, set.omega)?,
        closure_period: closure_period_f64(set.omega).period(),
        duality,
    };
    let title = format!("{}: n0 = {}, F0 = {}, omega = {}", set.id, set.n0, set.f0, set.omega);
    write_atomic(&dir.join(format!("{}.svg", set.id)), &svg_polyline(&points, &title))?;
    write_atomic(&dir.join(format!("{}.json", set.id)), &json(&report)?)?;
    Ok(pass)
}

pub fn figures(cfg: &RunConfig, ids: &[String], verify: bool) -> Result<Verdict> {
    let dir = match std::env::var_os(OUT_DIR_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => cfg.out.clone().unwrap_or_else(|| PathBuf::from("figures")),
    };
    let sets: Vec<FigureSet> = if ids.is_empty() {
        FIGURE_SETS.to_vec()
    } else {
        ids.iter()
            .map(|id| {
                figure_set(id).ok_or_else(|| {
                    let known: Vec<&str> = FIGURE_SETS.iter().map(|s| s.id).collect();
                    anyhow!("unknown figure set `{id}` (known: {})", known.join(", "))
                })
            })
            .collect::<Result<_>>()?
    };
    let results: Vec<Result<bool>> = sets.par_iter().map(|s| figure(s, &dir, verify)).collect();
    let mut all_pass = true;
    for (set, result) in sets.iter().zip(results) {
        let pass = result?;
        all_pass &= pass;
        eprintln!("{}: written{}", set.id, if pass { "" } else { " (duality FAIL)" });
    }
    Ok(if all_pass {
        Verdict::Ok
    } else {
        Verdict::VerificationFailed
    })
}
