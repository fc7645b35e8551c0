//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion fails.

use std::f64::consts::{PI, SQRT_2};
use std::panic::{self, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use foucault_core::figures::FIGURE_SETS;
use foucault_core::foucault::{verify_duality, DUALITY_TOL};
use foucault_core::model::{DriveSpec, SimulationGrid};
use foucault_core::oracle::{
    coherent_state, observe, unnormalized_quadratures, EvolveOptions, FockVector, Frame, Method,
    ObservableRecord,
};
use foucault_core::rational::closure_period_f64;
use foucault_core::trajectory::{
    classify, is_circular, phase_flip_times, phase_square_wave_deviation, quadratures_pt,
    resonant_quadratures, secular_limit, CurveFamily,
};
use foucault_core::wei_norman::{closed_pt_grid, f2_closed_pt, f2_numeric, wn_residual, DriveFunction};
use foucault_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances, pinned.
const A1_TOL: f64 = 1e-5;
const A2_RADIUS_TOL: f64 = 1e-9;
const A2_FREQUENCY_TOL: f64 = 1e-9;
const A2_MIN_VARIATION: f64 = 1.0;
const A3_ANALYTIC_TOL: f64 = 1e-9;
const A3_ORACLE_TOL: f64 = 1e-5;
const A3_MIN_GROWTH_RATIO: f64 = 100.0;
const A4_X_BOUND: f64 = 1e-6;
const A4_P_TOL: f64 = 1e-5;
const RESONANT_DIM: usize = 128;
const EXTENDED_PRECISION_BITS: u32 = 192;
const A5_RESIDUAL_TOL: f64 = DUALITY_TOL;
const A6_VARIANCE_TOL: f64 = 1e-6;
const A7_RESIDUAL_TOL: f64 = 1e-6;
const A7_SWEEP_TOL: f64 = 1e-10;
const A7_SWEEP_DRAWS: usize = 300;
const A8_DEVIATION_TOL: f64 = 0.011;
const A8_GUARD: f64 = 0.1;
const A8_FLIP_TOL: f64 = 1e-9;
const A9_CLOSURE_TOL: f64 = 1e-9;
const A10_LIMIT_TOL: f64 = 1e-4;
const A10_MIN_ENVELOPE_RATIO: f64 = 10.0;

/// Drive strength for the secular oracle run. The norm of the evolved
/// vacuum grows like `exp(F0²t²)`, so `F0 = 1` would overflow long before
/// `t = 20π`; the envelope ratio itself does not depend on `F0`.
const A10_ORACLE_F0: f64 = 0.25;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn grid(t_end: f64, dt: f64) -> SimulationGrid {
    SimulationGrid::new(0.0, t_end, dt).expect("valid grid")
}

fn max_by<T>(items: &[T], f: impl Fn(&T) -> f64) -> f64 {
    items.iter().map(f).fold(0.0, f64::max)
}

struct PtRun {
    records: Vec<ObservableRecord>,
    max_dx: f64,
    max_dp: f64,
    max_tail: f64,
}

/// Oracle run from the coherent state `|n0⟩` under the PT drive, compared
/// sample by sample with the closed form.
fn pt_run(n0: f64, f0: f64, omega: f64, dim: usize, t_end: f64, dt: f64, opts: EvolveOptions) -> PtRun {
    let psi0 = coherent_state(C64::new(n0, 0.0), dim).expect("state");
    let drive = DriveSpec::pt(f0, omega).expect("drive");
    let records = observe(&psi0, &drive, &grid(t_end, dt), &opts, None).expect("oracle run");
    let mut max_dx: f64 = 0.0;
    let mut max_dp: f64 = 0.0;
    for r in &records {
        let (x, p) = quadratures_pt(n0, f0, omega, r.t).expect("closed form");
        max_dx = max_dx.max((x - r.x_mean).abs());
        max_dp = max_dp.max((p - r.p_mean).abs());
    }
    let max_tail = max_by(&records, |r| r.tail_mass);
    PtRun {
        records,
        max_dx,
        max_dp,
        max_tail,
    }
}

fn a1_run() -> &'static PtRun {
    static RUN: OnceLock<PtRun> = OnceLock::new();
    RUN.get_or_init(|| pt_run(1.0, 0.5, 2.0, 64, 4.0 * PI, 1e-3, EvolveOptions::default()))
}

fn extended() -> EvolveOptions {
    EvolveOptions {
        method: Method::ExtendedTaylor,
        precision_bits: EXTENDED_PRECISION_BITS,
        ..Default::default()
    }
}

/// Resonant PT runs are ill-conditioned: f64 rounding is amplified by
/// roughly `exp(F0·t·|α|)`, which leaves the A3 means usable but spoils
/// its variances, and swamps the A4 signal entirely before `t = 3`. Both
/// use the extended-precision integrator. The grid hits `t = π/2` and
/// `3π/2` exactly, where `|⟨p⟩|` peaks.
fn a3_run() -> &'static PtRun {
    static RUN: OnceLock<PtRun> = OnceLock::new();
    RUN.get_or_init(|| pt_run(2.0, 1.0, 1.0, RESONANT_DIM, 2.0 * PI, PI / 64.0, extended()))
}

fn a4_run() -> &'static PtRun {
    static RUN: OnceLock<PtRun> = OnceLock::new();
    RUN.get_or_init(|| pt_run(0.0, 3.0, 1.0, RESONANT_DIM, 2.0 * PI, PI / 64.0, extended()))
}

fn a1() -> Outcome {
    let run = a1_run();
    // Diagnostic: the unnormalized convention, on the same grid.
    let psi0 = coherent_state(C64::new(1.0, 0.0), 64).expect("state");
    let drive = DriveSpec::pt(0.5, 2.0).expect("drive");
    let mut max_unnormalized: f64 = 0.0;
    foucault_core::oracle::evolve_with(&psi0, &drive, &grid(4.0 * PI, 1e-3), &EvolveOptions::default(), |t, psi| {
        let (x, _) = unnormalized_quadratures(psi);
        let (xc, _) = quadratures_pt(1.0, 0.5, 2.0, t).expect("closed form");
        max_unnormalized = max_unnormalized.max((x - xc).abs());
        Ok(())
    })
    .expect("oracle run");
    outcome(
        run.max_dx <= A1_TOL && run.max_dp <= A1_TOL,
        format!(
            "max|dx| = {:.3e}, max|dp| = {:.3e} (tol {A1_TOL:.0e}); unnormalized max|dx| = {:.3e}; max tail mass {:.1e}",
            run.max_dx, run.max_dp, max_unnormalized, run.max_tail
        ),
    )
}

fn a2() -> Outcome {
    let fit = is_circular(10.0, 10.0, -2.0, A2_RADIUS_TOL).expect("fit");
    let radius_error = (fit.radius - 10.0 * SQRT_2).abs();
    let freq_error = (fit.frequency - 2.0).abs();
    let mut pass = fit.circular && fit.max_deviation <= A2_RADIUS_TOL && radius_error <= A2_RADIUS_TOL
        && freq_error <= A2_FREQUENCY_TOL;
    let mut detail = format!(
        "F0=10: radius dev {:.1e}, |radius - 10√2| = {:.1e}, frequency {:.12}",
        fit.max_deviation, radius_error, fit.frequency
    );
    for f0 in [8.0, 12.0] {
        let period = closure_period_f64(-2.0).period().expect("closure");
        let radii: Vec<f64> = (0..=4000)
            .map(|k| {
                let (x, p) = quadratures_pt(10.0, f0, -2.0, period * k as f64 / 4000.0).expect("closed form");
                x.hypot(p)
            })
            .collect();
        let variation = radii.iter().cloned().fold(f64::MIN, f64::max) - radii.iter().cloned().fold(f64::MAX, f64::min);
        pass &= variation >= A2_MIN_VARIATION;
        detail += &format!("; F0={f0}: radius variation {variation:.3}");
    }
    outcome(pass, detail)
}

fn a3() -> Outcome {
    let mut pass = true;
    let semi = match classify(2.0, 1.0, 1.0, 1e-9).expect("classify") {
        CurveFamily::Ellipse { semi_axis_x, semi_axis_p } => (semi_axis_x, semi_axis_p),
        other => {
            pass = false;
            (f64::NAN, other.name().len() as f64)
        }
    };
    let samples: Vec<(f64, f64)> = (0..=4000)
        .map(|k| resonant_quadratures(2.0, 1.0, 2.0 * PI * k as f64 / 4000.0))
        .collect();
    let max_x = max_by(&samples, |s| s.0.abs());
    let max_p = max_by(&samples, |s| s.1.abs());
    let (x0, p0) = resonant_quadratures(2.0, 1.0, 0.0);
    let (x1, p1) = resonant_quadratures(2.0, 1.0, 2.0 * PI);
    let closes = (x1 - x0).hypot(p1 - p0) <= A3_ANALYTIC_TOL;
    let analytic_err = [semi.0 - 2.0 * SQRT_2, semi.1 - 3.0 * SQRT_2, max_x - 2.0 * SQRT_2, max_p - 3.0 * SQRT_2]
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()));
    pass &= closes && analytic_err <= A3_ANALYTIC_TOL;

    let run = a3_run();
    let oracle_x = max_by(&run.records, |r| r.x_mean.abs());
    let oracle_p = max_by(&run.records, |r| r.p_mean.abs());
    let oracle_err = (oracle_x - 2.0 * SQRT_2).abs().max((oracle_p - 3.0 * SQRT_2).abs());
    let pointwise = run.max_dx.max(run.max_dp);
    pass &= oracle_err <= A3_ORACLE_TOL && run.max_dx <= A3_ORACLE_TOL && run.max_dp <= A3_ORACLE_TOL;

    // Real resonant drive from the vacuum: |α| grows like t/2, so ⟨n⟩ at
    // 40π is about 3950 and the space must hold ~4500 levels.
    let dim = 4608;
    let steps_per_period = 1256;
    let psi0 = FockVector::vacuum(dim).expect("vacuum");
    let drive = DriveSpec::real_cosine(1.0, 1.0).expect("drive");
    let opts = EvolveOptions {
        method: Method::Rk4,
        frame: Frame::Interaction,
        record_stride: steps_per_period,
        ..Default::default()
    };
    let dt = 2.0 * PI / steps_per_period as f64;
    let records = observe(&psi0, &drive, &grid(40.0 * PI, dt), &opts, None).expect("real drive run");
    let n_at = |t: f64| {
        records
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .map(|r| (r.t, r.n_mean))
            .expect("records")
    };
    let (t2, n2) = n_at(2.0 * PI);
    let (t40, n40) = n_at(40.0 * PI);
    let ratio = n40 / (n2 + 1.0);
    let norm_drift = max_by(&records, |r| (r.norm - 1.0).abs());
    let tail = max_by(&records, |r| r.tail_mass);
    pass &= ratio > A3_MIN_GROWTH_RATIO && (t2 - 2.0 * PI).abs() < 1e-9 && (t40 - 40.0 * PI).abs() < 1e-9;
    outcome(
        pass,
        format!(
            "analytic err {analytic_err:.1e}, closes {closes}; oracle semi-axes ({oracle_x:.9}, {oracle_p:.9}) err {oracle_err:.1e}, pointwise {pointwise:.1e}; \
             real drive <n>(40π)/(<n>(2π)+1) = {ratio:.1} (N={dim}, norm drift {norm_drift:.1e}, max tail {tail:.1e})"
        ),
    )
}

fn a4() -> Outcome {
    let run = a4_run();
    let max_x = max_by(&run.records, |r| r.x_mean.abs());
    let max_p = max_by(&run.records, |r| r.p_mean.abs());
    let p_err = (max_p - 3.0 * SQRT_2).abs();
    // Diagnostic only: the same scenario in f64.
    let f64_run = pt_run(0.0, 3.0, 1.0, 64, 2.0 * PI, 1e-3, EvolveOptions::default());
    let f64_x = max_by(&f64_run.records, |r| r.x_mean.abs());
    outcome(
        max_x <= A4_X_BOUND && p_err <= A4_P_TOL,
        format!(
            "max|<x>| = {max_x:.2e}, |max|<p>| - 3√2| = {p_err:.2e}, pointwise |dp| = {:.2e} \
             (N = {RESONANT_DIM}, {EXTENDED_PRECISION_BITS}-bit Taylor; f64 RK4 gives max|<x>| = {f64_x:.2})",
            run.max_dp
        ),
    )
}

fn a5() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for set in FIGURE_SETS {
        match verify_duality(set.n0, set.f0, set.omega) {
            Ok(r) => {
                let ok = r.pass && r.fit.residual <= A5_RESIDUAL_TOL;
                pass &= ok;
                parts.push(format!(
                    "{} {} res {:.1e} scale {:.9} vs {:.9}",
                    set.id,
                    if ok { "ok" } else { "FAIL" },
                    r.fit.residual,
                    r.fit.scale,
                    r.expected_scale
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{} error {e}", set.id));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

fn a6() -> Outcome {
    let runs = [("A1", a1_run()), ("A3", a3_run()), ("A4", a4_run())];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, run) in runs {
        let drift = max_by(&run.records, |r| (r.var_x - 0.5).abs().max((r.var_p - 0.5).abs()));
        pass &= drift <= A6_VARIANCE_TOL;
        parts.push(format!("{name} {drift:.1e}"));
    }
    outcome(pass, format!("max |var - 1/2|: {}", parts.join(", ")))
}

fn a7() -> Outcome {
    let drive = DriveSpec::pt(1.0, 2.0).expect("drive");
    let times: Vec<f64> = (0..=((2.0 * PI) / 1e-4).round() as usize).map(|k| k as f64 * 1e-4).collect();
    let coeffs = closed_pt_grid(&drive, &times, 1e-10).expect("coefficients");
    let residuals = wn_residual(&coeffs, &DriveFunction::from(drive));
    let mut pass = residuals.max() <= A7_RESIDUAL_TOL;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    let mut draws = 0;
    while draws < A7_SWEEP_DRAWS {
        let f0 = rng.random_range(-10.0..10.0);
        let omega = rng.random_range(-5.0..5.0);
        if (omega - 1.0f64).abs() < 1e-3 {
            continue;
        }
        let t = rng.random_range(0.0..4.0 * PI);
        let spec = DriveSpec::pt(f0, omega).expect("drive");
        let closed = f2_closed_pt(&spec, t).expect("closed form");
        let numeric = f2_numeric(&DriveFunction::from(spec), t, 1e-12).expect("quadrature");
        worst = worst.max((closed - numeric).norm());
        draws += 1;
    }
    pass &= worst <= A7_SWEEP_TOL;
    outcome(
        pass,
        format!(
            "residuals f0 {:.1e}, f1 {:.1e}, f2 {:.1e}, f3 {:.1e}; f2 sweep ({A7_SWEEP_DRAWS} draws) max diff {worst:.1e}",
            residuals.f0, residuals.f1, residuals.f2, residuals.f3
        ),
    )
}

fn a8() -> Outcome {
    let times: Vec<f64> = (0..=40_000).map(|k| 4.0 * PI * k as f64 / 40_000.0).collect();
    let deviation = phase_square_wave_deviation(1e3, &times, A8_GUARD).expect("guarded samples");
    let flips = phase_flip_times(1e3, 0.05, 6.0 * PI - 0.05, 6000);
    let flip_err = flips
        .iter()
        .enumerate()
        .map(|(k, t)| (t - (k + 1) as f64 * PI).abs())
        .fold(0.0, f64::max);
    outcome(
        deviation <= A8_DEVIATION_TOL && flips.len() == 5 && flip_err <= A8_FLIP_TOL,
        format!("deviation {deviation:.6} (tol {A8_DEVIATION_TOL}); {} flips, max |t - kπ| = {flip_err:.1e}", flips.len()),
    )
}

fn a9() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n0, f0, omega, expected) in [(0.0, -3.0, 2.0 / 3.0, 6.0 * PI), (1.3, -0.7, 2.0 / 3.0, 6.0 * PI), (5.0, 5.0, 2.0, 2.0 * PI)] {
        let period = closure_period_f64(omega).period().expect("rational");
        let (x0, p0) = quadratures_pt(n0, f0, omega, 0.0).expect("closed form");
        let (x1, p1) = quadratures_pt(n0, f0, omega, period).expect("closed form");
        let gap = (x1 - x0).hypot(p1 - p0);
        let ok = (period - expected).abs() <= 1e-12 && gap <= A9_CLOSURE_TOL;
        pass &= ok;
        parts.push(format!("omega {omega:.6}: T = {:.6}π, |z(T) - z(0)| = {gap:.1e}", period / PI));
    }
    outcome(pass, parts.join("; "))
}

fn a10() -> Outcome {
    let mut limit_err: f64 = 0.0;
    for (n0, f0) in [(0.0, 1.0), (1.0, 1.0), (2.0, -0.5)] {
        for eps in [1e-6, -1e-6] {
            for k in 0..=2000 {
                let t = 2.0 * PI * k as f64 / 2000.0;
                let (x, p) = quadratures_pt(n0, f0, -1.0 + eps, t).expect("closed form");
                let (xl, pl) = secular_limit(n0, f0, t);
                limit_err = limit_err.max((x - xl).abs()).max((p - pl).abs());
            }
        }
    }

    let dim = 512;
    let psi0 = FockVector::vacuum(dim).expect("vacuum");
    let drive = DriveSpec::pt(A10_ORACLE_F0, -1.0).expect("drive");
    let opts = EvolveOptions {
        frame: Frame::Interaction,
        record_stride: 10,
        ..Default::default()
    };
    let records = observe(&psi0, &drive, &grid(20.0 * PI, 1e-3), &opts, None).expect("secular run");
    let envelope = |t_max: f64| {
        records
            .iter()
            .filter(|r| r.t <= t_max + 1e-9)
            .map(|r| r.x_mean.abs())
            .fold(0.0, f64::max)
    };
    let ratio = envelope(20.0 * PI) / envelope(2.0 * PI);
    let track = max_by(&records, |r| {
        let (x, p) = secular_limit(0.0, A10_ORACLE_F0, r.t);
        (x - r.x_mean).abs().max((p - r.p_mean).abs())
    });
    let tail = max_by(&records, |r| r.tail_mass);
    let final_norm = records.last().map(|r| r.norm).unwrap_or(f64::NAN);
    outcome(
        limit_err <= A10_LIMIT_TOL && ratio >= A10_MIN_ENVELOPE_RATIO,
        format!(
            "closed form vs limit at ±1e-6: {limit_err:.1e}; oracle envelope ratio {ratio:.2} (F0 = {A10_ORACLE_F0}, N = {dim}, \
             max |oracle - limit| {track:.1e}, max tail {tail:.1e}, final norm {final_norm:.2e})"
        ),
    )
}

fn main() {
    let criteria: [(&str, &str, fn() -> Outcome); 10] = [
        ("A1", "closed form vs oracle", a1),
        ("A2", "circular orbits", a2),
        ("A3", "resonant stabilization", a3),
        ("A4", "frozen position, oscillating momentum", a4),
        ("A5", "hypotrochoid duality", a5),
        ("A6", "variance constancy", a6),
        ("A7", "Wei-Norman self-consistency", a7),
        ("A8", "phase square wave", a8),
        ("A9", "closure periods", a9),
        ("A10", "secular singularity", a10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (id, title, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed().as_secs_f64();
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{id:<4} {} {title} [{elapsed:.1}s]: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
