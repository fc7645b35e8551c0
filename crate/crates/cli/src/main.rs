mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(
    name = "foucault",
    version,
    about = "Closed-form and brute-force dynamics of a PT-driven harmonic oscillator",
    after_help = "Exit codes: 0 success, 1 validation error, 2 verification failure.\n\
                  Numbers in CSV output carry 17 significant digits."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// JSON file with any of the flags below; flags given here win.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub run: RunConfig,
}

impl Common {
    fn resolve(&self, name: &str) -> anyhow::Result<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let mut merged = base.overridden_by(&self.run);
        merged.subcommand = Some(name.to_string());
        Ok(merged)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form quadrature trajectory of the PT-driven coherent state.
    #[command(after_help = "CSV columns: t, x_mean, p_mean, var_x, var_p, radius, theta\n\
                            (theta is filled only for the resonant vacuum mode).\n\
                            JSON: {n0, drive, omega_eff, points: [...], closure_period}.\n\
                            Default grid: one closure period (2π if none) in 1000 steps.")]
    Trajectory {
        #[command(flatten)]
        common: Common,
        /// At ω_eff = -1 use the secular-limit formula instead of failing.
        #[arg(long)]
        secular_limit: bool,
    },
    /// Wei–Norman coefficients f0..f3 on a time grid, with residual checks.
    #[command(after_help = "CSV columns: t, f0_re, f0_im, f1_re, f1_im, f2_re, f2_im, f3_re, f3_im.\n\
                            JSON: {coefficients: [{t, f0: [re, im], ...}], residual: {f0, f1, f2, f3, points}}.\n\
                            PT drives use the closed forms unless --numeric is given.\n\
                            Default grid: [0, 2π] with dt = 1e-3.")]
    Wn {
        #[command(flatten)]
        common: Common,
        /// Integrate every coefficient by adaptive quadrature.
        #[arg(long)]
        numeric: bool,
    },
    /// Drive strength that makes the orbit a circle, and a circularity fit.
    #[command(after_help = "JSON: {n0, omega_eff, circular_f0, f0, fit: {circular, max_deviation, radius, frequency, span}}.\n\
                            Without --f0 the fit is run at circular_f0.")]
    Circular {
        #[command(flatten)]
        common: Common,
    },
    /// Curve family of the closed-form trajectory.
    #[command(after_help = "JSON: {n0, f0, omega_eff, family, <family fields>, closure_period}.")]
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Hypotrochoid (R, r, d) dual to the oscillator parameters.
    #[command(after_help = "JSON: {params: {n0, f0, omega}, hypotrochoid: {R, r, d}}.")]
    Map {
        #[command(flatten)]
        common: Common,
    },
    /// Oscillator parameters dual to a hypotrochoid.
    #[command(after_help = "JSON: {solutions: [{n0, f0, omega}], unmappable: null | {reason, candidate_family}}.")]
    InverseMap {
        #[command(flatten)]
        common: Common,
        /// Fixed-circle radius.
        #[arg(long = "R", allow_negative_numbers = true)]
        big_r: f64,
        /// Rolling-circle radius.
        #[arg(long = "r", allow_negative_numbers = true)]
        small_r: f64,
        /// Pen distance from the rolling centre.
        #[arg(long, allow_negative_numbers = true)]
        d: f64,
    },
    /// Similarity fit of the trajectory against its dual hypotrochoid.
    #[command(after_help = "JSON: {params, hypotrochoid: {R, r, d}, fit: {scale, rotation, reflection, residual, translation},\n\
                            expected_scale, scale_relative_error, pass}. Exit code 2 when pass is false.")]
    VerifyDuality {
        #[command(flatten)]
        common: Common,
    },
    /// Brute-force Fock-space evolution of the coherent state |n0⟩.
    #[command(after_help = "CSV columns: t, x_mean, p_mean, var_x, var_p, n_mean, norm, theta_pb, tail_mass.\n\
                            All expectations are normalized by the state norm, which is reported as is.\n\
                            Defaults: N = 64, dt = 1e-3, t-max = 2π, rk4 in the lab frame.")]
    Oracle {
        #[command(flatten)]
        common: Common,
    },
    /// Closed form against the oracle; exit code 2 beyond tolerance.
    #[command(after_help = "JSON: {n0, f0, omega_eff, N, dt, t_max, method, max_dx, max_dp, max_variance_deviation,\n\
                            max_tail_mass, tol, pass[, unnormalized_max_dx, unnormalized_max_dp]}.\n\
                            Default tol = 1e-5.")]
    Compare {
        #[command(flatten)]
        common: Common,
        /// Also report the deviation of the unnormalized expectations.
        #[arg(long)]
        unnormalized: bool,
    },
    /// Closed-form phase of the resonant vacuum, optionally with the oracle's Pegg–Barnett phase.
    #[command(after_help = "CSV columns: t, theta_closed[, theta_pb, discrepancy].\n\
                            The oracle run starts from the vacuum under the PT drive at ω_eff = 1.\n\
                            Default grid: [0, 4π] with dt = 1e-2.")]
    Phase {
        #[command(flatten)]
        common: Common,
        /// Run the oracle and report its Pegg–Barnett phase next to the closed form.
        #[arg(long)]
        oracle: bool,
    },
    /// Wigner function of the oracle state at t = t-max (default 0).
    #[command(after_help = "CSV: first row `x\\p` then the p axis; each further row is x followed by W(x, p).\n\
                            JSON: {x, p, values, integral, edge_fraction, support_clipped}.")]
    Wigner {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        x_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        x_max: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        p_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        p_max: Option<f64>,
        /// Samples per axis.
        #[arg(long, default_value_t = 81)]
        points: usize,
    },
    /// Regenerates the figure parameter sets as SVG plus JSON reports.
    #[command(after_help = "Writes <id>.svg and <id>.json per set into --out (default ./figures);\n\
                            the FOUCAULT_OUT_DIR environment variable overrides the directory.\n\
                            JSON: {id, description, n0, f0, omega, family, <family fields>, hypotrochoid,\n\
                            closure_period[, duality]}.")]
    Figures {
        #[command(flatten)]
        common: Common,
        /// Figure set id (repeatable); all sets when omitted.
        #[arg(long = "set")]
        sets: Vec<String>,
        /// Also run the duality check per set (about a second each).
        #[arg(long)]
        verify: bool,
    },
}

/// Result of a successful invocation.
pub enum Verdict {
    Ok,
    VerificationFailed,
}

fn run(cli: Cli) -> anyhow::Result<Verdict> {
    use Command::*;
    match cli.command {
        Trajectory { common, secular_limit } => commands::trajectory(&common.resolve("trajectory")?, secular_limit),
        Wn { common, numeric } => commands::wn(&common.resolve("wn")?, numeric),
        Circular { common } => commands::circular(&common.resolve("circular")?),
        Classify { common } => commands::classify(&common.resolve("classify")?),
        Map { common } => commands::map(&common.resolve("map")?),
        InverseMap {
            common,
            big_r,
            small_r,
            d,
        } => commands::inverse_map(&common.resolve("inverse-map")?, big_r, small_r, d),
        VerifyDuality { common } => commands::verify_duality(&common.resolve("verify-duality")?),
        Oracle { common } => commands::oracle(&common.resolve("oracle")?),
        Compare { common, unnormalized } => commands::compare(&common.resolve("compare")?, unnormalized),
        Phase { common, oracle } => commands::phase(&common.resolve("phase")?, oracle),
        Wigner {
            common,
            x_min,
            x_max,
            p_min,
            p_max,
            points,
        } => commands::wigner(
            &common.resolve("wigner")?,
            commands::WignerAxes {
                x_min,
                x_max,
                p_min,
                p_max,
                points,
            },
        ),
        Figures { common, sets, verify } => commands::figures(&common.resolve("figures")?, &sets, verify),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::VerificationFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
