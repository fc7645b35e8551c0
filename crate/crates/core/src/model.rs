//! Parameter types shared by the closed-form modules and the oracle.
//!
//! Units are natural (ħ = m = ω₀ = 1). The drive amplitude `f0` is the
//! already-rescaled coupling that multiplies `(a + a†)` in the Hamiltonian.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Distance from ω_eff = −1 inside which the closed-form quadratures are
/// replaced by their secular limit.
pub const SECULAR_THRESHOLD: f64 = 1e-9;

/// Distance from ω_eff = 1 inside which Wei–Norman integrals use the
/// resonant (removable) limit.
pub const RESONANT_THRESHOLD: f64 = 1e-9;

pub const DEFAULT_GRID_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DriveFamily {
    /// `F(t) = F0·exp(±iωt)`.
    PtComplex,
    /// `F(t) = F0·cos(ωt)`.
    RealCosine,
}

/// Selects `e^{+iωt}` or `e^{−iωt}` in the PT drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_int(s: i32) -> Result<Self> {
        match s {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(Error::invalid("sign", format!("must be +1 or -1, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub f0: f64,
    pub omega: f64,
    pub sign: Sign,
    pub family: DriveFamily,
}

impl DriveSpec {
    pub fn new(f0: f64, omega: f64, sign: Sign, family: DriveFamily) -> Result<Self> {
        if !f0.is_finite() {
            return Err(Error::invalid("f0", "must be finite"));
        }
        if !omega.is_finite() {
            return Err(Error::invalid("omega", "must be finite"));
        }
        Ok(Self {
            f0,
            omega,
            sign,
            family,
        })
    }

    /// PT drive with `sign = +1`, so that `omega` is directly ω_eff.
    pub fn pt(f0: f64, omega_eff: f64) -> Result<Self> {
        Self::new(f0, omega_eff, Sign::Plus, DriveFamily::PtComplex)
    }

    pub fn real_cosine(f0: f64, omega: f64) -> Result<Self> {
        Self::new(f0, omega, Sign::Plus, DriveFamily::RealCosine)
    }

    pub fn zero() -> Self {
        Self {
            f0: 0.0,
            omega: 0.0,
            sign: Sign::Plus,
            family: DriveFamily::PtComplex,
        }
    }

    /// ω_eff = sign·ω. The single closed-form trajectory formula is written
    /// in terms of this value for both signs.
    pub fn effective_omega(&self) -> Result<f64> {
        match self.family {
            DriveFamily::PtComplex => Ok(self.sign.value() * self.omega),
            DriveFamily::RealCosine => Err(Error::NotPtDrive),
        }
    }

    pub fn value(&self, t: f64) -> C64 {
        let phase = self.omega * t;
        match self.family {
            DriveFamily::PtComplex => {
                C64::new(self.f0 * phase.cos(), self.sign.value() * self.f0 * phase.sin())
            }
            DriveFamily::RealCosine => C64::new(self.f0 * phase.cos(), 0.0),
        }
    }
}

/// Free-function form of [`DriveSpec::effective_omega`].
pub fn effective_omega(drive: &DriveSpec) -> Result<f64> {
    drive.effective_omega()
}

/// Free-function form of [`DriveSpec::value`].
pub fn drive_value(drive: &DriveSpec, t: f64) -> C64 {
    drive.value(t)
}

/// Amplitude of the initial coherent state. All cases of interest are real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentAmplitude {
    pub n0: f64,
}

impl CoherentAmplitude {
    pub fn new(n0: f64) -> Result<Self> {
        if !n0.is_finite() {
            return Err(Error::invalid("n0", "must be finite"));
        }
        Ok(Self { n0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
}

impl SimulationGrid {
    pub fn new(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(Error::invalid("t", "grid bounds must be finite"));
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        if t_end <= t_start {
            return Err(Error::invalid(
                "t_end",
                format!("must exceed t_start ({t_end} <= {t_start})"),
            ));
        }
        Ok(Self { t_start, t_end, dt })
    }

    /// Number of steps. The step is shrunk slightly so that the last step
    /// lands exactly on `t_end`.
    pub fn steps(&self) -> u64 {
        let raw = (self.t_end - self.t_start) / self.dt;
        (raw - 1e-9).ceil().max(1.0) as u64
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps() as f64
    }

    pub fn sample_count(&self) -> u64 {
        self.steps() + 1
    }

    pub fn time(&self, k: u64) -> f64 {
        if k == self.steps() {
            self.t_end
        } else {
            self.t_start + k as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.sample_count()).map(|k| self.time(k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagnosticCode {
    SecularSingular,
    GridCapExceeded,
    RealDriveNoClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub fn contains(&self, code: DiagnosticCode) -> bool {
        self.diagnostics.iter().any(|d| d.code == code)
    }

    fn push(&mut self, code: DiagnosticCode, message: String) {
        self.diagnostics.push(Diagnostic { code, message });
    }
}

/// Checks a full parameter set. Hard violations (non-finite values, bad
/// grids) are errors; regime warnings come back as diagnostics and the
/// inputs are never modified.
pub fn validate(
    drive: &DriveSpec,
    amplitude: &CoherentAmplitude,
    grid: &SimulationGrid,
    grid_cap: u64,
) -> Result<ValidationReport> {
    DriveSpec::new(drive.f0, drive.omega, drive.sign, drive.family)?;
    CoherentAmplitude::new(amplitude.n0)?;
    SimulationGrid::new(grid.t_start, grid.t_end, grid.dt)?;

    let mut report = ValidationReport::default();
    match drive.effective_omega() {
        Ok(w) => {
            if (w + 1.0).abs() <= SECULAR_THRESHOLD {
                report.push(
                    DiagnosticCode::SecularSingular,
                    format!(
                        "omega_eff = {w} is on the counter-rotating resonance; \
                         closed-form quadratures need the secular-limit formula"
                    ),
                );
            }
        }
        Err(_) => report.push(
            DiagnosticCode::RealDriveNoClosedForm,
            "REAL_COSINE drive has no closed-form trajectory; use the oracle".into(),
        ),
    }
    let samples = (grid.t_end - grid.t_start) / grid.dt;
    if samples > grid_cap as f64 {
        report.push(
            DiagnosticCode::GridCapExceeded,
            format!("grid has {samples:.0} steps, cap is {grid_cap}"),
        );
    }
    Ok(report)
}
