//! Run configuration: every flag has a twin in the JSON config file, and
//! flags given on the command line win over the file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use foucault_core::model::{DriveFamily, Sign};
use foucault_core::DriveSpec;

pub const OUT_DIR_ENV: &str = "FOUCAULT_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    /// F(t) = F0·exp(±iωt)
    Pt,
    /// F(t) = F0·cos(ωt)
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Rk4,
    Midpoint,
    /// Extended-precision Taylor series; for ill-conditioned resonant runs.
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FrameArg {
    Lab,
    Interaction,
}

/// All parameters a run can take. Every field is optional so that a
/// config file and the command line can each supply part of it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Subcommand name; informational in config files.
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<String>,

    /// Coherent amplitude of the initial state |n0⟩.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<f64>,

    /// Drive amplitude F0.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0: Option<f64>,

    /// Drive frequency ω (ω_eff = sign·ω for the PT drive).
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,

    /// Sign of the PT exponent, +1 or -1 [default: +1].
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<i32>,

    /// Drive family [default: pt].
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyArg>,

    /// Fock-space dimension for the oracle [default: 64].
    #[arg(long = "N")]
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,

    /// Time step.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,

    /// End of the time grid (the grid starts at 0).
    #[arg(long = "t-max")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,

    /// Tolerance used by the subcommand's check.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,

    /// Output file (directory for `figures`). Standard output when absent.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,

    /// Seed for randomized searches. Nothing currently draws from it.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Oracle integrator [default: rk4].
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodArg>,

    /// Oracle frame for rk4/midpoint [default: lab].
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameArg>,

    /// Mantissa bits for `--method extended` [default: 192].
    #[arg(long = "precision-bits")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,

    /// Record every k-th oracle step [default: 1].
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<u64>,

    /// Start of the Pegg–Barnett phase window [default: symmetric about 0].
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("malformed config {}", path.display()))
    }

    /// Fields set in `flags` replace those in `self`.
    pub fn overridden_by(self, flags: &RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => {
                RunConfig { $($f: flags.$f.clone().or(self.$f),)* }
            };
        }
        pick!(
            subcommand, n0, f0, omega, sign, family, dim, dt, t_max, tol, out, format, seed, method,
            frame, precision_bits, stride, theta0
        )
    }

    pub fn need<T: Copy>(value: Option<T>, flag: &str) -> Result<T> {
        match value {
            Some(v) => Ok(v),
            None => bail!("missing required parameter --{flag}"),
        }
    }

    pub fn n0(&self) -> Result<f64> {
        Self::need(self.n0, "n0")
    }

    pub fn f0(&self) -> Result<f64> {
        Self::need(self.f0, "f0")
    }

    pub fn omega(&self) -> Result<f64> {
        Self::need(self.omega, "omega")
    }

    pub fn sign(&self) -> Result<Sign> {
        Ok(Sign::from_int(self.sign.unwrap_or(1))?)
    }

    pub fn drive(&self) -> Result<DriveSpec> {
        let family = match self.family.unwrap_or(FamilyArg::Pt) {
            FamilyArg::Pt => DriveFamily::PtComplex,
            FamilyArg::Cosine => DriveFamily::RealCosine,
        };
        Ok(DriveSpec::new(self.f0()?, self.omega()?, self.sign()?, family)?)
    }

    /// `ω_eff` for PT drives.
    pub fn omega_eff(&self) -> Result<f64> {
        Ok(self.drive()?.effective_omega()?)
    }

    pub fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}
