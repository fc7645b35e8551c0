//! Exact dynamics of a quantum harmonic oscillator under PT-symmetric driving.
//!
//! Natural units are used throughout: ħ = m = ω₀ = 1, times are measured in
//! units of 1/ω₀ and every frequency is the ratio ω/ω₀. The quadratures are
//! `x = (a + a†)/√2` and `p = (a − a†)/(i√2)`, so a coherent state has
//! `var_x = var_p = 1/2`.
//!
//! The crate is split into closed-form modules ([`wei_norman`],
//! [`trajectory`], [`foucault`]) and an independent brute-force
//! [`oracle`] that integrates the Schrödinger equation in a truncated Fock
//! space. The two sides share only [`model`].

pub mod error;
pub mod figures;
pub mod foucault;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod rational;
pub mod trajectory;
pub mod wei_norman;

pub use error::{Error, Result};
pub use model::{CoherentAmplitude, DriveFamily, DriveSpec, SimulationGrid};

pub use num_complex::Complex64 as C64;
