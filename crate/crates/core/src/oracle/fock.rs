use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::C64;

/// Default ceiling on `|c_{N−1}|²/‖ψ‖²` for a state to count as safely
/// truncated.
pub const DEFAULT_TAIL_CAP: f64 = 1e-10;

/// A state in the first `N` number states. The norm is data: nothing here
/// renormalizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FockVector {
    amplitudes: Vec<C64>,
}

impl FockVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::invalid("dim", "a Fock vector needs at least 2 levels"));
        }
        if amplitudes.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("amplitudes", "must be finite"));
        }
        Ok(Self { amplitudes })
    }

    pub fn number_state(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::invalid("n", format!("level {n} outside dimension {dim}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[n] = C64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::number_state(0, dim)
    }

    pub(crate) fn from_raw(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Fraction of the norm in the highest retained level.
    pub fn tail_mass(&self) -> f64 {
        let total = self.norm_sqr();
        if total > 0.0 {
            self.amplitudes[self.dim() - 1].norm_sqr() / total
        } else {
            0.0
        }
    }

    pub fn truncation_safe(&self, cap: f64) -> bool {
        self.tail_mass() <= cap
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(Self::from_raw(self.amplitudes.iter().map(|c| c / n).collect()))
    }

    pub fn inner(&self, other: &FockVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Copy into a space of dimension `dim`, padding with zeros or dropping
    /// the highest levels.
    pub fn resized(&self, dim: usize) -> Result<Self> {
        let mut amps = self.amplitudes.clone();
        amps.resize(dim, C64::new(0.0, 0.0));
        Self::new(amps)
    }
}

/// `c_n = e^{−|α|²/2} αⁿ/√(n!)`. Magnitudes are accumulated as logarithms
/// so that large `|α|` does not underflow the leading factor.
pub fn coherent_state(alpha: C64, dim: usize) -> Result<FockVector> {
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::invalid("alpha", "must be finite"));
    }
    if dim < 2 {
        return Err(Error::invalid("dim", "must be at least 2"));
    }
    let mut amps = Vec::with_capacity(dim);
    amps.push(C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0));
    if alpha.norm() == 0.0 {
        amps.resize(dim, C64::new(0.0, 0.0));
        return FockVector::new(amps);
    }
    let (ln_abs, phase) = (alpha.norm().ln(), alpha.arg());
    let mut ln_mag = -alpha.norm_sqr() / 2.0;
    for n in 1..dim {
        ln_mag += ln_abs - 0.5 * (n as f64).ln();
        amps.push(C64::from_polar(ln_mag.exp(), phase * n as f64));
    }
    FockVector::new(amps)
}

/// Smallest dimension the usual guideline `|α|² + 8|α| + 16` recommends.
pub fn recommended_dim(alpha_abs: f64) -> usize {
    (alpha_abs * alpha_abs + 8.0 * alpha_abs + 16.0).ceil() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub matrix: Array2<C64>,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: Array2::from_elem((dim, dim), C64::new(0.0, 0.0)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for n in 0..dim {
            m.matrix[[n, n]] = C64::new(1.0, 0.0);
        }
        m
    }

    /// `a|n⟩ = √n |n−1⟩`.
    pub fn annihilation(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for n in 1..dim {
            m.matrix[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
        }
        m
    }

    pub fn creation(dim: usize) -> Self {
        Self::annihilation(dim).dagger()
    }

    pub fn number(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for n in 0..dim {
            m.matrix[[n, n]] = C64::new(n as f64, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dagger(&self) -> Self {
        Self {
            matrix: self.matrix.t().mapv(|c| c.conj()),
        }
    }

    pub fn matmul(&self, other: &OperatorMatrix) -> Self {
        Self {
            matrix: self.matrix.dot(&other.matrix),
        }
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Self {
        Self {
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn apply(&self, psi: &FockVector) -> Result<FockVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: psi.dim(),
            });
        }
        let v = ndarray::Array1::from(psi.amplitudes().to_vec());
        Ok(FockVector::from_raw(self.matrix.dot(&v).to_vec()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖A − A†‖_F`; zero exactly for a Hermitian matrix.
    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.dagger()).frobenius_norm()
    }
}
