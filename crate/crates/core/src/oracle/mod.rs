//! Brute-force reference: the Schrödinger equation integrated directly in
//! the first `N` number states. Nothing here uses the closed forms, so
//! agreement with them is an independent check.

mod evolve;
mod fock;
mod observables;
mod precise;
mod wigner;

pub use evolve::{
    evolve, evolve_with, halving_check, hamiltonian_at, observe, EvolveOptions, Evolution, Frame,
    HalvingCheck, Method, DEFAULT_NORM_GUARD,
};
pub use fock::{coherent_state, recommended_dim, FockVector, OperatorMatrix, DEFAULT_TAIL_CAP};
pub use observables::{
    default_theta0, observables, pegg_barnett_distribution, pegg_barnett_theta,
    unnormalized_quadratures, ObservableRecord,
};
pub use precise::{
    evolve_extended, DEFAULT_PRECISION_BITS, MAX_PRECISION_BITS, MIN_PRECISION_BITS,
};
pub use wigner::{linspace, wigner_grid, wigner_grid_capped, WignerGrid, DEFAULT_GRID_POINT_CAP};
