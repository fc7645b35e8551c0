//! Reference parameter sets for the named orbit families. The `fig2*` sets
//! sweep the drive strength through the single circular value at
//! `n0 = 10`, `ω_eff = −2`.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FigureSet {
    pub id: &'static str,
    pub n0: f64,
    pub f0: f64,
    pub omega: f64,
    pub description: &'static str,
}

const fn set(id: &'static str, n0: f64, f0: f64, omega: f64, description: &'static str) -> FigureSet {
    FigureSet {
        id,
        n0,
        f0,
        omega,
        description,
    }
}

pub const FIGURE_SETS: [FigureSet; 11] = [
    set("fig1a", 8.0, 8.0, -2.0, "frequency-doubled circle"),
    set("fig1b", 10.0, 6.0, -2.0, "cardioid"),
    set("fig1c", 5.0, 5.0, 2.0, "rounded triangle"),
    set("fig1d", 7.0, 4.5, 3.0, "rounded square"),
    set("fig1e", 0.0, 15.0, 2.0, "three-petal rose"),
    set("fig1f", 0.0, -3.0, 2.0 / 3.0, "pentagram"),
    set("fig2a", 10.0, 8.0, -2.0, "cardioid below the circular drive"),
    set("fig2b", 10.0, 9.5, -2.0, "cardioid just below the circular drive"),
    set("fig2c", 10.0, 10.0, -2.0, "circle at the circular drive"),
    set("fig2d", 10.0, 10.5, -2.0, "cardioid just above the circular drive"),
    set("fig2e", 10.0, 12.0, -2.0, "cardioid above the circular drive"),
];

pub fn figure_set(id: &str) -> Option<FigureSet> {
    FIGURE_SETS.iter().copied().find(|s| s.id == id)
}
