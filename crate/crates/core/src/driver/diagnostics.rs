//! Global sums, numerical dissipation and error norms.

use crate::constitutive::{MaterialModel, StrainState};
use crate::error::SolverError;
use crate::solver::CellState;
use crate::tensor::Vec2;

/// Mass-weighted totals, summed in cell order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Totals {
    pub mass: f64,
    pub momentum: Vec2,
    pub energy: f64,
    pub kinetic: f64,
    /// `Σ m_c (Ψv + Ψs)`.
    pub free: f64,
}

impl Totals {
    pub fn compute(
        material: &MaterialModel,
        cell_mass: &[f64],
        cells: &[CellState],
    ) -> Result<Self, SolverError> {
        let mut t = Totals::default();
        for (m, c) in cell_mass.iter().zip(cells) {
            let s = StrainState::new(&c.b)?;
            let (pv, ps) = material.free_energies(&s, c.eps());
            t.mass += m;
            t.momentum += c.v * *m;
            t.energy += m * c.e;
            t.kinetic += 0.5 * m * c.v.norm_squared();
            t.free += m * (pv + ps);
        }
        Ok(t)
    }

    /// `Ψ + k`.
    pub fn mechanical(&self) -> f64 {
        self.free + self.kinetic
    }
}

/// `(Ψ + k − E0)/E0`; the absolute drift when `E0 = 0`.
pub fn dissipation(t: &Totals, e0: f64) -> f64 {
    let d = t.mechanical() - e0;
    if e0 == 0.0 {
        d
    } else {
        d / e0
    }
}

/// `√(Σ V0_c (q_c − q_ex,c)²)` with the reference volumes `V0 = m/ρ0`.
pub fn l2_error(cell_mass: &[f64], rho0: f64, numeric: &[f64], exact: &[f64]) -> f64 {
    cell_mass
        .iter()
        .zip(numeric.iter().zip(exact))
        .map(|(m, (q, e))| m / rho0 * (q - e).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `log(ε_i/ε_{i+1}) / log(L_i/L_{i+1})` for successive pairs.
pub fn orders(lengths: &[f64], errors: &[f64]) -> Vec<f64> {
    lengths
        .windows(2)
        .zip(errors.windows(2))
        .map(|(l, e)| (e[0] / e[1]).ln() / (l[0] / l[1]).ln())
        .collect()
}
