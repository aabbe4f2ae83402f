//! Mesh convergence against an exact solution.

use crate::error::SolverError;

use super::diagnostics::{l2_error, orders};
use super::run::{RunOptions, Simulation};
use super::testcase::{cell_centroids, PlateExact, Setup};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceLevel {
    pub cells: usize,
    /// Smallest in-circle diameter at the final time.
    pub char_length: f64,
    pub err_u: f64,
    pub err_b11: f64,
    pub err_t11: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub levels: Vec<ConvergenceLevel>,
}

impl ConvergenceTable {
    fn column(&self, f: impl Fn(&ConvergenceLevel) -> f64) -> Vec<f64> {
        orders(
            &self
                .levels
                .iter()
                .map(|l| l.char_length)
                .collect::<Vec<_>>(),
            &self.levels.iter().map(f).collect::<Vec<_>>(),
        )
    }

    pub fn order_u(&self) -> Vec<f64> {
        self.column(|l| l.err_u)
    }

    pub fn order_b11(&self) -> Vec<f64> {
        self.column(|l| l.err_b11)
    }

    pub fn order_t11(&self) -> Vec<f64> {
        self.column(|l| l.err_t11)
    }

    pub fn to_text(&self) -> String {
        let (ou, ob, ot) = (self.order_u(), self.order_b11(), self.order_t11());
        let mut s = String::from(
            "cells      L_c        e(u)       O(u)   e(B11)     O(B11) e(T11)     O(T11)\n",
        );
        for (i, l) in self.levels.iter().enumerate() {
            let o = |v: &[f64]| {
                if i == 0 {
                    "   -  ".to_string()
                } else {
                    format!("{:6.3}", v[i - 1])
                }
            };
            s.push_str(&format!(
                "{:<10} {:.3e}  {:.3e}  {} {:.3e}  {} {:.3e}  {}\n",
                l.cells,
                l.char_length,
                l.err_u,
                o(&ou),
                l.err_b11,
                o(&ob),
                l.err_t11,
                o(&ot)
            ));
        }
        s
    }
}

/// Runs a single level to its final time and measures the errors.
pub fn measure(setup: Setup, options: RunOptions) -> Result<ConvergenceLevel, SolverError> {
    let exact = PlateExact::new(&setup.case).ok_or_else(|| {
        SolverError::Config(format!("{} has no exact solution", setup.case.name()))
    })?;
    let t_final = setup.t_final;
    let mut sim = Simulation::new(setup, options)?;
    sim.run_to(t_final, |_, _| Ok(()))?;
    let geom = sim.geometry()?;
    let xc = cell_centroids(&sim.topo, &sim.coords);
    let mut u = (Vec::new(), Vec::new());
    let mut b = (Vec::new(), Vec::new());
    let mut t = (Vec::new(), Vec::new());
    for (c, x) in sim.cells.iter().zip(&xc) {
        u.0.push(c.v.x);
        u.1.push(exact.velocity(*x, t_final).x);
        b.0.push(c.b[(0, 0)]);
        b.1.push(exact.b(*x, t_final)[(0, 0)]);
        t.0.push(sim.material.stress_state(c.tau, c.eps(), &c.b)?.t[(0, 0)]);
        t.1.push(exact.stress(*x, t_final)?[(0, 0)]);
    }
    let m = &sim.masses.cell_mass;
    let rho0 = sim.material.rho0;
    Ok(ConvergenceLevel {
        cells: sim.cells.len(),
        char_length: geom.min_char_length(),
        err_u: l2_error(m, rho0, &u.0, &u.1),
        err_b11: l2_error(m, rho0, &b.0, &b.1),
        err_t11: l2_error(m, rho0, &t.0, &t.1),
    })
}

/// `levels` successive uniform refinements starting from `make(0)`.
pub fn convergence_study(
    levels: usize,
    options: RunOptions,
    make: impl Fn(usize) -> Result<Setup, SolverError>,
) -> Result<ConvergenceTable, SolverError> {
    let mut table = ConvergenceTable::default();
    for k in 0..levels {
        let l = measure(make(k)?, options)?;
        log::info!(
            "level {k}: {} cells, L_c = {:.3e}, e(u) = {:.3e}",
            l.cells,
            l.char_length,
            l.err_u
        );
        table.levels.push(l);
    }
    Ok(table)
}
