//! One explicit step: predictor, nodal solve, corrector and B update, with
//! partial recomputation for the a-posteriori loop.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bc::{solve_constrained, BoundaryConditions, NodeBc, NodeSolution};
use super::nodal::{corner_entropy, nodal_balance, subcell_force, subcell_matrix};
use super::state::CellState;
use super::update::{update_b_crank_nicolson, update_b_first_order, velocity_gradient};
use crate::constitutive::MaterialModel;
use crate::error::SolverError;
use crate::mesh::{MassPartition, MeshGeometry, MeshTopology};
use crate::mood::SchemeLevel;
use crate::reconstruct::{ader_predict, first_order, reconstruct_cell, PicardOptions, Predictor};
use crate::tensor::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    First,
    Second,
}

/// Node velocities used by the Crank–Nicolson update of `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CnVelocity {
    /// `v*` on both `x^n` and `x^{n+1}`; pushes `B` forward with the exact
    /// cell deformation.
    Trajectory,
    /// `v^n` on `x^n` and `2v* − v^n` on `x^{n+1}`.
    Extrapolated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeOptions {
    pub order: Order,
    pub picard: PicardOptions,
    pub cn_velocity: CnVelocity,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self {
            order: Order::Second,
            picard: PicardOptions::default(),
            cn_velocity: CnVelocity::Trajectory,
        }
    }
}

impl SchemeOptions {
    /// Level every cell starts the cascade from.
    pub fn top_level(&self) -> SchemeLevel {
        match self.order {
            Order::First => SchemeLevel::P0,
            Order::Second => SchemeLevel::P1,
        }
    }
}

/// Time-independent problem data.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub topo: &'a MeshTopology,
    pub masses: &'a MassPartition,
    pub material: &'a MaterialModel,
    pub bcs: &'a BoundaryConditions,
    pub options: SchemeOptions,
}

/// Candidate solution at `t^{n+1}` and the intermediate data it came from.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub cells: Vec<CellState>,
    pub coords: Vec<Vec2>,
    pub node_v: Vec<Vec2>,
    pub reactions: Vec<Vec2>,
    pub preds: Vec<Predictor>,
    /// Crank–Nicolson fell back to the Euler update.
    pub cn_fallback: Vec<bool>,
    /// Per-cell entropy production rate `Σ_p (v_p − v_cp)ᵀ M_cp (v_p − v_cp)`.
    pub entropy: Vec<f64>,
}

/// Everything needed to advance from `t^n` by `dt`.
pub struct StepContext<'a> {
    pub problem: Problem<'a>,
    pub geom: &'a MeshGeometry,
    pub coords: &'a [Vec2],
    pub cells: &'a [CellState],
    pub dt: f64,
    pub node_bc: Vec<NodeBc>,
    /// `v^n` at the nodes for the extrapolated Crank–Nicolson variant.
    v_n: Option<Vec<Vec2>>,
}

impl<'a> StepContext<'a> {
    pub fn new(
        problem: Problem<'a>,
        geom: &'a MeshGeometry,
        coords: &'a [Vec2],
        cells: &'a [CellState],
        contact_active: &[bool],
        dt: f64,
    ) -> Result<Self, SolverError> {
        let topo = problem.topo;
        let node_bc = (0..topo.num_nodes)
            .map(|p| problem.bcs.node_bc(topo, coords, p, contact_active))
            .collect();
        let mut ctx = Self {
            problem,
            geom,
            coords,
            cells,
            dt,
            node_bc,
            v_n: None,
        };
        if problem.options.order == Order::Second
            && problem.options.cn_velocity == CnVelocity::Extrapolated
        {
            let preds = (0..cells.len())
                .into_par_iter()
                .map(|c| ctx.frozen(c))
                .collect::<Result<Vec<_>, _>>()?;
            let v = (0..topo.num_nodes)
                .into_par_iter()
                .map(|p| ctx.solve_node(&preds, p).map(|s| s.v))
                .collect::<Result<Vec<_>, _>>()?;
            ctx.v_n = Some(v);
        }
        Ok(ctx)
    }

    fn vertices(&self, c: usize) -> [Vec2; 3] {
        self.problem.topo.cells[c].map(|p| self.coords[p])
    }

    fn frozen(&self, c: usize) -> Result<Predictor, SolverError> {
        Ok(first_order(
            self.problem.material,
            &self.cells[c],
            self.vertices(c),
        )?)
    }

    /// Effective level: every cell is `P0` in a first-order run.
    fn level(&self, level: SchemeLevel) -> SchemeLevel {
        match self.problem.options.order {
            Order::First => SchemeLevel::P0,
            Order::Second => level,
        }
    }

    pub fn predict_cell(&self, c: usize, level: SchemeLevel) -> Result<Predictor, SolverError> {
        let level = self.level(level);
        if level == SchemeLevel::P0 {
            return self.frozen(c);
        }
        let p = self.problem;
        let poly = reconstruct_cell(p.topo, self.geom, self.coords, self.cells, c, level);
        Ok(ader_predict(
            p.material,
            &poly,
            &self.vertices(c),
            self.dt,
            p.options.picard,
        )?)
    }

    pub fn solve_node(&self, preds: &[Predictor], p: usize) -> Result<NodeSolution, SolverError> {
        let (m, rhs) = nodal_balance(self.problem.topo, self.geom, preds, p);
        let bc = &self.node_bc[p];
        solve_constrained(&m, rhs + bc.force, &bc.constraints, p)
    }

    /// Corrector and `B` update of one cell from resolved node velocities and
    /// the moved coordinates. Returns the state, the Crank–Nicolson fallback
    /// flag and the entropy production rate.
    pub fn correct_cell(
        &self,
        c: usize,
        level: SchemeLevel,
        preds: &[Predictor],
        node_v: &[Vec2],
        new_coords: &[Vec2],
    ) -> (CellState, bool, f64) {
        let p = self.problem;
        let tri = p.topo.cells[c];
        let g = &self.geom.cells[c];
        let pred = &preds[c];
        let old = &self.cells[c];
        let dt_m = self.dt / p.masses.cell_mass[c];
        let mut dvol = 0.0;
        let mut force = Vec2::zeros();
        let mut work = 0.0;
        let mut entropy = 0.0;
        for k in 0..3 {
            let vp = node_v[tri[k]];
            let mcp = subcell_matrix(pred.z, &g.half_edges[k]);
            let f = subcell_force(&pred.corner_t[k], g.corner[k], &mcp, vp, pred.corner_v[k]);
            dvol += g.corner[k].dot(&vp);
            force += f;
            work += f.dot(&vp);
            entropy += corner_entropy(pred.z, &g.half_edges[k], vp - pred.corner_v[k]);
        }
        let x_n = tri.map(|q| self.coords[q]);
        let x_np1 = tri.map(|q| new_coords[q]);
        let v_star = tri.map(|q| node_v[q]);
        let l_n = velocity_gradient(&x_n, &v_star);
        let (b, fallback) = if self.level(level) == SchemeLevel::P0 {
            (update_b_first_order(&old.b, &l_n, self.dt), false)
        } else {
            let (l0, l1) = match &self.v_n {
                None => (l_n, velocity_gradient(&x_np1, &v_star)),
                Some(vn) => {
                    let v0 = tri.map(|q| vn[q]);
                    let v1 = tri.map(|q| node_v[q] * 2.0 - vn[q]);
                    (velocity_gradient(&x_n, &v0), velocity_gradient(&x_np1, &v1))
                }
            };
            match update_b_crank_nicolson(&old.b, &l0, &l1, self.dt) {
                Some(b) => (b, false),
                None => (update_b_first_order(&old.b, &l_n, self.dt), true),
            }
        };
        let state = CellState {
            tau: old.tau + dt_m * dvol,
            v: old.v + force * dt_m,
            e: old.e + dt_m * work,
            b,
        };
        (state, fallback, entropy)
    }

    /// Full step with the given cascade levels.
    pub fn run(&self, levels: &[SchemeLevel]) -> Result<Candidate, SolverError> {
        let topo = self.problem.topo;
        let preds = (0..self.cells.len())
            .into_par_iter()
            .map(|c| self.predict_cell(c, levels[c]))
            .collect::<Result<Vec<_>, _>>()?;
        let sol = (0..topo.num_nodes)
            .into_par_iter()
            .map(|p| self.solve_node(&preds, p))
            .collect::<Result<Vec<_>, _>>()?;
        let node_v: Vec<Vec2> = sol.iter().map(|s| s.v).collect();
        let reactions = sol.iter().map(|s| s.reaction).collect();
        let coords = move_nodes(self.coords, &node_v, self.dt);
        let out: Vec<_> = (0..self.cells.len())
            .into_par_iter()
            .map(|c| self.correct_cell(c, levels[c], &preds, &node_v, &coords))
            .collect();
        let mut cand = Candidate {
            cells: Vec::with_capacity(out.len()),
            coords,
            node_v,
            reactions,
            preds,
            cn_fallback: Vec::with_capacity(out.len()),
            entropy: Vec::with_capacity(out.len()),
        };
        for (s, f, e) in out {
            cand.cells.push(s);
            cand.cn_fallback.push(f);
            cand.entropy.push(e);
        }
        Ok(cand)
    }

    /// Redoes the cells in `changed` at their new levels: their predictors, the
    /// nodes they touch and every cell around those nodes.
    pub fn recompute(
        &self,
        cand: &mut Candidate,
        levels: &[SchemeLevel],
        changed: &[usize],
    ) -> Result<(), SolverError> {
        let topo = self.problem.topo;
        let new_preds = changed
            .par_iter()
            .map(|&c| self.predict_cell(c, levels[c]))
            .collect::<Result<Vec<_>, _>>()?;
        for (&c, p) in changed.iter().zip(new_preds) {
            cand.preds[c] = p;
        }
        let mut nodes: Vec<usize> = changed.iter().flat_map(|&c| topo.cells[c]).collect();
        nodes.sort_unstable();
        nodes.dedup();
        let sol = nodes
            .par_iter()
            .map(|&p| self.solve_node(&cand.preds, p))
            .collect::<Result<Vec<_>, _>>()?;
        for (&p, s) in nodes.iter().zip(sol) {
            cand.node_v[p] = s.v;
            cand.reactions[p] = s.reaction;
            cand.coords[p] = self.coords[p] + s.v * self.dt;
        }
        let mut cells: Vec<usize> = nodes
            .iter()
            .flat_map(|&p| topo.node_to_cells[p].iter().copied())
            .collect();
        cells.sort_unstable();
        cells.dedup();
        let out: Vec<_> = cells
            .par_iter()
            .map(|&c| self.correct_cell(c, levels[c], &cand.preds, &cand.node_v, &cand.coords))
            .collect();
        for (&c, (s, f, e)) in cells.iter().zip(out) {
            cand.cells[c] = s;
            cand.cn_fallback[c] = f;
            cand.entropy[c] = e;
        }
        Ok(())
    }
}

/// `x^{n+1} = x^n + Δt v*`.
pub fn move_nodes(coords: &[Vec2], node_v: &[Vec2], dt: f64) -> Vec<Vec2> {
    coords.iter().zip(node_v).map(|(x, v)| x + v * dt).collect()
}
