//! Time loop: step control, a-posteriori limiting and contact switching.

use crate::constitutive::MaterialModel;
use crate::error::{MeshError, SolverError};
use crate::mesh::{MassPartition, MeshGeometry, MeshTopology};
use crate::mood::{mood_step, Cascade, DetectionCriteria, MoodStats, SchemeLevel};
use crate::solver::{
    BoundaryConditions, Candidate, CellState, Problem, SchemeOptions, StepContext,
};
use crate::tensor::Vec2;

use super::diagnostics::{dissipation, Totals};
use super::testcase::Setup;
use super::timestep::{acoustic_limit, volume_limit, DtBranch, TimeStepControl};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub scheme: SchemeOptions,
    pub cascade: Cascade,
    pub criteria: DetectionCriteria,
    pub control: TimeStepControl,
    pub max_steps: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            scheme: SchemeOptions::default(),
            cascade: Cascade::ThreeLevel,
            criteria: DetectionCriteria::default(),
            control: TimeStepControl::default(),
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactKind {
    Contact,
    Detachment,
}

/// A wall switching between touched and untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactEvent {
    pub step: usize,
    /// End of the step at which the switch took effect.
    pub time: f64,
    pub kind: ContactKind,
    /// Nodes landing (contact) or released since the contact (detachment).
    pub nodes: Vec<usize>,
    /// Largest `|distance|` to the wall among them at the event.
    pub distance: f64,
}

#[derive(Debug, Clone, Default)]
pub struct StepReport {
    pub dt: f64,
    pub branch: Option<DtBranch>,
    pub stats: MoodStats,
    /// Smallest per-cell entropy production rate of the accepted candidate.
    pub min_entropy: f64,
    pub candidate_trials: usize,
}

// secant iterations allowed to land a node on a wall
const LANDING_ITERATIONS: usize = 30;

pub struct Simulation {
    pub topo: MeshTopology,
    pub masses: MassPartition,
    pub material: MaterialModel,
    pub bcs: BoundaryConditions,
    pub options: RunOptions,
    pub coords: Vec<Vec2>,
    pub cells: Vec<CellState>,
    /// Node velocities of the last accepted step.
    pub node_v: Vec<Vec2>,
    /// Final cascade levels of the last accepted step.
    pub levels: Vec<SchemeLevel>,
    pub contact_active: Vec<bool>,
    pub events: Vec<ContactEvent>,
    /// Nodes released from each wall since it was last touched.
    released: Vec<Vec<usize>>,
    pub time: f64,
    pub step: usize,
    pub dt_prev: Option<f64>,
    /// `Ψ0 + k0`.
    pub e0: f64,
    pub initial: Totals,
}

impl Simulation {
    pub fn new(setup: Setup, options: RunOptions) -> Result<Self, SolverError> {
        let Setup {
            mesh,
            material,
            bcs,
            cells,
            ..
        } = setup;
        if cells.len() != mesh.topology.num_cells() {
            return Err(SolverError::Config(
                "one initial state per cell is required".into(),
            ));
        }
        let rho0 = vec![material.rho0; cells.len()];
        let masses = MassPartition::new(&mesh.topology, &mesh.coords, &rho0)?;
        let bcs = BoundaryConditions::new(&mesh.topology, &bcs)?;
        let n = mesh.coords.len();
        let mut sim = Self {
            topo: mesh.topology,
            masses,
            material,
            bcs,
            options,
            coords: mesh.coords,
            cells,
            node_v: vec![Vec2::zeros(); n],
            levels: Vec::new(),
            contact_active: vec![false; n],
            events: Vec::new(),
            released: Vec::new(),
            time: 0.0,
            step: 0,
            dt_prev: None,
            e0: 0.0,
            initial: Totals::default(),
        };
        sim.released = vec![Vec::new(); sim.bcs.walls.len()];
        sim.levels = vec![sim.options.scheme.top_level(); sim.cells.len()];
        sim.initial = sim.totals()?;
        sim.e0 = sim.initial.mechanical();
        sim.node_v = sim.first_order_node_velocities()?;
        Ok(sim)
    }

    fn problem(&self) -> Problem<'_> {
        Problem {
            topo: &self.topo,
            masses: &self.masses,
            material: &self.material,
            bcs: &self.bcs,
            options: self.options.scheme,
        }
    }

    pub fn geometry(&self) -> Result<MeshGeometry, SolverError> {
        MeshGeometry::compute(&self.topo, &self.coords).map_err(|e| match e {
            MeshError::InvertedCell { cell, volume } => SolverError::TangledCell {
                cell,
                time: self.time,
                volume,
            },
            other => other.into(),
        })
    }

    fn first_order_node_velocities(&self) -> Result<Vec<Vec2>, SolverError> {
        let geom = self.geometry()?;
        let ctx = StepContext::new(
            self.problem(),
            &geom,
            &self.coords,
            &self.cells,
            &self.contact_active,
            0.0,
        )?;
        let preds = (0..self.cells.len())
            .map(|c| ctx.predict_cell(c, SchemeLevel::P0))
            .collect::<Result<Vec<_>, _>>()?;
        (0..self.topo.num_nodes)
            .map(|p| ctx.solve_node(&preds, p).map(|s| s.v))
            .collect()
    }

    pub fn totals(&self) -> Result<Totals, SolverError> {
        Totals::compute(&self.material, &self.masses.cell_mass, &self.cells)
    }

    pub fn delta_h(&self, totals: &Totals) -> f64 {
        dissipation(totals, self.e0)
    }

    pub fn wave_speeds(&self) -> Result<Vec<f64>, SolverError> {
        self.cells
            .iter()
            .map(|c| Ok(self.material.stress_state(c.tau, c.eps(), &c.b)?.a))
            .collect()
    }

    /// `(dt, branch)` for a step that must not pass `t_target`.
    pub fn time_step(
        &self,
        geom: &MeshGeometry,
        t_target: f64,
    ) -> Result<(f64, DtBranch), SolverError> {
        let acoustic = acoustic_limit(geom, &self.wave_speeds()?);
        let volume = volume_limit(&self.topo, geom, &self.node_v);
        self.options.control.compute(
            acoustic,
            volume,
            self.dt_prev,
            t_target - self.time,
            self.time,
        )
    }

    fn trial(
        &self,
        geom: &MeshGeometry,
        active: &[bool],
        dt: f64,
    ) -> Result<(Candidate, MoodStats, Vec<SchemeLevel>), SolverError> {
        let ctx = StepContext::new(self.problem(), geom, &self.coords, &self.cells, active, dt)?;
        let mut levels = vec![self.options.scheme.top_level(); self.cells.len()];
        let (cand, stats) = mood_step(
            &ctx,
            &mut levels,
            &self.options.criteria,
            self.options.cascade,
            self.time,
        )?;
        Ok((cand, stats, levels))
    }

    /// Smallest wall distance over free contact candidates, with the node.
    fn closest_free(
        &self,
        coords: &[Vec2],
        active: &[bool],
        skip: &[usize],
    ) -> Option<(usize, f64)> {
        self.bcs
            .node_wall
            .iter()
            .enumerate()
            .filter(|(p, w)| w.is_some() && !active[*p] && !skip.contains(p))
            .map(|(p, w)| (p, self.bcs.walls[w.unwrap()].distance(coords[p])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    fn wall_of(&self, p: usize) -> &crate::solver::Wall {
        &self.bcs.walls[self.bcs.node_wall[p].expect("contact node")]
    }

    /// Active nodes whose wall reaction is no longer compressive.
    fn tensile_nodes(&self, cand: &Candidate, active: &[bool]) -> Vec<usize> {
        (0..active.len())
            .filter(|&p| active[p] && -cand.reactions[p].dot(&self.wall_of(p).normal) <= 0.0)
            .collect()
    }

    /// Advances one step without passing `t_target`.
    pub fn advance(&mut self, t_target: f64) -> Result<StepReport, SolverError> {
        if self.step >= self.options.max_steps {
            return Err(SolverError::Config(format!(
                "step limit {} reached",
                self.options.max_steps
            )));
        }
        let geom = self.geometry()?;
        let (mut dt, mut branch) = self.time_step(&geom, t_target)?;
        let mut active = self.contact_active.clone();
        let mut trials = 1;
        let mut result = self.trial(&geom, &active, dt)?;
        let mut detached = Vec::new();

        if self.bcs.has_contact() {
            let tensile = self.tensile_nodes(&result.0, &active);
            if !tensile.is_empty() {
                for &p in &tensile {
                    active[p] = false;
                }
                detached = tensile;
                trials += 1;
                result = self.trial(&geom, &active, dt)?;
            }
            // land the first free node exactly on its wall
            if let Some((p, d1)) = self.closest_free(&result.0.coords, &active, &detached) {
                let eps = self.wall_of(p).eps_d;
                if d1 < -eps {
                    let d0 = self.wall_of(p).distance(self.coords[p]);
                    let (mut t_a, mut d_a) = (0.0, d0);
                    let (mut t_b, mut d_b) = (dt, d1);
                    let mut landed = false;
                    for _ in 0..LANDING_ITERATIONS {
                        let t = t_b - d_b * (t_b - t_a) / (d_b - d_a);
                        let t = if t > 0.0 && t < dt {
                            t
                        } else {
                            0.5 * (t_a + t_b)
                        };
                        trials += 1;
                        let r = self.trial(&geom, &active, t)?;
                        let (q, d) = self
                            .closest_free(&r.0.coords, &active, &detached)
                            .expect("candidates exist");
                        result = r;
                        dt = t;
                        branch = DtBranch::Contact;
                        if d.abs() <= self.wall_of(q).eps_d {
                            landed = true;
                            break;
                        }
                        (t_a, d_a, t_b, d_b) = (t_b, d_b, t, d);
                    }
                    if !landed {
                        log::warn!(
                            "step {}: landing did not reach the wall tolerance",
                            self.step + 1
                        );
                    }
                }
            }
        }

        let (cand, stats, levels) = result;
        let new_time = if branch == DtBranch::Clip {
            t_target
        } else {
            self.time + dt
        };
        self.step += 1;
        if !detached.is_empty() {
            log::info!(
                "step {}: {} nodes released at t = {new_time:e}",
                self.step,
                detached.len()
            );
        }
        let mut landed = Vec::new();
        if self.bcs.has_contact() {
            landed = (0..active.len())
                .filter(|&p| {
                    self.bcs.node_wall[p].is_some()
                        && !active[p]
                        && !detached.contains(&p)
                        && self.wall_of(p).distance(cand.coords[p]) <= self.wall_of(p).eps_d
                })
                .collect();
            for &p in &landed {
                active[p] = true;
            }
            if !landed.is_empty() {
                log::info!(
                    "step {}: {} nodes touch the wall at t = {new_time:e}",
                    self.step,
                    landed.len()
                );
            }
        }
        // events are wall state changes: first node on, last node off
        for w in 0..self.bcs.walls.len() {
            let on_wall = |p: &usize| self.bcs.node_wall[*p] == Some(w);
            let before = (0..active.len())
                .filter(|p| on_wall(p) && self.contact_active[*p])
                .count();
            let after = (0..active.len())
                .filter(|p| on_wall(p) && active[*p])
                .count();
            self.released[w].extend(detached.iter().copied().filter(on_wall));
            let (kind, nodes) = match (before, after) {
                (0, a) if a > 0 => {
                    self.released[w].clear();
                    (
                        ContactKind::Contact,
                        landed.iter().copied().filter(on_wall).collect::<Vec<_>>(),
                    )
                }
                (b, 0) if b > 0 => (
                    ContactKind::Detachment,
                    std::mem::take(&mut self.released[w]),
                ),
                _ => continue,
            };
            let distance = nodes
                .iter()
                .map(|&p| self.wall_of(p).distance(cand.coords[p]).abs())
                .fold(0.0, f64::max);
            self.events.push(ContactEvent {
                step: self.step,
                time: new_time,
                kind,
                nodes,
                distance,
            });
        }
        let min_entropy = cand.entropy.iter().copied().fold(f64::INFINITY, f64::min);
        self.contact_active = active;
        self.coords = cand.coords;
        self.cells = cand.cells;
        self.node_v = cand.node_v;
        self.levels = levels;
        self.time = new_time;
        // clipped steps do not shrink the growth cap
        if !matches!(branch, DtBranch::Clip | DtBranch::Contact) || self.dt_prev.is_none() {
            self.dt_prev = Some(dt);
        }
        Ok(StepReport {
            dt,
            branch: Some(branch),
            stats,
            min_entropy,
            candidate_trials: trials,
        })
    }

    /// Steps until `t_target`, calling `each` after every step.
    pub fn run_to(
        &mut self,
        t_target: f64,
        mut each: impl FnMut(&Simulation, &StepReport) -> Result<(), SolverError>,
    ) -> Result<(), SolverError> {
        while self.time < t_target {
            let r = self.advance(t_target)?;
            each(self, &r)?;
        }
        Ok(())
    }
}
