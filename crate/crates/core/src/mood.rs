//! A-posteriori detection and the cascade of schemes.
//!
//! A candidate is computed with the current levels, troubled cells are
//! detected, moved one rung down the cascade and recomputed together with
//! their surroundings until every cell is accepted.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::mesh::{cell_volume, characteristic_length, MeshGeometry, MeshTopology};
use crate::reconstruct::least_squares_gradient;
use crate::solver::state::CellState;
use crate::solver::step::{Candidate, StepContext};
use crate::tensor::{is_spd, Mat3, Vec2};

/// Rung of the cascade, ordered from most to least accurate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemeLevel {
    /// Unlimited linear reconstruction.
    P1,
    /// Barth–Jespersen limited reconstruction.
    P1Bj,
    /// First-order parachute.
    P0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Cascade {
    /// `P1 → P1-BJ → P0`.
    #[default]
    ThreeLevel,
    /// `P1 → P0`.
    TwoLevel,
}

impl SchemeLevel {
    pub fn next(self, cascade: Cascade) -> SchemeLevel {
        match (self, cascade) {
            (SchemeLevel::P1, Cascade::ThreeLevel) => SchemeLevel::P1Bj,
            _ => SchemeLevel::P0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Trouble {
    NonFinite,
    NonPositiveVolume,
    NonPositiveEnergy,
    NotPositiveDefinite,
    InvertedCell,
    Rdmp,
    Involution,
    PredictorFailure,
    CrankNicolsonFailure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionCriteria {
    pub delta0: f64,
    pub delta1: f64,
    /// Scale `delta0` by the largest neighbourhood density.
    pub relative_floor: bool,
    pub rdmp: bool,
    pub involution: bool,
    /// Test only the involution residual added by the step.
    pub involution_increment: bool,
    /// Widen the RDMP extrema with the cell's own `t^n` linear density
    /// extrapolated to its vertices.
    pub vertex_extrapolation: bool,
}

impl Default for DetectionCriteria {
    fn default() -> Self {
        Self {
            delta0: 1e-4,
            delta1: 1e-3,
            relative_floor: true,
            rdmp: true,
            involution: true,
            involution_increment: true,
            vertex_extrapolation: true,
        }
    }
}

/// Candidate data of one cell seen by the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellCandidate<'a> {
    pub state: &'a CellState,
    /// Geometric volume at `t^{n+1}`.
    pub volume: f64,
    /// In-circle diameter at `t^{n+1}`.
    pub char_length: f64,
    pub mass: f64,
    pub rho0: f64,
    /// `√det B − ρ0/ρ` at `t^n`.
    pub residual_n: f64,
    /// `ρ` at `t^n`.
    pub rho_n: f64,
    pub predictor_ok: bool,
    pub cn_fallback: bool,
}

/// Density bounds `[m − δ, M + δ]` of the von Neumann neighbourhood at `t^n`.
pub fn rdmp_bounds(densities: &[f64], criteria: &DetectionCriteria) -> (f64, f64) {
    let lo = densities.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = densities.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let floor = if criteria.relative_floor {
        criteria.delta0 * hi.abs()
    } else {
        criteria.delta0
    };
    let delta = floor.max(criteria.delta1 * (hi - lo).abs());
    (lo - delta, hi + delta)
}

/// Total detection of one candidate.
pub fn detect(
    c: &CellCandidate,
    bounds: (f64, f64),
    criteria: &DetectionCriteria,
) -> Option<Trouble> {
    let s = c.state;
    if !s.is_finite() || !c.volume.is_finite() {
        return Some(Trouble::NonFinite);
    }
    if !c.predictor_ok {
        return Some(Trouble::PredictorFailure);
    }
    if c.cn_fallback {
        return Some(Trouble::CrankNicolsonFailure);
    }
    if !(s.tau > 0.0) {
        return Some(Trouble::NonPositiveVolume);
    }
    if !(c.volume > 0.0) {
        return Some(Trouble::InvertedCell);
    }
    if !(s.eps() > 0.0) {
        return Some(Trouble::NonPositiveEnergy);
    }
    if !is_spd(&s.b) {
        return Some(Trouble::NotPositiveDefinite);
    }
    let rho = c.mass / c.volume;
    if criteria.rdmp && !(rho >= bounds.0 && rho <= bounds.1) {
        return Some(Trouble::Rdmp);
    }
    if criteria.involution {
        // the t^n residual carried along by the volume change
        let base = if criteria.involution_increment {
            c.residual_n * c.rho_n / rho
        } else {
            0.0
        };
        if (involution_residual(&s.b, c.rho0, rho) - base).abs() >= c.char_length.powi(3) {
            return Some(Trouble::Involution);
        }
    }
    None
}

/// `√det B − ρ0/ρ`.
pub fn involution_residual(b: &Mat3, rho0: f64, rho: f64) -> f64 {
    b.determinant().sqrt() - rho0 / rho
}

/// Moves every troubled cell one rung down. Returns the cells whose level
/// changed and the recompute set (troubled cells and their stencil neighbours).
pub fn decrement(
    levels: &mut [SchemeLevel],
    troubled: &[usize],
    topo: &MeshTopology,
    cascade: Cascade,
) -> (Vec<usize>, Vec<usize>) {
    let mut changed = Vec::new();
    let mut recompute = Vec::new();
    for &c in troubled {
        if levels[c] != SchemeLevel::P0 {
            levels[c] = levels[c].next(cascade);
            changed.push(c);
        }
        recompute.push(c);
        recompute.extend(topo.stencil(c));
    }
    recompute.sort_unstable();
    recompute.dedup();
    (changed, recompute)
}

/// Per-step cascade statistics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MoodStats {
    /// Cells flagged at least once during the step.
    pub troubled: usize,
    pub iterations: usize,
    pub recomputed: usize,
    pub count_p0: usize,
    pub count_p1bj: usize,
    pub count_p1: usize,
    /// Reason of the first flag per troubled cell.
    pub reasons: Vec<(usize, Trouble)>,
}

impl MoodStats {
    fn count(&mut self, levels: &[SchemeLevel]) {
        self.count_p0 = levels.iter().filter(|l| **l == SchemeLevel::P0).count();
        self.count_p1bj = levels.iter().filter(|l| **l == SchemeLevel::P1Bj).count();
        self.count_p1 = levels.len() - self.count_p0 - self.count_p1bj;
    }
}

/// `t^n` neighbourhood bounds for every cell, using `ρ = m/V`.
pub fn all_rdmp_bounds(
    topo: &MeshTopology,
    geom: &MeshGeometry,
    coords: &[Vec2],
    cell_mass: &[f64],
    criteria: &DetectionCriteria,
) -> Vec<(f64, f64)> {
    let rho: Vec<f64> = (0..topo.num_cells())
        .map(|c| cell_mass[c] / geom.cells[c].volume)
        .collect();
    (0..topo.num_cells())
        .into_par_iter()
        .map(|c| {
            let mut vals: Vec<f64> = std::iter::once(c)
                .chain(topo.stencil(c).iter().copied())
                .map(|j| rho[j])
                .collect();
            if criteria.vertex_extrapolation {
                let xc = geom.cells[c].centroid;
                let nb: Vec<(Vec2, f64)> = topo
                    .stencil(c)
                    .iter()
                    .map(|&j| (geom.cells[j].centroid, rho[j]))
                    .collect();
                if let Some(g) = least_squares_gradient(xc, rho[c], &nb) {
                    vals.extend(
                        topo.cells[c]
                            .iter()
                            .map(|&q| rho[c] + g.dot(&(coords[q] - xc))),
                    );
                }
            }
            rdmp_bounds(&vals, criteria)
        })
        .collect()
}

fn detect_all(
    ctx: &StepContext,
    cand: &Candidate,
    bounds: &[(f64, f64)],
    residual_n: &[(f64, f64)],
    criteria: &DetectionCriteria,
    levels: &[SchemeLevel],
) -> Vec<(usize, Trouble)> {
    let p = ctx.problem;
    let n = cand.cells.len();
    let shapes: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|c| {
            let x = p.topo.cells[c].map(|q| cand.coords[q]);
            (cell_volume(&x), characteristic_length(&x))
        })
        .collect();
    let out: Vec<Option<(usize, Trouble)>> = (0..n)
        .into_par_iter()
        .map(|c| {
            let cc = CellCandidate {
                state: &cand.cells[c],
                volume: shapes[c].0,
                char_length: shapes[c].1,
                mass: p.masses.cell_mass[c],
                rho0: p.material.rho0,
                residual_n: residual_n[c].0,
                rho_n: residual_n[c].1,
                predictor_ok: cand.preds[c].ok,
                cn_fallback: cand.cn_fallback[c],
            };
            let t = detect(&cc, bounds[c], criteria)?;
            // the parachute is terminal: only non-finite values are fatal there
            if levels[c] == SchemeLevel::P0 && t != Trouble::NonFinite {
                return None;
            }
            Some((c, t))
        })
        .collect();
    out.into_iter().flatten().collect()
}

/// Runs the detection/decrement/recompute loop until every cell is accepted.
/// `levels` holds the starting levels and receives the final ones.
pub fn mood_step(
    ctx: &StepContext,
    levels: &mut [SchemeLevel],
    criteria: &DetectionCriteria,
    cascade: Cascade,
    time: f64,
) -> Result<(Candidate, MoodStats), SolverError> {
    let p = ctx.problem;
    let bounds = all_rdmp_bounds(p.topo, ctx.geom, ctx.coords, &p.masses.cell_mass, criteria);
    let residual_n: Vec<(f64, f64)> = (0..levels.len())
        .map(|c| {
            let rho = p.masses.cell_mass[c] / ctx.geom.cells[c].volume;
            (
                involution_residual(&ctx.cells[c].b, p.material.rho0, rho),
                rho,
            )
        })
        .collect();
    let mut cand = ctx.run(levels)?;
    let mut stats = MoodStats::default();
    let mut flagged = vec![false; levels.len()];
    loop {
        let troubled = detect_all(ctx, &cand, &bounds, &residual_n, criteria, levels);
        if let Some(&(cell, _)) = troubled.iter().find(|(c, _)| levels[*c] == SchemeLevel::P0) {
            return Err(SolverError::ParachuteFailure { cell, time });
        }
        if troubled.is_empty() {
            break;
        }
        for &(c, t) in &troubled {
            if !flagged[c] {
                flagged[c] = true;
                stats.troubled += 1;
                stats.reasons.push((c, t));
            }
        }
        let cells: Vec<usize> = troubled.iter().map(|(c, _)| *c).collect();
        let (changed, recompute) = decrement(levels, &cells, p.topo, cascade);
        stats.iterations += 1;
        stats.recomputed += recompute.len();
        ctx.recompute(&mut cand, levels, &changed)?;
    }
    stats.count(levels);
    if log::log_enabled!(log::Level::Debug) && !stats.reasons.is_empty() {
        let mut hist: Vec<(Trouble, usize)> = Vec::new();
        for (_, t) in &stats.reasons {
            match hist.iter_mut().find(|(k, _)| k == t) {
                Some((_, n)) => *n += 1,
                None => hist.push((*t, 1)),
            }
        }
        log::debug!(
            "t = {time:e}: troubled {} in {} iterations: {hist:?}",
            stats.troubled,
            stats.iterations
        );
    }
    Ok((cand, stats))
}
