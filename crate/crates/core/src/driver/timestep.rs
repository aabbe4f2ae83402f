//! Time-step control.

use std::fmt;

use crate::error::SolverError;
use crate::mesh::{MeshGeometry, MeshTopology};
use crate::tensor::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtBranch {
    Acoustic,
    Volume,
    Increase,
    /// Clipped to land on an output time or the final time.
    Clip,
    /// Clipped so that a node lands on a contact wall.
    Contact,
}

impl fmt::Display for DtBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DtBranch::Acoustic => "acoustic",
            DtBranch::Volume => "volume",
            DtBranch::Increase => "increase",
            DtBranch::Clip => "clip",
            DtBranch::Contact => "contact",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStepControl {
    pub c_cfl: f64,
    pub c_v: f64,
    pub c_i: f64,
}

impl Default for TimeStepControl {
    fn default() -> Self {
        Self {
            c_cfl: 0.4,
            c_v: 0.2,
            c_i: 0.1,
        }
    }
}

/// `min_c L_c / a_c`.
pub fn acoustic_limit(geom: &MeshGeometry, wave_speed: &[f64]) -> f64 {
    geom.cells
        .iter()
        .zip(wave_speed)
        .map(|(g, a)| g.char_length / a)
        .fold(f64::INFINITY, f64::min)
}

/// `min_c V_c / |Σ_p l n · v_p|`; infinite for a static state.
pub fn volume_limit(topo: &MeshTopology, geom: &MeshGeometry, node_v: &[Vec2]) -> f64 {
    topo.cells
        .iter()
        .zip(&geom.cells)
        .map(|(tri, g)| {
            let rate: f64 = (0..3).map(|k| g.corner[k].dot(&node_v[tri[k]])).sum();
            g.volume / rate.abs()
        })
        .fold(f64::INFINITY, f64::min)
}

impl TimeStepControl {
    /// Smallest of the three branches, never past `remaining`. The growth cap
    /// is seeded with the acoustic branch when there is no previous step.
    pub fn compute(
        &self,
        acoustic: f64,
        volume: f64,
        dt_prev: Option<f64>,
        remaining: f64,
        time: f64,
    ) -> Result<(f64, DtBranch), SolverError> {
        let acoustic = self.c_cfl * acoustic;
        let volume = self.c_v * volume;
        let increase = (1.0 + self.c_i) * dt_prev.unwrap_or(acoustic);
        let mut best = (acoustic, DtBranch::Acoustic);
        for cand in [(volume, DtBranch::Volume), (increase, DtBranch::Increase)] {
            if cand.0 < best.0 {
                best = cand;
            }
        }
        if remaining <= best.0 {
            best = (remaining, DtBranch::Clip);
        }
        if !(best.0 > 0.0 && best.0.is_finite()) {
            return Err(SolverError::InvalidTimeStep { dt: best.0, time });
        }
        Ok(best)
    }
}
