//! Diagnostics CSV and legacy VTK snapshots.

use std::fmt::Write as _;
use std::io::Write;

use crate::constitutive::MaterialModel;
use crate::error::SolverError;
use crate::mesh::MeshTopology;
use crate::mood::SchemeLevel;
use crate::solver::CellState;
use crate::tensor::{Mat3, Vec2};

use super::diagnostics::Totals;

pub const DIAG_HEADER: &str =
    "step,time,dt,branch,mass,momx,momy,energy,kinetic,free,delta_h,troubled,levelP0,levelP1BJ,levelP1";

#[derive(Debug, Clone, PartialEq)]
pub struct DiagRow {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub branch: String,
    pub totals: Totals,
    pub delta_h: f64,
    pub troubled: usize,
    pub level_p0: usize,
    pub level_p1bj: usize,
    pub level_p1: usize,
}

impl DiagRow {
    pub fn to_csv(&self) -> String {
        let t = &self.totals;
        format!(
            "{},{:e},{:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{},{}",
            self.step,
            self.time,
            self.dt,
            self.branch,
            t.mass,
            t.momentum.x,
            t.momentum.y,
            t.energy,
            t.kinetic,
            t.free,
            self.delta_h,
            self.troubled,
            self.level_p0,
            self.level_p1bj,
            self.level_p1
        )
    }
}

pub struct DiagWriter<W: Write> {
    out: W,
}

impl<W: Write> DiagWriter<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        writeln!(out, "{DIAG_HEADER}")?;
        Ok(Self { out })
    }

    pub fn row(&mut self, r: &DiagRow) -> std::io::Result<()> {
        writeln!(self.out, "{}", r.to_csv())
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

fn level_code(l: SchemeLevel) -> u8 {
    match l {
        SchemeLevel::P0 => 0,
        SchemeLevel::P1Bj => 1,
        SchemeLevel::P1 => 2,
    }
}

fn push_tensor(s: &mut String, m: &Mat3) {
    for i in 0..3 {
        let _ = writeln!(s, "{:e} {:e} {:e}", m[(i, 0)], m[(i, 1)], m[(i, 2)]);
    }
}

/// Unstructured-grid snapshot. Cell data: `rho`, `p`, `levels` (0 = P0,
/// 1 = P1 limited, 2 = P1), tensors `B` and `T`; point data: `velocity`.
#[allow(clippy::too_many_arguments)]
pub fn vtk_snapshot(
    topo: &MeshTopology,
    coords: &[Vec2],
    node_v: &[Vec2],
    cells: &[CellState],
    levels: &[SchemeLevel],
    material: &MaterialModel,
    time: f64,
) -> Result<String, SolverError> {
    let n = coords.len();
    let m = cells.len();
    let mut s = String::with_capacity(256 * m);
    let _ = writeln!(
        s,
        "# vtk DataFile Version 3.0\nhyperlag t={time:e}\nASCII\nDATASET UNSTRUCTURED_GRID"
    );
    let _ = writeln!(s, "POINTS {n} double");
    for x in coords {
        let _ = writeln!(s, "{:e} {:e} 0", x.x, x.y);
    }
    let _ = writeln!(s, "CELLS {m} {}", 4 * m);
    for t in &topo.cells {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {m}");
    for _ in 0..m {
        s.push_str("5\n");
    }
    let stress = cells
        .iter()
        .map(|c| material.stress_state(c.tau, c.eps(), &c.b))
        .collect::<Result<Vec<_>, _>>()?;
    let _ = writeln!(
        s,
        "CELL_DATA {m}\nSCALARS rho double 1\nLOOKUP_TABLE default"
    );
    for c in cells {
        let _ = writeln!(s, "{:e}", c.rho());
    }
    s.push_str("SCALARS p double 1\nLOOKUP_TABLE default\n");
    for st in &stress {
        let _ = writeln!(s, "{:e}", st.p);
    }
    s.push_str("SCALARS levels int 1\nLOOKUP_TABLE default\n");
    for l in levels {
        let _ = writeln!(s, "{}", level_code(*l));
    }
    s.push_str("TENSORS B double\n");
    for c in cells {
        push_tensor(&mut s, &c.b);
    }
    s.push_str("TENSORS T double\n");
    for st in &stress {
        push_tensor(&mut s, &st.t);
    }
    let _ = writeln!(s, "POINT_DATA {n}\nVECTORS velocity double");
    for v in node_v {
        let _ = writeln!(s, "{:e} {:e} 0", v.x, v.y);
    }
    Ok(s)
}
