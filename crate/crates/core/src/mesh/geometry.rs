//! Time-dependent cell geometry: volumes, corner vectors, half-edge normals
//! and characteristic lengths, plus the frozen subcell mass partition.

use rayon::prelude::*;

use super::topology::MeshTopology;
use crate::error::MeshError;
use crate::tensor::{cross, Vec2};

/// Signed shoelace area of a polygon; positive for counterclockwise order.
pub fn cell_volume(vertices: &[Vec2]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| cross(vertices[i], vertices[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

/// Corner vector l_cp n_cp = d|w_c| / dx_p of a counterclockwise polygon.
pub fn corner_vector(vertices: &[Vec2], local: usize) -> Vec2 {
    let n = vertices.len();
    let next = vertices[(local + 1) % n];
    let prev = vertices[(local + n - 1) % n];
    Vec2::new(next.y - prev.y, prev.x - next.x) * 0.5
}

/// In-circle diameter of a triangle, 4 * area / perimeter.
pub fn characteristic_length(v: &[Vec2; 3]) -> f64 {
    let perimeter = (v[1] - v[0]).norm() + (v[2] - v[1]).norm() + (v[0] - v[2]).norm();
    4.0 * cell_volume(v) / perimeter
}

pub fn centroid(v: &[Vec2; 3]) -> Vec2 {
    (v[0] + v[1] + v[2]) / 3.0
}

/// Quadrangle of the subcell attached to vertex `local`: the vertex, the
/// midpoint of the next edge, the cell centroid and the midpoint of the
/// previous edge.
pub fn subcell_volume(v: &[Vec2; 3], local: usize) -> f64 {
    let p = v[local];
    let next = v[(local + 1) % 3];
    let prev = v[(local + 2) % 3];
    cell_volume(&[p, (p + next) * 0.5, centroid(v), (p + prev) * 0.5])
}

/// One half of a cell edge seen from a vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfEdge {
    /// Half of the edge length.
    pub length: f64,
    /// Outward unit normal.
    pub normal: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub volume: f64,
    pub centroid: Vec2,
    /// Corner vectors per local vertex.
    pub corner: [Vec2; 3],
    /// For local vertex k: half of the previous edge (k-1, k) and of the next edge (k, k+1).
    pub half_edges: [[HalfEdge; 2]; 3],
    pub char_length: f64,
}

impl CellGeometry {
    pub fn from_vertices(v: &[Vec2; 3]) -> Self {
        let edge = |a: Vec2, b: Vec2| {
            let d = b - a;
            let len = d.norm();
            HalfEdge {
                length: 0.5 * len,
                normal: Vec2::new(d.y, -d.x) / len,
            }
        };
        let e01 = edge(v[0], v[1]);
        let e12 = edge(v[1], v[2]);
        let e20 = edge(v[2], v[0]);
        Self {
            volume: cell_volume(v),
            centroid: centroid(v),
            corner: [
                corner_vector(v, 0),
                corner_vector(v, 1),
                corner_vector(v, 2),
            ],
            half_edges: [[e20, e01], [e01, e12], [e12, e20]],
            char_length: characteristic_length(v),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeshGeometry {
    pub cells: Vec<CellGeometry>,
}

impl MeshGeometry {
    /// Recomputes all cell quantities from node positions; tangled cells are an error.
    pub fn compute(topology: &MeshTopology, coords: &[Vec2]) -> Result<Self, MeshError> {
        let cells: Vec<CellGeometry> = topology
            .cells
            .par_iter()
            .map(|tri| {
                CellGeometry::from_vertices(&[coords[tri[0]], coords[tri[1]], coords[tri[2]]])
            })
            .collect();
        if let Some((cell, g)) = cells.iter().enumerate().find(|(_, g)| !(g.volume > 0.0)) {
            return Err(MeshError::InvertedCell {
                cell,
                volume: g.volume,
            });
        }
        Ok(Self { cells })
    }

    pub fn min_char_length(&self) -> f64 {
        self.cells
            .iter()
            .map(|g| g.char_length)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|g| g.volume).sum()
    }
}

pub fn cell_vertices(topology: &MeshTopology, coords: &[Vec2], cell: usize) -> [Vec2; 3] {
    let t = topology.cells[cell];
    [coords[t[0]], coords[t[1]], coords[t[2]]]
}

/// Lagrangian masses, fixed at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MassPartition {
    pub cell_mass: Vec<f64>,
    pub subcell_mass: Vec<[f64; 3]>,
    pub node_mass: Vec<f64>,
}

impl MassPartition {
    pub fn new(topology: &MeshTopology, coords: &[Vec2], rho0: &[f64]) -> Result<Self, MeshError> {
        let mut subcell_mass = Vec::with_capacity(topology.num_cells());
        let mut cell_mass = Vec::with_capacity(topology.num_cells());
        let mut node_mass = vec![0.0; topology.num_nodes];
        for (c, tri) in topology.cells.iter().enumerate() {
            let v = cell_vertices(topology, coords, c);
            let mut m = [0.0; 3];
            for k in 0..3 {
                let vol = subcell_volume(&v, k);
                if !(vol > 0.0) {
                    return Err(MeshError::InvertedSubcell { cell: c, local: k });
                }
                m[k] = rho0[c] * vol;
                node_mass[tri[k]] += m[k];
            }
            cell_mass.push(m[0] + m[1] + m[2]);
            subcell_mass.push(m);
        }
        Ok(Self {
            cell_mass,
            subcell_mass,
            node_mass,
        })
    }

    pub fn total(&self) -> f64 {
        self.cell_mass.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn unit() -> [Vec2; 3] {
        [v(0., 0.), v(1., 0.), v(0., 1.)]
    }

    #[test]
    fn unit_triangle_corner_vectors() {
        let t = unit();
        assert_eq!(corner_vector(&t, 0), v(-0.5, -0.5));
        assert_eq!(corner_vector(&t, 1), v(0.5, 0.0));
        assert_eq!(corner_vector(&t, 2), v(0.0, 0.5));
    }

    #[test]
    fn corner_vectors_match_finite_differences_of_area() {
        let t = [v(0.1, 0.2), v(1.3, -0.1), v(0.4, 0.9)];
        let h = 1e-6;
        for k in 0..3 {
            let mut g = Vec2::zeros();
            for d in 0..2 {
                let mut plus = t;
                let mut minus = t;
                plus[k][d] += h;
                minus[k][d] -= h;
                g[d] = (cell_volume(&plus) - cell_volume(&minus)) / (2.0 * h);
            }
            assert!((g - corner_vector(&t, k)).norm() < 1e-9);
        }
    }

    #[test]
    fn volumes() {
        assert_eq!(cell_volume(&unit()), 0.5);
        let scaled: Vec<Vec2> = unit().iter().map(|p| p * 2.0).collect();
        assert_eq!(cell_volume(&scaled), 2.0);
    }

    #[test]
    fn characteristic_lengths() {
        assert!((characteristic_length(&unit()) - (2.0 - 2f64.sqrt())).abs() < 1e-14);
        let eq = [v(0., 0.), v(1., 0.), v(0.5, 3f64.sqrt() / 2.0)];
        assert!((characteristic_length(&eq) - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        let big = [v(0., 0.), v(3., 0.), v(0., 3.)];
        assert!((characteristic_length(&big) - 3.0 * characteristic_length(&unit())).abs() < 1e-14);
    }

    #[test]
    fn uniform_density_subcells_carry_a_third() {
        let t = [v(0.1, 0.2), v(1.3, -0.1), v(0.4, 0.9)];
        let a = cell_volume(&t);
        for k in 0..3 {
            assert!((subcell_volume(&t, k) - a / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn half_edges_reassemble_corner_vectors() {
        let g = CellGeometry::from_vertices(&[v(0.1, 0.2), v(1.3, -0.1), v(0.4, 0.9)]);
        for k in 0..3 {
            let s: Vec2 = g.half_edges[k].iter().map(|h| h.normal * h.length).sum();
            assert!((s - g.corner[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn two_cell_node_mass() {
        let coords = [v(0., 0.), v(1., 0.), v(0., 1.), v(1., 1.)];
        let t = MeshTopology::build(&coords, &[[0, 1, 2], [1, 3, 2]]).unwrap();
        let m = MassPartition::new(&t, &coords, &[2.0, 3.0]).unwrap();
        assert!((m.cell_mass[0] - 2.0 * 0.5).abs() < 1e-15);
        assert!((m.cell_mass[1] - 3.0 * 0.5).abs() < 1e-15);
        let l0 = t.local_index(0, 1).unwrap();
        let l1 = t.local_index(1, 1).unwrap();
        assert_eq!(
            m.node_mass[1],
            m.subcell_mass[0][l0] + m.subcell_mass[1][l1]
        );
    }

    proptest! {
        #[test]
        fn corner_closure_and_translation_invariance(
            pts in proptest::array::uniform6(-10.0f64..10.0), dx in -5.0f64..5.0, dy in -5.0f64..5.0
        ) {
            let mut t = [v(pts[0], pts[1]), v(pts[2], pts[3]), v(pts[4], pts[5])];
            let a = cell_volume(&t);
            prop_assume!(a.abs() > 1e-3);
            if a < 0.0 { t.swap(1, 2); }
            let perimeter = (t[1]-t[0]).norm() + (t[2]-t[1]).norm() + (t[0]-t[2]).norm();
            let sum: Vec2 = (0..3).map(|k| corner_vector(&t, k)).sum();
            prop_assert!(sum.norm() <= 1e-12 * perimeter);
            let shifted = t.map(|p| p + v(dx, dy));
            for k in 0..3 {
                prop_assert!((corner_vector(&shifted, k) - corner_vector(&t, k)).norm() <= 1e-12 * perimeter);
            }
            // Half cross-product oracle.
            let oracle = 0.5 * ((t[1]-t[0]).x * (t[2]-t[0]).y - (t[1]-t[0]).y * (t[2]-t[0]).x).abs();
            prop_assert!((cell_volume(&t) - oracle).abs() <= 1e-12 * oracle.max(1.0));
        }
    }
}
