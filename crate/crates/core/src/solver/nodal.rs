//! Subcell matrices, the nodal balance and subcell forces.

use crate::mesh::{HalfEdge, MeshGeometry, MeshTopology};
use crate::reconstruct::Predictor;
use crate::tensor::{in_plane, Mat2, Mat3, Vec2};

/// `M_cp = z Σ l n⊗n` over the two half-edges of the corner.
pub fn subcell_matrix(z: f64, half_edges: &[HalfEdge; 2]) -> Mat2 {
    half_edges
        .iter()
        .map(|h| h.normal * h.normal.transpose() * (z * h.length))
        .sum()
}

/// `f_cp = T (ln) + M_cp (v_p − v_cp)`.
pub fn subcell_force(t: &Mat3, ln: Vec2, m: &Mat2, v_p: Vec2, v_c: Vec2) -> Vec2 {
    in_plane(t) * ln + m * (v_p - v_c)
}

/// `(v_p − v_c)ᵀ M_cp (v_p − v_c)` written as a sum of squares so that it
/// cannot round below zero.
pub fn corner_entropy(z: f64, half_edges: &[HalfEdge; 2], dv: Vec2) -> f64 {
    half_edges
        .iter()
        .map(|h| z * h.length * h.normal.dot(&dv).powi(2))
        .sum()
}

/// `M_p` and `Σ_c (M_cp v_cp − T_cp (ln)_cp)` at one node.
pub fn nodal_balance(
    topo: &MeshTopology,
    geom: &MeshGeometry,
    preds: &[Predictor],
    node: usize,
) -> (Mat2, Vec2) {
    let mut m = Mat2::zeros();
    let mut rhs = Vec2::zeros();
    for &c in &topo.node_to_cells[node] {
        let k = topo
            .local_index(c, node)
            .expect("node belongs to its cells");
        let g = &geom.cells[c];
        let pred = &preds[c];
        let mcp = subcell_matrix(pred.z, &g.half_edges[k]);
        m += mcp;
        rhs += mcp * pred.corner_v[k] - in_plane(&pred.corner_t[k]) * g.corner[k];
    }
    (m, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate::rectangle, Mesh};
    use crate::solver::state::CellState;
    use crate::tensor::Vec2;

    fn pred(v: Vec2, t: Mat3, z: f64) -> Predictor {
        let state = CellState {
            tau: 1.0,
            v,
            e: 1.0,
            b: Mat3::identity(),
        };
        Predictor {
            state,
            corner_v: [v; 3],
            corner_t: [t; 3],
            z,
            x_star: [Vec2::zeros(); 3],
            ok: true,
        }
    }

    #[test]
    fn rank_one_matrix() {
        let h = HalfEdge {
            length: 1.0,
            normal: Vec2::new(1.0, 0.0),
        };
        let m = subcell_matrix(3.0, &[h, h]);
        assert_eq!(m, Mat2::new(6.0, 0.0, 0.0, 0.0));
    }

    /// Four triangles around the centre of a square.
    fn patch() -> Mesh {
        let coords = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.5, 0.5),
        ];
        let cells = [[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]];
        Mesh::new(coords, &cells, &[] as &[(usize, usize, &str)]).unwrap()
    }

    #[test]
    fn symmetric_patch_gives_isotropic_matrix() {
        let mesh = patch();
        let g = mesh.geometry().unwrap();
        let preds = vec![pred(Vec2::zeros(), Mat3::zeros(), 2.0); 4];
        let (m, _) = nodal_balance(&mesh.topology, &g, &preds, 4);
        assert!((m[(0, 1)]).abs() < 1e-15);
        assert!((m[(0, 0)] - m[(1, 1)]).abs() < 1e-14);
        assert!(m[(0, 0)] > 0.0);
    }

    #[test]
    fn uniform_flow_gives_common_velocity() {
        let mesh = rectangle(0.0, 1.0, 0.0, 1.0, 3, 3).unwrap();
        let g = mesh.geometry().unwrap();
        let v0 = Vec2::new(0.3, -1.2);
        let t = Mat3::new(-2.0, 0.5, 0.0, 0.5, -1.0, 0.0, 0.0, 0.0, -1.5);
        let preds = vec![pred(v0, t, 7.0); mesh.topology.num_cells()];
        for p in 0..mesh.coords.len() {
            if mesh.topology.node_boundary_faces[p].is_empty() {
                let (m, rhs) = nodal_balance(&mesh.topology, &g, &preds, p);
                let v = m.try_inverse().unwrap() * rhs;
                assert!((v - v0).norm() < 1e-14);
                let sum: Vec2 = mesh.topology.node_to_cells[p]
                    .iter()
                    .map(|&c| {
                        let k = mesh.topology.local_index(c, p).unwrap();
                        let mcp = subcell_matrix(7.0, &g.cells[c].half_edges[k]);
                        subcell_force(&t, g.cells[c].corner[k], &mcp, v, v0)
                    })
                    .sum();
                assert!(sum.norm() < 1e-13);
            }
        }
    }

    /// Two cells meeting at a flat interface x = 0 with the node on it.
    fn interface() -> Mesh {
        let coords = vec![
            Vec2::new(0.0, -1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(-1.0, 0.0),
            Vec2::new(1.0, 0.0),
        ];
        Mesh::new(
            coords,
            &[[0, 1, 2], [1, 0, 3]],
            &[] as &[(usize, usize, &str)],
        )
        .unwrap()
    }

    #[test]
    fn opposing_velocities_stop_the_interface() {
        let mesh = interface();
        let g = mesh.geometry().unwrap();
        let u = 0.7;
        // left cell moves right, right cell moves left; shared normal is x
        let preds = vec![
            pred(Vec2::new(u, 0.0), Mat3::zeros(), 2.0),
            pred(Vec2::new(-u, 0.0), Mat3::zeros(), 2.0),
        ];
        for p in [0, 1] {
            let (m, rhs) = nodal_balance(&mesh.topology, &g, &preds, p);
            // the node also sees the outer edges; restrict to the interface normal
            let n = Vec2::x();
            let vx = (m.try_inverse().unwrap() * rhs).dot(&n);
            assert!(vx.abs() < 1e-15, "{vx}");
        }
    }

    #[test]
    fn acoustic_relation_for_a_pressure_jump() {
        // a flat interface with a pressure jump and no velocity: solve only the
        // normal balance on the shared face, which is what a 1D Riemann solve sees
        let z = 3.0;
        let (pl, pr) = (2.0, 1.0);
        let l = 1.0;
        let n = Vec2::x();
        let hl = HalfEdge {
            length: l,
            normal: n,
        };
        let hr = HalfEdge {
            length: l,
            normal: -n,
        };
        let mcl = subcell_matrix(z, &[hl, hl]) * 0.5;
        let mcr = subcell_matrix(z, &[hr, hr]) * 0.5;
        let tl = Mat3::identity() * -pl;
        let tr = Mat3::identity() * -pr;
        let m = mcl + mcr;
        let rhs = -(in_plane(&tl) * (n * l)) - in_plane(&tr) * (-n * l);
        let vn = rhs.x / m[(0, 0)];
        assert!((vn - (pl - pr) / (2.0 * z)).abs() < 1e-15);
    }

    #[test]
    fn entropy_matches_quadratic_form() {
        let h = [
            HalfEdge {
                length: 0.3,
                normal: Vec2::new(0.6, 0.8),
            },
            HalfEdge {
                length: 0.5,
                normal: Vec2::new(-1.0, 0.0),
            },
        ];
        let dv = Vec2::new(0.2, -1.1);
        let m = subcell_matrix(4.0, &h);
        assert!((corner_entropy(4.0, &h, dv) - dv.dot(&(m * dv))).abs() < 1e-15);
    }
}
