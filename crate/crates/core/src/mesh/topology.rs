//! Connectivity of a 2D simplicial mesh: P(c), C(p), F(c) and boundary faces.

use std::collections::HashMap;

use crate::error::MeshError;
use crate::tensor::{cross, Vec2};

/// Marker for the missing second cell of a boundary face.
pub const NO_CELL: usize = usize::MAX;

/// Tag given to boundary faces the mesh file does not mention.
pub const DEFAULT_TAG: &str = "boundary";

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub nodes: [usize; 2],
    /// Incident cells; `cells[1] == NO_CELL` on the boundary.
    pub cells: [usize; 2],
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.cells[1] == NO_CELL
    }

    /// The cell across this face from `cell`, if any.
    pub fn other(&self, cell: usize) -> Option<usize> {
        let o = if self.cells[0] == cell {
            self.cells[1]
        } else {
            self.cells[0]
        };
        (o != NO_CELL).then_some(o)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFace {
    pub face: usize,
    /// Boundary edge nodes in the counterclockwise order of the owning cell.
    pub nodes: [usize; 2],
    pub cell: usize,
    pub tag: String,
}

#[derive(Debug, Clone)]
pub struct MeshTopology {
    pub num_nodes: usize,
    /// Vertex triples ordered counterclockwise.
    pub cells: Vec<[usize; 3]>,
    /// C(p): cells sharing node p, in increasing cell order.
    pub node_to_cells: Vec<Vec<usize>>,
    /// F(c): face `k` joins local vertices `k` and `k + 1`.
    pub cell_to_faces: Vec<[usize; 3]>,
    pub faces: Vec<Face>,
    pub boundary_faces: Vec<BoundaryFace>,
    /// Indices into `boundary_faces` for every node.
    pub node_boundary_faces: Vec<Vec<usize>>,
    /// Cells sharing at least one node with the cell, sorted, excluding itself.
    pub vertex_neighbors: Vec<Vec<usize>>,
}

impl MeshTopology {
    /// Builds every adjacency set from the cell vertex lists.
    ///
    /// Clockwise cells are flipped to counterclockwise order. Degenerate,
    /// duplicated or zero-area cells and faces with more than two incident
    /// cells are rejected.
    pub fn build(coords: &[Vec2], cell_vertices: &[[usize; 3]]) -> Result<Self, MeshError> {
        if cell_vertices.is_empty() {
            return Err(MeshError::Empty);
        }
        let num_nodes = coords.len();
        let mut cells = Vec::with_capacity(cell_vertices.len());
        let mut seen: HashMap<[usize; 3], usize> = HashMap::new();
        let mut flipped = 0usize;
        for (c, tri) in cell_vertices.iter().enumerate() {
            for &p in tri {
                if p >= num_nodes {
                    return Err(MeshError::IndexOutOfRange {
                        cell: c,
                        node: p,
                        num_nodes,
                    });
                }
            }
            if tri[0] == tri[1] || tri[0] == tri[2] {
                return Err(MeshError::DegenerateCell {
                    cell: c,
                    node: tri[0],
                });
            }
            if tri[1] == tri[2] {
                return Err(MeshError::DegenerateCell {
                    cell: c,
                    node: tri[1],
                });
            }
            let mut key = *tri;
            key.sort_unstable();
            if let Some(&first) = seen.get(&key) {
                return Err(MeshError::DuplicateCell { first, second: c });
            }
            seen.insert(key, c);
            let [a, b, d] = *tri;
            let area2 = cross(coords[b] - coords[a], coords[d] - coords[a]);
            if area2 == 0.0 || !area2.is_finite() {
                return Err(MeshError::InvertedCell {
                    cell: c,
                    volume: 0.5 * area2,
                });
            }
            if area2 < 0.0 {
                flipped += 1;
                cells.push([a, d, b]);
            } else {
                cells.push(*tri);
            }
        }
        if flipped > 0 {
            log::info!("reoriented {flipped} clockwise cells to counterclockwise order");
        }

        let mut node_to_cells = vec![Vec::new(); num_nodes];
        for (c, tri) in cells.iter().enumerate() {
            for &p in tri {
                node_to_cells[p].push(c);
            }
        }

        let mut faces: Vec<Face> = Vec::new();
        let mut face_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cell_to_faces = Vec::with_capacity(cells.len());
        for (c, tri) in cells.iter().enumerate() {
            let mut cf = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                match face_index.get(&key) {
                    Some(&f) => {
                        if faces[f].cells[1] != NO_CELL {
                            return Err(MeshError::NonManifoldFace(key.0, key.1));
                        }
                        faces[f].cells[1] = c;
                        cf[k] = f;
                    }
                    None => {
                        face_index.insert(key, faces.len());
                        cf[k] = faces.len();
                        faces.push(Face {
                            nodes: [a, b],
                            cells: [c, NO_CELL],
                        });
                    }
                }
            }
            cell_to_faces.push(cf);
        }

        let mut boundary_faces = Vec::new();
        let mut node_boundary_faces = vec![Vec::new(); num_nodes];
        for (f, face) in faces.iter().enumerate() {
            if face.is_boundary() {
                let i = boundary_faces.len();
                node_boundary_faces[face.nodes[0]].push(i);
                node_boundary_faces[face.nodes[1]].push(i);
                boundary_faces.push(BoundaryFace {
                    face: f,
                    nodes: face.nodes,
                    cell: face.cells[0],
                    tag: DEFAULT_TAG.to_string(),
                });
            }
        }

        let vertex_neighbors = cells
            .iter()
            .enumerate()
            .map(|(c, tri)| {
                let mut v: Vec<usize> = tri
                    .iter()
                    .flat_map(|&p| node_to_cells[p].iter().copied())
                    .filter(|&j| j != c)
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();

        Ok(Self {
            num_nodes,
            cells,
            node_to_cells,
            cell_to_faces,
            faces,
            boundary_faces,
            node_boundary_faces,
            vertex_neighbors,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Assigns boundary tags from `(n1, n2, tag)` triples; orientation of the pair is ignored.
    pub fn assign_tags<S: AsRef<str>>(
        &mut self,
        tagged: &[(usize, usize, S)],
    ) -> Result<(), MeshError> {
        let lookup: HashMap<(usize, usize), usize> = self
            .boundary_faces
            .iter()
            .enumerate()
            .map(|(i, bf)| {
                (
                    (bf.nodes[0].min(bf.nodes[1]), bf.nodes[0].max(bf.nodes[1])),
                    i,
                )
            })
            .collect();
        for (a, b, tag) in tagged {
            let key = ((*a).min(*b), (*a).max(*b));
            let i = *lookup
                .get(&key)
                .ok_or(MeshError::UnknownBoundaryFace(*a, *b))?;
            self.boundary_faces[i].tag = tag.as_ref().to_string();
        }
        Ok(())
    }

    /// Face (von Neumann) neighbours of a cell.
    pub fn neighbors(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        self.cell_to_faces[cell]
            .iter()
            .filter_map(move |&f| self.faces[f].other(cell))
    }

    /// Reconstruction and RDMP stencil.
    pub fn stencil(&self, cell: usize) -> &[usize] {
        &self.vertex_neighbors[cell]
    }

    /// Local position of `node` in `cell`.
    pub fn local_index(&self, cell: usize, node: usize) -> Option<usize> {
        self.cells[cell].iter().position(|&p| p == node)
    }

    /// Number of distinct edges (faces in 2D).
    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// V - E + F over nodes actually referenced by cells.
    pub fn euler_characteristic(&self) -> i64 {
        let used = self.node_to_cells.iter().filter(|c| !c.is_empty()).count() as i64;
        used - self.faces.len() as i64 + self.cells.len() as i64
    }

    /// Sorted, deduplicated list of boundary tags.
    pub fn tags(&self) -> Vec<String> {
        let mut t: Vec<String> = self.boundary_faces.iter().map(|b| b.tag.clone()).collect();
        t.sort();
        t.dedup();
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn single_triangle() {
        let coords = [v(0., 0.), v(1., 0.), v(0., 1.)];
        let t = MeshTopology::build(&coords, &[[0, 1, 2]]).unwrap();
        assert_eq!(t.boundary_faces.len(), 3);
        for p in 0..3 {
            assert_eq!(t.node_to_cells[p].len(), 1);
        }
    }

    #[test]
    fn two_triangles_share_an_interior_face() {
        let coords = [v(0., 0.), v(1., 0.), v(0., 1.), v(1., 1.)];
        let t = MeshTopology::build(&coords, &[[0, 1, 2], [1, 3, 2]]).unwrap();
        assert_eq!(t.faces.len(), 5);
        assert_eq!(t.boundary_faces.len(), 4);
        let interior: Vec<_> = t.faces.iter().filter(|f| !f.is_boundary()).collect();
        assert_eq!(interior.len(), 1);
        let mut n = interior[0].nodes;
        n.sort();
        assert_eq!(n, [1, 2]);
        assert_eq!(t.node_to_cells[1].len(), 2);
        assert_eq!(t.node_to_cells[2].len(), 2);
        assert_eq!(t.neighbors(0).collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn clockwise_cells_are_reoriented() {
        let coords = [v(0., 0.), v(1., 0.), v(0., 1.)];
        let t = MeshTopology::build(&coords, &[[0, 2, 1]]).unwrap();
        let [a, b, c] = t.cells[0];
        assert!(cross(coords[b] - coords[a], coords[c] - coords[a]) > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let coords = [v(0., 0.), v(1., 0.), v(0., 1.), v(1., 1.), v(0.5, -1.0)];
        assert_eq!(
            MeshTopology::build(&coords, &[]).unwrap_err(),
            MeshError::Empty
        );
        assert!(matches!(
            MeshTopology::build(&coords, &[[0, 0, 1]]),
            Err(MeshError::DegenerateCell { .. })
        ));
        assert!(matches!(
            MeshTopology::build(&coords, &[[0, 1, 9]]),
            Err(MeshError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            MeshTopology::build(&coords, &[[0, 1, 2], [2, 1, 0]]),
            Err(MeshError::DuplicateCell { .. })
        ));
        // Three triangles on edge (0, 1).
        assert!(matches!(
            MeshTopology::build(&coords, &[[0, 1, 2], [1, 0, 4], [0, 1, 3]]),
            Err(MeshError::NonManifoldFace(0, 1))
        ));
    }

    #[test]
    fn adjacency_sets_are_mutually_consistent() {
        let m = crate::mesh::generate::rectangle(0.0, 1.0, 0.0, 1.0, 5, 4).unwrap();
        let t = &m.topology;
        for (c, tri) in t.cells.iter().enumerate() {
            for &p in tri {
                assert!(t.node_to_cells[p].contains(&c));
            }
        }
        for (p, cs) in t.node_to_cells.iter().enumerate() {
            for &c in cs {
                assert!(t.cells[c].contains(&p));
            }
        }
        for f in &t.faces {
            let n = f.cells.iter().filter(|&&c| c != NO_CELL).count();
            assert!(n == 1 || n == 2);
        }
    }

    #[test]
    fn euler_formula_on_split_grids() {
        for n in 1..8 {
            let m = crate::mesh::generate::rectangle(0.0, 1.0, 0.0, 1.0, n, n).unwrap();
            let t = &m.topology;
            // Count entities from scratch.
            let mut edges = std::collections::HashSet::new();
            for tri in &t.cells {
                for k in 0..3 {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    edges.insert((a.min(b), a.max(b)));
                }
            }
            let v = (n + 1) * (n + 1);
            assert_eq!(edges.len(), t.num_faces());
            assert_eq!(v as i64 - edges.len() as i64 + t.num_cells() as i64, 1);
            assert_eq!(t.euler_characteristic(), 1);
        }
    }

    #[test]
    fn stencil_is_vertex_neighbourhood() {
        let mesh = crate::mesh::generate::rectangle(0.0, 1.0, 0.0, 1.0, 3, 3).unwrap();
        let t = &mesh.topology;
        for c in 0..t.num_cells() {
            let st = t.stencil(c);
            assert!(!st.contains(&c));
            assert!(st.windows(2).all(|w| w[0] < w[1]));
            assert!(t.neighbors(c).all(|f| st.contains(&f)));
            for &j in st {
                assert!(t.cells[c].iter().any(|p| t.cells[j].contains(p)));
                assert!(t.stencil(j).contains(&c));
            }
        }
        assert!((0..t.num_cells()).any(|c| t.stencil(c).len() > 3));
    }
}
