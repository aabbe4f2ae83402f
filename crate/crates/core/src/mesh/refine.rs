//! Uniform quadrisection of every triangle through its edge midpoints.

use std::collections::HashMap;

use super::Mesh;
use crate::error::MeshError;

/// Replaces each triangle by four similar children, sharing midpoints between
/// neighbours so the result stays conforming. Boundary tags are inherited by
/// both halves of a split boundary edge.
pub fn refine_all(mesh: &Mesh) -> Result<Mesh, MeshError> {
    let topo = &mesh.topology;
    let mut coords = mesh.coords.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, coords: &mut Vec<_>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoint.entry(key).or_insert_with(|| {
            coords.push((coords[a] + coords[b]) * 0.5);
            coords.len() - 1
        })
    };
    let mut cells = Vec::with_capacity(4 * topo.num_cells());
    for &[a, b, c] in &topo.cells {
        let ab = mid(a, b, &mut coords);
        let bc = mid(b, c, &mut coords);
        let ca = mid(c, a, &mut coords);
        cells.push([a, ab, ca]);
        cells.push([ab, b, bc]);
        cells.push([ca, bc, c]);
        cells.push([ab, bc, ca]);
    }
    let mut boundary = Vec::with_capacity(2 * topo.boundary_faces.len());
    for bf in &topo.boundary_faces {
        let [a, b] = bf.nodes;
        let m = mid(a, b, &mut coords);
        boundary.push((a, m, bf.tag.clone()));
        boundary.push((m, b, bf.tag.clone()));
    }
    Mesh::new(coords, &cells, &boundary)
}
