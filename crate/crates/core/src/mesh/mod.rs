//! Unstructured triangle meshes: connectivity, moving geometry, mass
//! partition, refinement and file formats.

pub mod generate;
pub mod geometry;
pub mod io;
pub mod refine;
pub mod topology;

pub use geometry::{
    cell_volume, centroid, characteristic_length, corner_vector, subcell_volume, CellGeometry,
    HalfEdge, MassPartition, MeshGeometry,
};
pub use refine::refine_all;
pub use topology::{BoundaryFace, Face, MeshTopology, DEFAULT_TAG, NO_CELL};

use crate::error::MeshError;
use crate::tensor::Vec2;

/// Connectivity plus node positions in the reference (t = 0) configuration.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub topology: MeshTopology,
    pub coords: Vec<Vec2>,
}

impl Mesh {
    pub fn new<S: AsRef<str>>(
        coords: Vec<Vec2>,
        cells: &[[usize; 3]],
        boundary: &[(usize, usize, S)],
    ) -> Result<Self, MeshError> {
        let mut topology = MeshTopology::build(&coords, cells)?;
        topology.assign_tags(boundary)?;
        Ok(Self { topology, coords })
    }

    pub fn geometry(&self) -> Result<MeshGeometry, MeshError> {
        MeshGeometry::compute(&self.topology, &self.coords)
    }

    /// Boundary edges with their tags, as `(n1, n2, tag)`.
    pub fn tagged_boundary(&self) -> Vec<(usize, usize, String)> {
        self.topology
            .boundary_faces
            .iter()
            .map(|b| (b.nodes[0], b.nodes[1], b.tag.clone()))
            .collect()
    }
}
