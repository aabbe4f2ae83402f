use thiserror::Error;

/// Errors raised while building or moving a mesh.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("mesh has no cells")]
    Empty,
    #[error("cell {cell} references node {node} but only {num_nodes} nodes exist")]
    IndexOutOfRange {
        cell: usize,
        node: usize,
        num_nodes: usize,
    },
    #[error("cell {cell} repeats vertex {node}")]
    DegenerateCell { cell: usize, node: usize },
    #[error("cells {first} and {second} have the same vertex set")]
    DuplicateCell { first: usize, second: usize },
    #[error("face ({0}, {1}) is shared by more than two cells")]
    NonManifoldFace(usize, usize),
    #[error("cell {cell} has non-positive volume {volume:e}")]
    InvertedCell { cell: usize, volume: f64 },
    #[error("subcell ({cell}, local vertex {local}) has non-positive volume")]
    InvertedSubcell { cell: usize, local: usize },
    #[error("boundary face ({0}, {1}) is not a boundary edge of the mesh")]
    UnknownBoundaryFace(usize, usize),
    #[error("mesh parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Errors raised by constitutive evaluations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("non-positive Jacobian J = {0:e}")]
    NonPositiveJacobian(f64),
    #[error("left Cauchy-Green tensor is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("invalid material parameter: {0}")]
    InvalidParameter(String),
}

/// Errors raised while running the scheme.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("nodal matrix at node {node} is singular")]
    SingularNodalMatrix { node: usize },
    #[error("contradictory boundary conditions at node {node}")]
    ContradictoryBc { node: usize },
    #[error("non-finite state in cell {cell} at parachute level (t = {time:e})")]
    ParachuteFailure { cell: usize, time: f64 },
    #[error("invalid time step {dt:e} at t = {time:e}")]
    InvalidTimeStep { dt: f64, time: f64 },
    #[error("cell {cell} tangled at t = {time:e} (volume {volume:e})")]
    TangledCell { cell: usize, time: f64, volume: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = SolverError> = std::result::Result<T, E>;
