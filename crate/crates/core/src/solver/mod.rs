//! Cell-centred Lagrangian corrector: nodal solver, subcell forces,
//! conservative updates, `B` updates and boundary conditions.

pub mod bc;
pub mod nodal;
pub mod state;
pub mod step;
pub mod update;

pub use bc::{BcKind, BoundaryConditions, Constraint, NodeBc, NodeSolution, Wall};
pub use state::{CellState, NVARS};
pub use step::{move_nodes, Candidate, CnVelocity, Order, Problem, SchemeOptions, StepContext};
