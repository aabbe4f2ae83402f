// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constitutive;
pub mod driver;
pub mod error;
pub mod mesh;
pub mod mood;
pub mod reconstruct;
pub mod solver;
pub mod tensor;
