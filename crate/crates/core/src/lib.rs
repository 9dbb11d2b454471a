#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod bounds;
pub mod cli;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod initial_data;
pub mod model;
pub mod operators;
pub mod quadrature;
pub mod scenario;
pub mod solver;

pub use error::{Error, Result};
