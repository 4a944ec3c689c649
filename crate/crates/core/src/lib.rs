#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod convex;
pub mod error;
pub mod linalg;
pub mod lmi;
pub mod multiplier;
pub mod sim;
pub mod solver;
pub mod statespace;

pub use error::{IqcError, Result};
