//! Estimation of a qubit's visibility and population imbalance when its phase is
//! an unknown nuisance parameter.
//!
//! The crate computes Fisher information matrices, the hierarchy of weighted-MSE
//! bounds, the optimal separable measurement, MSE-region predicates, and a
//! Monte-Carlo engine that checks attainability.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod fisher;
pub mod linalg;
pub mod model;
pub mod povm;
pub mod region;
pub mod report;
pub mod simulate;

pub use error::{QestError, Result};
pub use model::ThetaParams;
