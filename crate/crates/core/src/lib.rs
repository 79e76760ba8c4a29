//! Minimum line-guard allocation for monotone sweep schedules.
//!
//! The pipeline decomposes a polygonal workspace into cells along a sweep
//! schedule, builds a DAG of cells, and solves a minimum flow with demands on
//! it to find how many probabilistic line guards are needed to keep every
//! point covered with probability at least `rho0` when the frontier passes.

pub mod error;
pub mod allocation;
pub mod cli;
pub mod decomposition;
pub mod flow;
pub mod geometry;
pub mod sensing;
pub mod validation;

pub use error::{Error, Result};
