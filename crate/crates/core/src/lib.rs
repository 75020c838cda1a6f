//! Analysis of two-way contingency and compositional tables.
//!
//! The crate computes and compares bilinear decompositions of a table's
//! interaction structure: correspondence analysis (CA), taxicab CA, their
//! marginal-free variants on the IPF-adjusted table with uniform margins,
//! Tucker-style covariance analysis, and log-ratio analysis with marginal or
//! uniform weights. Both an L2 (SVD) and an L1 (taxicab) factorization engine
//! are provided, together with CSV input, coordinate/dispersion output, and
//! SVG symmetric maps.

pub mod cli_io;
pub mod decomposition;
pub mod error;
pub mod interactions;
pub mod margin_fit;
pub mod pipelines;
pub mod tables;

pub use error::{Error, Result};
