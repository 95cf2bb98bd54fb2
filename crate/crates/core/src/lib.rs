//! Numerical laboratory for nonlocal perimeters of binary classifiers.

pub mod adversarial;
pub mod error;
pub mod gammalab;
pub mod geometry;
pub mod graph;
pub mod limit;
pub mod nonlocal;
pub mod report;
pub mod scenario;
pub mod sum;

pub use error::{Error, Result};
