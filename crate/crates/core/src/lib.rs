//! Discrete analysis of closed surfaces immersed in R^n: second fundamental
//! form, Willmore energy, monotonicity quantities, sphere fitting, conformal
//! parametrization and rigidity estimates.

pub mod config;
pub mod conformal;
pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod linalg;
pub mod mesh;
pub mod monotonicity;
pub mod pipeline;
pub mod quadrature;
pub mod report;
pub mod rigidity;
pub mod spherefit;
pub mod surfgen;
pub mod verify;

pub use error::{Error, Result};
pub use mesh::EmbeddedMesh;
