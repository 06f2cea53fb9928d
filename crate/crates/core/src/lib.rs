//! Computational laboratory for the high-energy limit of Laplace- and
//! Dirac-type operators on vector bundles over model manifolds.

pub mod algebra;
pub mod combinatorics;
pub mod error;
pub mod flows;
pub mod geometry;
pub mod limits;
pub mod linalg;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use nalgebra;
pub use num_complex;
