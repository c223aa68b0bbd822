//! Numerical verification of Hamiltonian stationary self-similar solutions
//! of Lagrangian mean curvature flow in ℂⁿ, and of the Brakke-flow gluing
//! that passes through their cone singularities.

pub mod brakke;
pub mod checks;
pub mod complex_space;
pub mod cone_geometry;
pub mod error;
pub mod immersions;
pub mod jets;
pub mod lagrangian_calculus;
pub mod par;
pub mod quadrature;
pub mod report_io;

pub use error::{Error, Result};
