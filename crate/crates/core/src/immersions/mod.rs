//! Parametrized immersions into ℂⁿ.
//!
//! [`CatalogImmersion`] covers every named object of the construction: the
//! Legendrian curve, the four cones, the shrinker/expander pair with their
//! time-scaled families and parity-adjusted gluings, the t → 0 limit
//! varifolds, and the higher-dimensional λ-family. [`controls`] holds a few
//! surfaces that deliberately fail one of the properties, for negative tests.

mod catalog;
pub mod controls;
mod params;

pub use catalog::{CatalogImmersion, GeometryReference, Kind, RadialProfile};
pub use params::{self_similar_constant, ConeParams, LambdaChart, LambdaParams, ParityCase, Sign};

use crate::complex_space::ComplexPoint;
use crate::error::Result;
use crate::jets::{Jet2, JetPoint};
use crate::lagrangian_calculus::Frame;

/// A map from a k-dimensional parameter domain into ℂⁿ.
pub trait Immersion: Send + Sync {
    fn name(&self) -> String;

    /// k
    fn domain_dim(&self) -> usize;

    /// n
    fn ambient_dim(&self) -> usize;

    fn evaluate(&self, params: &[f64]) -> Result<ComplexPoint>;

    fn evaluate_jet(&self, params: &[f64]) -> Result<JetPoint>;

    /// Position and first-order tangent frame. The default goes through the
    /// full 2-jet; implementors may provide a cheaper first-order path.
    fn frame(&self, params: &[f64]) -> Result<Frame> {
        let jet = self.evaluate_jet(params)?;
        Ok(Frame::from_jet(&jet))
    }

    /// Closed-form 2-jet of the Lagrangian angle, when one is known.
    fn beta_jet(&self, _params: &[f64]) -> Option<Result<Jet2>> {
        None
    }
}
