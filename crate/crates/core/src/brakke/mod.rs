//! Brakke-flow bookkeeping for the glued shrinker/expander families.
//!
//! Masses and first variations are surface integrals over the exact
//! support of the test function. The time derivative of mass comes from
//! finite differences, t → 0 limits from extrapolation along a geometric
//! sequence, and the φ(0) > 0 case from a logarithmic growth fit.

mod boundary;
mod flow;
mod integrals;
mod suite;
mod test_function;

pub use boundary::{
    boundary_cancellation, boundary_first_variation, default_fields, BoundaryField, BoundaryTerm,
    ConjugatePowerField, PolynomialField, BOUNDARY_NODES,
};
pub use flow::{
    classify_divergence, classify_limit_divergence, fit_log_growth, limit_first_variation, limit_match,
    limit_target, mass_time_derivative, reduced_model, Derivative, DivergenceClass, DivergenceConfig,
    DivergenceReport, GrowthFit, LimitConfig, LimitMatch, Side, MIN_TIME, STEP_FRACTION,
};
pub use integrals::{
    first_variation, h_density_constant, h_density_deviation, mass, reaches_origin, surface_integrals,
    surface_integrals_on, FirstVariation, Integral, SurfaceIntegrals,
};
pub use suite::{
    brakke_reports, theorem_families, theorem_suite, BrakkeReport, SideReport, SuiteConfig, Theorem, TheoremFamilies,
    TheoremReport,
};
pub use test_function::{TestFunction, TestFunctionKind};

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    /// Fail dominates, then inconclusive.
    pub fn combine(self, other: Status) -> Status {
        self.max(other)
    }

    pub fn all(it: impl IntoIterator<Item = Status>) -> Status {
        it.into_iter().fold(Status::Pass, Status::combine)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Inconclusive => "inconclusive",
            Status::Fail => "fail",
        }
    }
}

/// One checked quantity with the tolerance it was held to.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub criterion: String,
    pub status: Status,
    pub measured: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    /// Passes when measured < tolerance.
    pub fn below(criterion: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            criterion: criterion.into(),
            status: Status::from_bool(measured < tolerance),
            measured,
            tolerance,
            note: None,
        }
    }

    /// Passes when measured > tolerance.
    pub fn above(criterion: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            criterion: criterion.into(),
            status: Status::from_bool(measured > tolerance),
            measured,
            tolerance,
            note: None,
        }
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_aggregation() {
        assert_eq!(Status::all([]), Status::Pass);
        assert_eq!(Status::all([Status::Pass, Status::Inconclusive]), Status::Inconclusive);
        assert_eq!(Status::all([Status::Fail, Status::Inconclusive]), Status::Fail);
    }

    #[test]
    fn nan_never_passes() {
        assert_eq!(Verdict::below("x", f64::NAN, 1.0).status, Status::Fail);
        assert_eq!(Verdict::above("x", f64::NAN, 1.0).status, Status::Fail);
    }
}
