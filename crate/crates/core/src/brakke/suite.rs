use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::boundary::{boundary_cancellation, boundary_first_variation, default_fields, BoundaryTerm};
use super::flow::{
    classify_divergence, classify_limit_divergence, limit_match, limit_target, mass_time_derivative, Derivative,
    DivergenceClass, DivergenceConfig, DivergenceReport, LimitConfig, LimitMatch, Side,
};
use super::integrals::{surface_integrals, Integral};
use super::test_function::TestFunction;
use super::{Status, Verdict};
use crate::cone_geometry::{
    asymptotic_cone_pair, asymptotic_witness, image_distance, reparametrization_residual, AsymptoticWitness,
    Reparametrization,
};
use crate::error::{Error, Result};
use crate::immersions::{CatalogImmersion, ConeParams, Kind, ParityCase};
use crate::par::{try_map_with, Execution};
use crate::quadrature::QuadratureConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Theorem {
    /// Full-domain gluing through the union of two cones.
    #[serde(rename = "1.1")]
    Union,
    /// Half-domain gluing through the single cone C₊₊.
    #[serde(rename = "1.2")]
    Single,
}

impl Theorem {
    pub fn as_str(self) -> &'static str {
        match self {
            Theorem::Union => "1.1",
            Theorem::Single => "1.2",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Theorem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1.1" => Ok(Theorem::Union),
            "1.2" => Ok(Theorem::Single),
            _ => Err(Error::InvalidParams(format!("unknown theorem {s:?}; expected 1.1 or 1.2"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    /// |t| at which the smooth-flow identity is checked.
    pub t_ref: f64,
    pub quadrature: QuadratureConfig,
    /// Tighter settings for the masses fed to finite differences.
    pub derivative_quadrature: QuadratureConfig,
    pub flow_tol: f64,
    pub limit: LimitConfig,
    pub divergence: DivergenceConfig,
    pub reduced_model_tol: f64,
    pub targets_tol: f64,
    pub boundary_tol: f64,
    pub cancellation_tol: f64,
    pub image_tol: f64,
    pub reparametrization_tol: f64,
    pub image_samples: usize,
    pub witness_epsilons: Vec<f64>,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            t_ref: 1.0,
            quadrature: QuadratureConfig::default(),
            derivative_quadrature: QuadratureConfig::with_tolerance(1e-10, 1e-14),
            flow_tol: 1e-5,
            limit: LimitConfig::default(),
            divergence: DivergenceConfig::default(),
            reduced_model_tol: 0.1,
            targets_tol: 1e-8,
            boundary_tol: 1e-10,
            cancellation_tol: 1e-12,
            image_tol: 1e-3,
            reparametrization_tol: 1e-12,
            image_samples: 1024,
            witness_epsilons: vec![1e-2, 2.5e-3, 6.25e-4],
            seed: 20_240_601,
            execution: Execution::default(),
        }
    }
}

/// The family used on each side of t = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremFamilies {
    pub left: CatalogImmersion,
    pub right: CatalogImmersion,
}

impl TheoremFamilies {
    pub fn side(&self, side: Side) -> &CatalogImmersion {
        match side {
            Side::Minus => &self.left,
            Side::Plus => &self.right,
        }
    }
}

/// Families at t = ∓t_ref for the parity case of `params`.
pub fn theorem_families(theorem: Theorem, params: ConeParams, t_ref: f64) -> Result<TheoremFamilies> {
    let (lk, rk) = match (theorem, params.parity()) {
        (Theorem::Single, _) => {
            if params.q() == 1 {
                return Err(Error::Precondition(format!(
                    "the single-cone gluing needs q > 1, got (p, q) = ({}, 1)",
                    params.p()
                )));
            }
            (Kind::ShrinkerSt, Kind::ExpanderEt)
        }
        (Theorem::Union, ParityCase::BothOdd) => (Kind::ShrinkerSt, Kind::ExpanderEt),
        (Theorem::Union, ParityCase::POddQEven) => (Kind::ShrinkerSt, Kind::VtCase2),
        (Theorem::Union, ParityCase::PEvenQOdd) => (Kind::VtCase3, Kind::ExpanderEt),
    };
    let mut left = CatalogImmersion::at_time(lk, params, -t_ref)?;
    let mut right = CatalogImmersion::at_time(rk, params, t_ref)?;
    if theorem == Theorem::Single {
        left = left.with_half_domain()?;
        right = right.with_half_domain()?;
    }
    Ok(TheoremFamilies { left, right })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SideReport {
    pub side: Side,
    pub family: Kind,
    pub half_domain: bool,
    pub t: f64,
    pub mass: Integral,
    pub h_term: Integral,
    pub d_term: Integral,
    pub first_variation: f64,
    pub quadrature_error_estimate: f64,
    pub mass_derivative_fd: Derivative,
    pub flow_identity: Verdict,
    pub limit_kind: Kind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<LimitMatch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence: Option<DivergenceReport>,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BrakkeReport {
    pub phi: TestFunction,
    pub phi_at_origin: f64,
    pub left: SideReport,
    pub right: SideReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_divergence: Option<DivergenceReport>,
    pub divergence_class: DivergenceClass,
    pub verdicts: Vec<Verdict>,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremReport {
    pub theorem: Theorem,
    pub params: ConeParams,
    pub parity: ParityCase,
    pub left_family: Kind,
    pub right_family: Kind,
    pub half_domain: bool,
    pub left_limit: Kind,
    pub right_limit: Kind,
    pub cone_pairs: Vec<[String; 2]>,
    pub brakke: Vec<BrakkeReport>,
    pub boundary: Vec<BoundaryTerm>,
    pub witnesses: Vec<AsymptoticWitness>,
    pub checks: Vec<Verdict>,
    pub notes: Vec<String>,
    pub status: Status,
}

fn side_report(fam: &CatalogImmersion, side: Side, phi: &TestFunction, cfg: &SuiteConfig) -> Result<SideReport> {
    let t = fam.time().expect("time family");
    let s = surface_integrals(fam, phi, &cfg.quadrature)?;
    let d = mass_time_derivative(fam, phi, &cfg.derivative_quadrature)?;
    let delta = s.first_variation();
    let tol = cfg.flow_tol * (1.0 + delta.abs());
    let flow = Verdict::below(format!("flow_identity_{}", side.as_str()), (d.value - delta).abs(), tol);
    let finite = phi.value_at_origin() == 0.0;
    let limit = if finite {
        Some(limit_match(fam, phi, side, &cfg.limit, &cfg.quadrature)?)
    } else {
        None
    };
    let divergence = if finite {
        None
    } else {
        Some(classify_divergence(fam, phi, side, &cfg.divergence, &cfg.quadrature)?)
    };
    let converged = s.converged() && d.converged && limit.as_ref().map_or(true, |l| l.converged);
    Ok(SideReport {
        side,
        family: fam.kind(),
        half_domain: fam.half_domain(),
        t,
        quadrature_error_estimate: s.max_error(),
        mass: s.mass,
        h_term: s.h_term,
        d_term: s.d_term,
        first_variation: delta,
        mass_derivative_fd: d,
        flow_identity: flow,
        limit_kind: limit_target(fam)?.kind(),
        limit,
        divergence,
        converged,
    })
}

fn divergence_verdict(name: &str, r: &DivergenceReport) -> Verdict {
    let (ratio, status) = match (&r.fit, r.class) {
        (Some(f), c) => (
            f.a / f.sigma_a.max(f64::MIN_POSITIVE),
            match c {
                DivergenceClass::MinusInfinity => Status::Pass,
                DivergenceClass::Finite => Status::Fail,
                DivergenceClass::Inconclusive => Status::Inconclusive,
            },
        ),
        (None, _) => (f64::NAN, Status::Inconclusive),
    };
    Verdict::above(name, ratio, 3.0).with_status(status)
}

fn brakke_report(
    phi: &TestFunction,
    left: SideReport,
    right: SideReport,
    limit_divergence: Option<DivergenceReport>,
    cfg: &SuiteConfig,
) -> BrakkeReport {
    let mut verdicts = vec![left.flow_identity.clone(), right.flow_identity.clone()];
    let divergence_class;
    if let (Some(l), Some(r)) = (&left.limit, &right.limit) {
        divergence_class = DivergenceClass::Finite;
        for m in [l, r] {
            verdicts.push(Verdict::below(
                format!("limit_match_{}", m.side.as_str()),
                (m.extrapolated - m.target).abs(),
                m.tolerance,
            ));
        }
        let gap = (l.target - r.target).abs();
        verdicts.push(Verdict::below(
            "targets_agree",
            gap,
            cfg.targets_tol * (1.0 + l.target.abs().max(r.target.abs())),
        ));
        let worst = (l.extrapolated - l.target).abs().max((r.extrapolated - r.target).abs());
        verdicts.push(
            Verdict::below("limit_equality", worst, l.tolerance.max(r.tolerance))
                .with_note("lim d/dt mass equals the limit first variation on both sides"),
        );
    } else {
        let mut classes = Vec::new();
        for s in [&left, &right] {
            if let Some(d) = &s.divergence {
                verdicts.push(divergence_verdict(&format!("divergence_{}", s.side.as_str()), d));
                verdicts.push(Verdict::below(
                    format!("reduced_model_{}", s.side.as_str()),
                    d.reduced_model_deviation,
                    cfg.reduced_model_tol,
                ));
                classes.push(d.class);
            }
        }
        if let Some(d) = &limit_divergence {
            verdicts.push(divergence_verdict("divergence_limit", d));
            classes.push(d.class);
        }
        divergence_class = if classes.iter().all(|c| *c == DivergenceClass::MinusInfinity) {
            DivergenceClass::MinusInfinity
        } else if classes.contains(&DivergenceClass::Finite) {
            DivergenceClass::Finite
        } else {
            DivergenceClass::Inconclusive
        };
        verdicts.push(
            Verdict::below("both_minus_infinity", 0.0, 1.0)
                .with_status(Status::from_bool(divergence_class == DivergenceClass::MinusInfinity)),
        );
    }
    if !(left.converged && right.converged) {
        verdicts.push(
            Verdict::below("quadrature_converged", 1.0, 0.5)
                .with_status(Status::Inconclusive)
                .with_note("a quadrature hit its panel budget"),
        );
    }
    let status = Status::all(verdicts.iter().map(|v| v.status));
    BrakkeReport {
        phi_at_origin: phi.value_at_origin(),
        phi: phi.clone(),
        left,
        right,
        limit_divergence,
        divergence_class,
        verdicts,
        status,
    }
}

/// Flow identity, limit matching and divergence classification for each φ
/// on both sides of t = 0.
pub fn brakke_reports(fams: &TheoremFamilies, phis: &[TestFunction], cfg: &SuiteConfig) -> Result<Vec<BrakkeReport>> {
    let cells: Vec<(usize, Side)> = (0..phis.len())
        .flat_map(|i| [(i, Side::Minus), (i, Side::Plus)])
        .collect();
    let sides = try_map_with(cfg.execution, &cells, |&(i, side)| {
        side_report(fams.side(side), side, &phis[i], cfg)
    })?;
    let limit = limit_target(&fams.left)?;
    let diverging: Vec<usize> = (0..phis.len()).filter(|&i| phis[i].value_at_origin() > 0.0).collect();
    let limit_divs = try_map_with(cfg.execution, &diverging, |&i| {
        classify_limit_divergence(&limit, &phis[i], &cfg.divergence, &cfg.quadrature)
    })?;
    let mut sides = sides.into_iter();
    let mut limit_divs = diverging.iter().copied().zip(limit_divs).peekable();
    let mut brakke = Vec::with_capacity(phis.len());
    for (i, phi) in phis.iter().enumerate() {
        let (l, r) = (sides.next().expect("left cell"), sides.next().expect("right cell"));
        let ld = match limit_divs.peek() {
            Some((j, _)) if *j == i => limit_divs.next().map(|(_, d)| d),
            _ => None,
        };
        brakke.push(brakke_report(phi, l, r, ld, cfg));
    }
    Ok(brakke)
}

/// Runs every Brakke check for each φ on both sides of t = 0, plus the
/// geometric checks of the chosen gluing.
pub fn theorem_suite(theorem: Theorem, params: ConeParams, phis: &[TestFunction], cfg: &SuiteConfig) -> Result<TheoremReport> {
    let fams = theorem_families(theorem, params, cfg.t_ref)?;
    let brakke = brakke_reports(&fams, phis, cfg)?;
    let limit = limit_target(&fams.left)?;

    let mut checks = Vec::new();
    let mut boundary = Vec::new();
    let mut witnesses = Vec::new();
    let mut cone_pairs = Vec::new();
    let right_limit = limit_target(&fams.right)?;
    match theorem {
        Theorem::Union => {
            for fam in [&fams.left, &fams.right] {
                let (a, b) = asymptotic_cone_pair(fam.kind(), params)?;
                cone_pairs.push([a.label(), b.label()]);
                let w = asymptotic_witness(fam, &cfg.witness_epsilons, cfg.image_samples, cfg.seed)?;
                let worst = w
                    .distances
                    .iter()
                    .zip(&w.thresholds)
                    .map(|(d, t)| d / t)
                    .fold(0.0, f64::max);
                checks.push(
                    Verdict::below(format!("asymptotic_cones_{}", fam.kind()), worst, 1.0)
                        .with_status(Status::from_bool(w.within_threshold && w.monotone))
                        .with_note("distance / 10√ε, maximized over ε; must also decrease in ε"),
                );
                witnesses.push(w);
            }
            let mut sorted = cone_pairs.clone();
            for p in sorted.iter_mut() {
                p.sort();
            }
            checks.push(
                Verdict::below("cone_pairs_agree", 0.0, 1.0).with_status(Status::from_bool(sorted[0] == sorted[1])),
            );
            let d = image_distance(&limit, &right_limit, 1.0, cfg.image_samples, cfg.seed)?;
            checks.push(Verdict::below("limits_coincide", d, cfg.image_tol));
            let which = Reparametrization::for_parity(params.parity());
            let res = reparametrization_residual(which, params, 64)?;
            checks.push(Verdict::below("reparametrization", res, cfg.reparametrization_tol));
        }
        Theorem::Single => {
            let c = boundary_cancellation(&params).norm();
            checks.push(Verdict::below("roots_of_unity", c, cfg.cancellation_tol));
            for fam in [&fams.left, &fams.right] {
                for field in default_fields(&params, cfg.seed) {
                    let b = boundary_first_variation(fam, field.as_ref())?;
                    checks.push(Verdict::below(
                        format!("boundary_{}_{}", fam.kind(), b.field),
                        b.modulus,
                        cfg.boundary_tol,
                    ));
                    boundary.push(b);
                }
            }
        }
    }
    let notes = vec![
        "the second cone of the union is taken to be the partner cone of the asymptotic pair".to_string(),
        "motion without mass loss is read as equality in the finite case".to_string(),
    ];
    let status = Status::all(
        brakke
            .iter()
            .map(|b| b.status)
            .chain(checks.iter().map(|c| c.status)),
    );
    Ok(TheoremReport {
        theorem,
        params,
        parity: params.parity(),
        left_family: fams.left.kind(),
        right_family: fams.right.kind(),
        half_domain: theorem == Theorem::Single,
        left_limit: limit.kind(),
        right_limit: right_limit.kind(),
        cone_pairs,
        brakke,
        boundary,
        witnesses,
        checks,
        notes,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_follow_parity() {
        let f = theorem_families(Theorem::Union, ConeParams::new(3, 2).unwrap(), 1.0).unwrap();
        assert_eq!((f.left.kind(), f.right.kind()), (Kind::ShrinkerSt, Kind::VtCase2));
        let f = theorem_families(Theorem::Union, ConeParams::new(2, 1).unwrap(), 1.0).unwrap();
        assert_eq!((f.left.kind(), f.right.kind()), (Kind::VtCase3, Kind::ExpanderEt));
        let f = theorem_families(Theorem::Single, ConeParams::new(3, 2).unwrap(), 1.0).unwrap();
        assert!(f.left.half_domain() && f.right.half_domain());
        assert!(theorem_families(Theorem::Single, ConeParams::new(2, 1).unwrap(), 1.0).is_err());
    }

    #[test]
    fn theorem_ids_parse() {
        assert_eq!("1.2".parse::<Theorem>().unwrap(), Theorem::Single);
        assert!("2.0".parse::<Theorem>().is_err());
    }
}
