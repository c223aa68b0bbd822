use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use smallvec::SmallVec;

use super::params::{ConeParams, LambdaChart, LambdaParams, Sign};
use super::Immersion;
use crate::complex_space::{ComplexPoint, ComplexVector, Coords};
use crate::error::{Error, Result};
use crate::jets::{Cx, Dual, Jet2, JetPoint, Real};
use crate::lagrangian_calculus::Frame;

/// Stable identifiers of the catalog, used by the CLI and in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    GammaPq,
    ConePp,
    ConePm,
    ConeMp,
    ConeMm,
    ShrinkerS,
    ExpanderE,
    ShrinkerSt,
    ExpanderEt,
    VtCase2,
    VtCase3,
    LimitS0,
    LimitE0,
    LimitV0Case2,
    LimitV0Case3,
    LambdaFamily,
    LambdaFamilyT,
}

impl Kind {
    pub const ALL: [Kind; 17] = [
        Kind::GammaPq,
        Kind::ConePp,
        Kind::ConePm,
        Kind::ConeMp,
        Kind::ConeMm,
        Kind::ShrinkerS,
        Kind::ExpanderE,
        Kind::ShrinkerSt,
        Kind::ExpanderEt,
        Kind::VtCase2,
        Kind::VtCase3,
        Kind::LimitS0,
        Kind::LimitE0,
        Kind::LimitV0Case2,
        Kind::LimitV0Case3,
        Kind::LambdaFamily,
        Kind::LambdaFamilyT,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::GammaPq => "gamma_pq",
            Kind::ConePp => "cone_pp",
            Kind::ConePm => "cone_pm",
            Kind::ConeMp => "cone_mp",
            Kind::ConeMm => "cone_mm",
            Kind::ShrinkerS => "shrinker_S",
            Kind::ExpanderE => "expander_E",
            Kind::ShrinkerSt => "shrinker_St",
            Kind::ExpanderEt => "expander_Et",
            Kind::VtCase2 => "V_t_case2",
            Kind::VtCase3 => "V_t_case3",
            Kind::LimitS0 => "limit_S0",
            Kind::LimitE0 => "limit_E0",
            Kind::LimitV0Case2 => "limit_V0_case2",
            Kind::LimitV0Case3 => "limit_V0_case3",
            Kind::LambdaFamily => "lambda_family",
            Kind::LambdaFamilyT => "lambda_family_t",
        }
    }

    pub fn is_time_indexed(self) -> bool {
        matches!(
            self,
            Kind::ShrinkerSt | Kind::ExpanderEt | Kind::VtCase2 | Kind::VtCase3 | Kind::LambdaFamilyT
        )
    }

    pub fn is_cone(self) -> bool {
        matches!(self, Kind::ConePp | Kind::ConePm | Kind::ConeMp | Kind::ConeMm)
    }

    pub fn is_limit(self) -> bool {
        matches!(
            self,
            Kind::LimitS0 | Kind::LimitE0 | Kind::LimitV0Case2 | Kind::LimitV0Case3
        )
    }

    pub fn is_lambda(self) -> bool {
        matches!(self, Kind::LambdaFamily | Kind::LambdaFamilyT)
    }

    /// Kinds parametrized by (μ, θ).
    pub fn uses_mu(self) -> bool {
        matches!(
            self,
            Kind::ShrinkerS
                | Kind::ExpanderE
                | Kind::ShrinkerSt
                | Kind::ExpanderEt
                | Kind::VtCase2
                | Kind::VtCase3
        )
    }

    /// Kinds with the shrinker profile |F|² ∝ q cosh²μ + p sinh²μ.
    fn shrinker_like(self) -> bool {
        matches!(self, Kind::ShrinkerS | Kind::ShrinkerSt | Kind::VtCase3)
    }

    /// Required sign of t, if any.
    fn time_sign(self) -> Option<f64> {
        match self {
            Kind::ShrinkerSt | Kind::VtCase3 => Some(-1.0),
            Kind::ExpanderEt | Kind::VtCase2 => Some(1.0),
            _ => None,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown catalog kind {s:?}")))
    }
}

impl Serialize for Kind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Family {
    Cone(ConeParams),
    Lambda {
        params: LambdaParams,
        chart: LambdaChart,
    },
}

/// Closed-form reference values at a parameter point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryReference {
    pub norm_sq: f64,
    pub h_norm_sq: f64,
    pub area_density: f64,
    pub beta: f64,
    /// Induced metric, k×k row-major.
    pub metric: Vec<f64>,
}

/// |F|² as a function of the first parameter only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialProfile {
    /// |F|² = base + growth·sinh²(u)
    Hyperbolic { base: f64, growth: f64 },
    /// |F|² = growth·u²
    Linear { growth: f64 },
}

impl RadialProfile {
    pub fn radius_sq(&self, u: f64) -> f64 {
        match *self {
            RadialProfile::Hyperbolic { base, growth } => base + growth * u.sinh().powi(2),
            RadialProfile::Linear { growth } => growth * u * u,
        }
    }

    /// The u ≥ 0 at which |F| = r, or `None` when r is below the minimum.
    pub fn param_at_radius(&self, r: f64) -> Option<f64> {
        match *self {
            RadialProfile::Hyperbolic { base, growth } => {
                let s2 = (r * r - base) / growth;
                (s2 >= 0.0).then(|| s2.sqrt().asinh())
            }
            RadialProfile::Linear { growth } => (r >= 0.0).then(|| r / growth.sqrt()),
        }
    }

    pub fn min_radius(&self) -> f64 {
        match *self {
            RadialProfile::Hyperbolic { base, .. } => base.sqrt(),
            RadialProfile::Linear { .. } => 0.0,
        }
    }
}

/// A named parametrized object of the catalog.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogImmersion {
    kind: Kind,
    family: Family,
    time: Option<f64>,
    half_domain: bool,
}

impl CatalogImmersion {
    /// Time-free kinds parametrized by a coprime pair.
    pub fn new(kind: Kind, params: ConeParams) -> Result<Self> {
        if kind.is_time_indexed() || kind.is_lambda() {
            return Err(Error::InvalidParams(format!(
                "{kind} needs {}",
                if kind.is_lambda() { "λ parameters" } else { "a time" }
            )));
        }
        Ok(Self {
            kind,
            family: Family::Cone(params),
            time: None,
            half_domain: false,
        })
    }

    /// Time-indexed kinds S_t, E_t and the parity-adjusted V_t.
    pub fn at_time(kind: Kind, params: ConeParams, t: f64) -> Result<Self> {
        let sign = kind.time_sign().ok_or_else(|| {
            Error::InvalidParams(format!("{kind} is not a time-indexed cone family"))
        })?;
        if !(t.is_finite() && t * sign > 0.0) {
            return Err(Error::OutsideDomain {
                kind: kind.as_str(),
                detail: format!("t = {t} must be {}", if sign > 0.0 { "> 0" } else { "< 0" }),
            });
        }
        Ok(Self {
            kind,
            family: Family::Cone(params),
            time: Some(t),
            half_domain: false,
        })
    }

    pub fn gamma(params: ConeParams) -> Self {
        Self::new(Kind::GammaPq, params).expect("time-free kind")
    }

    pub fn cone(params: ConeParams, first: Sign, second: Sign) -> Self {
        let kind = match (first, second) {
            (Sign::Plus, Sign::Plus) => Kind::ConePp,
            (Sign::Plus, Sign::Minus) => Kind::ConePm,
            (Sign::Minus, Sign::Plus) => Kind::ConeMp,
            (Sign::Minus, Sign::Minus) => Kind::ConeMm,
        };
        Self::new(kind, params).expect("time-free kind")
    }

    pub fn lambda_family(params: LambdaParams, chart: LambdaChart) -> Result<Self> {
        Self::lambda(Kind::LambdaFamily, params, chart, None)
    }

    /// Σₜ with level (−2t)·Σλᵢ.
    pub fn lambda_family_t(lambdas: Vec<f64>, t: f64, chart: LambdaChart) -> Result<Self> {
        if !(t.is_finite() && t != 0.0) {
            return Err(Error::OutsideDomain {
                kind: "lambda_family_t",
                detail: format!("t = {t} must be nonzero"),
            });
        }
        let params = LambdaParams::at_time(lambdas, t)?;
        Self::lambda(Kind::LambdaFamilyT, params, chart, Some(t))
    }

    fn lambda(kind: Kind, params: LambdaParams, chart: LambdaChart, time: Option<f64>) -> Result<Self> {
        if chart.solved >= params.n() {
            return Err(Error::InvalidParams(format!(
                "chart solves for x{} but n = {}",
                chart.solved + 1,
                params.n()
            )));
        }
        Ok(Self {
            kind,
            family: Family::Lambda { params, chart },
            time,
            half_domain: false,
        })
    }

    /// Restricts a (μ, θ) family to μ ≥ 0.
    pub fn with_half_domain(mut self) -> Result<Self> {
        if !self.kind.uses_mu() {
            return Err(Error::InvalidParams(format!(
                "{} has no μ parameter to restrict",
                self.kind
            )));
        }
        self.half_domain = true;
        Ok(self)
    }

    /// The same family at another time.
    pub fn with_time(&self, t: f64) -> Result<Self> {
        match &self.family {
            Family::Cone(cp) => {
                let mut out = Self::at_time(self.kind, *cp, t)?;
                out.half_domain = self.half_domain;
                Ok(out)
            }
            Family::Lambda { params, chart } if self.kind == Kind::LambdaFamilyT => {
                Self::lambda_family_t(params.lambdas().to_vec(), t, *chart)
            }
            _ => Err(Error::InvalidParams(format!("{} is time-free", self.kind))),
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn time(&self) -> Option<f64> {
        self.time
    }

    pub fn half_domain(&self) -> bool {
        self.half_domain
    }

    pub fn cone_params(&self) -> Option<&ConeParams> {
        match &self.family {
            Family::Cone(cp) => Some(cp),
            Family::Lambda { .. } => None,
        }
    }

    pub fn lambda_params(&self) -> Option<(&LambdaParams, LambdaChart)> {
        match &self.family {
            Family::Lambda { params, chart } => Some((params, *chart)),
            Family::Cone(_) => None,
        }
    }

    /// Whether this is a (u, θ) surface in ℂ².
    pub fn is_surface(&self) -> bool {
        matches!(self.family, Family::Cone(_)) && self.kind != Kind::GammaPq
    }

    /// Homothety factor √(∓t/c) of time-indexed cone families, 1 otherwise.
    pub fn scale(&self) -> f64 {
        match (&self.family, self.time) {
            (Family::Cone(cp), Some(t)) => (t.abs() / cp.self_similar_constant()).sqrt(),
            _ => 1.0,
        }
    }

    /// Coefficient κ of F^⊥ = κH, when the object is self-similar.
    pub fn soliton_coefficient(&self) -> Option<f64> {
        match (&self.family, self.kind) {
            (Family::Cone(cp), Kind::ShrinkerS) => Some(-2.0 * cp.self_similar_constant()),
            (Family::Cone(cp), Kind::ExpanderE) => Some(2.0 * cp.self_similar_constant()),
            (Family::Cone(_), k) if k.time_sign().is_some() => self.time.map(|t| 2.0 * t),
            (Family::Lambda { params, .. }, _) => params.soliton_coefficient(),
            _ => None,
        }
    }

    // -- closed forms ------------------------------------------------------

    fn cone_consts(&self) -> (f64, f64, f64, f64) {
        let cp = self.cone_params().expect("cone family");
        (cp.pf(), cp.qf(), cp.pf().sqrt(), cp.qf().sqrt())
    }

    /// |F|² in terms of the first parameter, for the ℂ² surface kinds.
    pub fn radial_profile(&self) -> Option<RadialProfile> {
        if !self.is_surface() {
            return None;
        }
        let (p, q, _, _) = self.cone_consts();
        let s2 = self.scale().powi(2);
        Some(if self.kind.uses_mu() {
            let base = if self.kind.shrinker_like() { q } else { p };
            RadialProfile::Hyperbolic {
                base: s2 * base,
                growth: s2 * (p + q),
            }
        } else {
            RadialProfile::Linear { growth: p + q }
        })
    }

    /// Lower end of the first parameter's domain (−∞ for full lines).
    pub fn first_param_min(&self) -> f64 {
        if self.half_domain || self.kind.is_cone() {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Parameter intervals (split at u = 0) on which r_min ≤ |F| ≤ r_max.
    pub fn radial_support(&self, r_min: f64, r_max: f64) -> Vec<(f64, f64)> {
        let Some(profile) = self.radial_profile() else {
            return Vec::new();
        };
        let Some(hi) = profile.param_at_radius(r_max) else {
            return Vec::new();
        };
        let lo = profile.param_at_radius(r_min.max(0.0)).unwrap_or(0.0).min(hi);
        if hi <= lo {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(2);
        if self.first_param_min() < 0.0 {
            out.push((-hi, -lo));
        }
        out.push((lo, hi));
        out
    }

    /// Additive constant of β on the branch containing `u`.
    fn beta_offset(&self, u: f64) -> f64 {
        let (p, q, _, _) = self.cone_consts();
        let slope = p - q;
        match self.kind {
            Kind::ConePm | Kind::ConeMp => PI,
            Kind::VtCase2 | Kind::LimitV0Case2 if u < 0.0 => slope * PI / q,
            Kind::VtCase3 | Kind::LimitV0Case3 if u < 0.0 => slope * PI / p,
            _ => 0.0,
        }
    }

    /// Reference values from the closed-form expressions.
    pub fn closed_form_reference(&self, params: &[f64]) -> Result<GeometryReference> {
        self.check_domain(params)?;
        if let Family::Lambda { params: lp, chart } = &self.family {
            return Ok(lambda_reference(lp, *chart, params)?);
        }
        let (p, q, _, _) = self.cone_consts();
        let pq = p * q;
        let slope = p - q;
        if self.kind == Kind::GammaPq {
            let theta = params[0];
            return Ok(GeometryReference {
                norm_sq: 1.0,
                h_norm_sq: (p * p - pq + q * q) / pq,
                area_density: pq.sqrt(),
                beta: slope * theta,
                metric: vec![pq],
            });
        }
        let (u, theta) = (params[0], params[1]);
        let beta = slope * theta + self.beta_offset(u);
        if self.kind.uses_mu() {
            let s2 = self.scale().powi(2);
            let (c2, sh2) = (u.cosh().powi(2), u.sinh().powi(2));
            let (norm_part, metric_part) = if self.kind.shrinker_like() {
                (q * c2 + p * sh2, p * c2 + q * sh2)
            } else {
                (p * c2 + q * sh2, q * c2 + p * sh2)
            };
            Ok(GeometryReference {
                norm_sq: s2 * norm_part,
                h_norm_sq: slope * slope / (pq * s2 * metric_part),
                area_density: s2 * pq.sqrt() * metric_part,
                beta,
                metric: vec![s2 * metric_part, 0.0, 0.0, s2 * pq * metric_part],
            })
        } else {
            let y2 = u * u;
            Ok(GeometryReference {
                norm_sq: y2 * (p + q),
                h_norm_sq: slope * slope / (pq * (p + q) * y2),
                area_density: u.abs() * pq.sqrt() * (p + q),
                beta,
                metric: vec![p + q, 0.0, 0.0, y2 * pq * (p + q)],
            })
        }
    }

    // -- evaluation --------------------------------------------------------

    fn check_domain(&self, params: &[f64]) -> Result<()> {
        let k = self.domain_dim();
        if params.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: params.len(),
            });
        }
        let kind = self.kind.as_str();
        if let Some(x) = params.iter().find(|x| !x.is_finite()) {
            return Err(Error::OutsideDomain {
                kind,
                detail: format!("non-finite parameter {x}"),
            });
        }
        let theta = params[k - 1];
        if !(0.0..TAU).contains(&theta) {
            return Err(Error::OutsideDomain {
                kind,
                detail: format!("θ = {theta} not in [0, 2π)"),
            });
        }
        if k >= 2 && params[0] < self.first_param_min() && !self.kind.is_lambda() {
            return Err(Error::OutsideDomain {
                kind,
                detail: format!("first parameter {} below {}", params[0], self.first_param_min()),
            });
        }
        Ok(())
    }

    fn check_smooth(&self, params: &[f64]) -> Result<()> {
        let crease = matches!(self.kind, Kind::VtCase2 | Kind::VtCase3) && !self.half_domain;
        if (crease || self.kind.is_limit() || self.kind.is_cone()) && params[0] == 0.0 {
            return Err(Error::SingularLocus {
                kind: self.kind.as_str(),
            });
        }
        Ok(())
    }

    /// The closed-form map, generic over the scalar type.
    fn components<T: Real>(&self, u: &[T]) -> Result<SmallVec<[Cx<T>; 4]>> {
        match &self.family {
            Family::Lambda { params, chart } => lambda_components(params, *chart, u),
            Family::Cone(cp) => Ok(self.cone_components(cp, u)),
        }
    }

    fn cone_components<T: Real>(&self, cp: &ConeParams, u: &[T]) -> SmallVec<[Cx<T>; 4]> {
        let (p, q) = (cp.pf(), cp.qf());
        let (sp, sq) = (p.sqrt(), q.sqrt());
        let s = self.scale();
        let ep = |th: &T| Cx::cis(&th.scale(p));
        let eq = |th: &T| Cx::cis(&th.scale(-q));
        let abs = |y: &T| if y.value() < 0.0 { -y.clone() } else { y.clone() };
        // (a·√q·e^{ipθ}, i·b·√p·e^{−iqθ})
        let pair = |a: &T, b: &T, th: &T| -> SmallVec<[Cx<T>; 4]> {
            smallvec::smallvec![
                ep(th).times(a).scale(s * sq),
                eq(th).times(b).scale(s * sp).mul_i()
            ]
        };
        let negate = |v: SmallVec<[Cx<T>; 4]>| v.iter().map(Cx::neg).collect();

        if self.kind == Kind::GammaPq {
            let th = &u[0];
            return smallvec::smallvec![
                ep(th).scale((q / (p + q)).sqrt()),
                eq(th).scale((p / (p + q)).sqrt()).mul_i()
            ];
        }
        let (x, th) = (&u[0], &u[1]);
        let negative = x.value() < 0.0;
        let shrinker = |th: &T| pair(&x.cosh(), &x.sinh(), th);
        let expander = |th: &T| pair(&x.sinh(), &x.cosh(), th);
        match self.kind {
            Kind::ShrinkerS | Kind::ShrinkerSt => shrinker(th),
            Kind::ExpanderE | Kind::ExpanderEt => expander(th),
            Kind::VtCase2 if negative => negate(expander(&th.add_const(PI / q))),
            Kind::VtCase2 => expander(th),
            Kind::VtCase3 if negative => negate(shrinker(&th.add_const(PI / p))),
            Kind::VtCase3 => shrinker(th),
            Kind::ConePp | Kind::ConePm | Kind::ConeMp | Kind::ConeMm => {
                let (a, b) = match self.kind {
                    Kind::ConePp => (1.0, 1.0),
                    Kind::ConePm => (1.0, -1.0),
                    Kind::ConeMp => (-1.0, 1.0),
                    _ => (-1.0, -1.0),
                };
                pair(&x.scale(a), &x.scale(b), th)
            }
            Kind::LimitS0 => pair(&abs(x), x, th),
            Kind::LimitE0 => pair(x, &abs(x), th),
            Kind::LimitV0Case2 if negative => {
                let th = th.add_const(PI / q);
                negate(pair(x, &abs(x), &th))
            }
            Kind::LimitV0Case3 if negative => {
                let th = th.add_const(PI / p);
                negate(pair(&abs(x), x, &th))
            }
            Kind::LimitV0Case2 | Kind::LimitV0Case3 => pair(x, x, th),
            Kind::GammaPq | Kind::LambdaFamily | Kind::LambdaFamilyT => unreachable!(),
        }
    }

    fn frame_dual<const K: usize>(&self, params: &[f64]) -> Result<Frame> {
        let seeds: SmallVec<[Dual<K>; 4]> = params
            .iter()
            .enumerate()
            .map(|(a, v)| Dual::<K>::variable(a, *v))
            .collect();
        let comps = self.components(&seeds)?;
        let mut position = Coords::new();
        let mut tangents: SmallVec<[Coords; 4]> = (0..K).map(|_| Coords::new()).collect();
        for c in &comps {
            for part in [&c.re, &c.im] {
                position.push(part.v);
                for (a, t) in tangents.iter_mut().enumerate() {
                    t.push(part.d[a]);
                }
            }
        }
        Ok(Frame {
            position: ComplexVector::new(position)?,
            tangents: tangents
                .into_iter()
                .map(ComplexVector::new)
                .collect::<Result<_>>()?,
        })
    }
}

fn lambda_full_point<T: Real>(lp: &LambdaParams, chart: LambdaChart, u: &[T]) -> Result<SmallVec<[T; 4]>> {
    let n = lp.n();
    let lam = lp.lambdas();
    let free = &u[..n - 1];
    let j = chart.solved;
    let mut rest = free[0].lift(lp.level());
    let mut idx = 0;
    for (i, l) in lam.iter().enumerate() {
        if i == j {
            continue;
        }
        let x = &free[idx];
        rest = rest - (x.clone() * x.clone()).scale(*l);
        idx += 1;
    }
    let arg = rest.scale(1.0 / lam[j]);
    if arg.value() <= 0.0 {
        return Err(Error::OutsideDomain {
            kind: "lambda_family",
            detail: format!("chart solving for x{} has no real solution here", j + 1),
        });
    }
    let xj = arg.sqrt()?.scale(chart.sign.factor());
    let mut out: SmallVec<[T; 4]> = SmallVec::with_capacity(n);
    let mut idx = 0;
    for i in 0..n {
        if i == j {
            out.push(xj.clone());
        } else {
            out.push(free[idx].clone());
            idx += 1;
        }
    }
    Ok(out)
}

fn lambda_components<T: Real>(lp: &LambdaParams, chart: LambdaChart, u: &[T]) -> Result<SmallVec<[Cx<T>; 4]>> {
    let x = lambda_full_point(lp, chart, u)?;
    let theta = &u[lp.n() - 1];
    Ok(x
        .iter()
        .zip(lp.lambdas())
        .map(|(xi, l)| Cx::cis(&theta.scale(*l)).times(xi))
        .collect())
}

fn lambda_reference(lp: &LambdaParams, chart: LambdaChart, u: &[f64]) -> Result<GeometryReference> {
    let x = lambda_full_point(lp, chart, u)?;
    let lam = lp.lambdas();
    let n = lp.n();
    let j = chart.solved;
    let w_j = lam[j] * x[j];
    let lx2: f64 = lam.iter().zip(&x).map(|(l, xi)| (l * xi).powi(2)).sum();
    let free: Vec<usize> = (0..n).filter(|i| *i != j).collect();
    let mut metric = vec![0.0; n * n];
    for (a, &ia) in free.iter().enumerate() {
        for (b, &ib) in free.iter().enumerate() {
            let delta = if a == b { 1.0 } else { 0.0 };
            metric[a * n + b] = delta + lam[ia] * x[ia] * lam[ib] * x[ib] / (w_j * w_j);
        }
    }
    metric[n * n - 1] = lx2;
    let sum = lp.lambda_sum();
    Ok(GeometryReference {
        norm_sq: x.iter().map(|v| v * v).sum(),
        h_norm_sq: sum * sum / lx2,
        area_density: lx2 / w_j.abs(),
        beta: sum * u[n - 1] + lp.angle_offset(),
        metric,
    })
}

impl Immersion for CatalogImmersion {
    fn name(&self) -> String {
        let mut s = self.kind.as_str().to_string();
        match &self.family {
            Family::Cone(cp) => s.push_str(&format!("(p={},q={}", cp.p(), cp.q())),
            Family::Lambda { params, chart } => s.push_str(&format!(
                "(lambdas={:?},C={},chart=x{}{}",
                params.lambdas(),
                params.level(),
                chart.solved + 1,
                chart.sign.symbol()
            )),
        }
        if let Some(t) = self.time {
            s.push_str(&format!(",t={t}"));
        }
        if self.half_domain {
            s.push_str(",half");
        }
        s.push(')');
        s
    }

    fn domain_dim(&self) -> usize {
        match &self.family {
            Family::Lambda { params, .. } => params.n(),
            Family::Cone(_) if self.kind == Kind::GammaPq => 1,
            Family::Cone(_) => 2,
        }
    }

    fn ambient_dim(&self) -> usize {
        match &self.family {
            Family::Lambda { params, .. } => params.n(),
            Family::Cone(_) => 2,
        }
    }

    fn evaluate(&self, params: &[f64]) -> Result<ComplexPoint> {
        self.check_domain(params)?;
        let comps = self.components(params)?;
        let coords: Coords = comps.iter().flat_map(|c| [c.re, c.im]).collect();
        ComplexVector::new(coords)
    }

    fn evaluate_jet(&self, params: &[f64]) -> Result<JetPoint> {
        self.check_domain(params)?;
        self.check_smooth(params)?;
        let k = params.len();
        let seeds: Vec<Jet2> = params
            .iter()
            .enumerate()
            .map(|(a, v)| Jet2::variable(k, a, *v))
            .collect();
        JetPoint::from_complex(self.components(&seeds)?.into_vec())
    }

    fn frame(&self, params: &[f64]) -> Result<Frame> {
        self.check_domain(params)?;
        self.check_smooth(params)?;
        match params.len() {
            1 => self.frame_dual::<1>(params),
            2 => self.frame_dual::<2>(params),
            3 => self.frame_dual::<3>(params),
            4 => self.frame_dual::<4>(params),
            _ => Ok(Frame::from_jet(&self.evaluate_jet(params)?)),
        }
    }

    fn beta_jet(&self, params: &[f64]) -> Option<Result<Jet2>> {
        Some(self.check_domain(params).and_then(|()| {
            let k = params.len();
            let theta = params[k - 1];
            let mut grad = vec![0.0; k];
            let value = match &self.family {
                Family::Lambda { params: lp, .. } => {
                    grad[k - 1] = lp.lambda_sum();
                    lp.lambda_sum() * theta + lp.angle_offset()
                }
                Family::Cone(cp) => {
                    grad[k - 1] = cp.angle_slope();
                    let offset = if k == 2 { self.beta_offset(params[0]) } else { 0.0 };
                    cp.angle_slope() * theta + offset
                }
            };
            Jet2::from_parts(value, &grad, &vec![0.0; k * k])
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_space::dot;

    fn cp(p: u32, q: u32) -> ConeParams {
        ConeParams::new(p, q).unwrap()
    }

    fn close(a: &ComplexVector, b: &[f64], tol: f64) -> bool {
        a.coords().iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn kind_names_round_trip() {
        for k in Kind::ALL {
            assert_eq!(k.as_str().parse::<Kind>().unwrap(), k);
        }
        assert!("shrinker".parse::<Kind>().is_err());
    }

    #[test]
    fn evaluate_examples() {
        let s = CatalogImmersion::new(Kind::ShrinkerS, cp(2, 1)).unwrap();
        assert!(close(&s.evaluate(&[0.0, 0.0]).unwrap(), &[1.0, 0.0, 0.0, 0.0], 1e-15));

        let g = CatalogImmersion::gamma(cp(2, 1));
        let third = (1.0f64 / 3.0).sqrt();
        let two_thirds = (2.0f64 / 3.0).sqrt();
        assert!(close(&g.evaluate(&[0.0]).unwrap(), &[third, 0.0, 0.0, two_thirds], 1e-15));

        let s0 = CatalogImmersion::new(Kind::LimitS0, cp(2, 1)).unwrap();
        let v = s0.evaluate(&[-1.0, 0.0]).unwrap();
        assert!(close(&v, &[1.0, 0.0, 0.0, -2f64.sqrt()], 1e-15));
    }

    #[test]
    fn jet_matches_closed_form_derivatives() {
        let s = CatalogImmersion::new(Kind::ShrinkerS, cp(2, 1)).unwrap();
        let j = s.evaluate_jet(&[0.0, 0.0]).unwrap();
        assert!(close(&j.partial(0), &[0.0, 0.0, 0.0, 2f64.sqrt()], 1e-15));
        assert!(close(&j.partial(1), &[0.0, 2.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn domain_errors() {
        let s = CatalogImmersion::new(Kind::ShrinkerS, cp(2, 1)).unwrap();
        assert!(s.evaluate(&[0.0, TAU]).is_err());
        assert!(s.evaluate(&[0.0, -0.1]).is_err());
        assert!(s.evaluate(&[0.0]).is_err());
        let half = s.clone().with_half_domain().unwrap();
        assert!(half.evaluate(&[-0.5, 1.0]).is_err());
        assert!(CatalogImmersion::new(Kind::ConePp, cp(2, 1))
            .unwrap()
            .evaluate(&[-1.0, 0.0])
            .is_err());
        assert!(CatalogImmersion::at_time(Kind::ShrinkerSt, cp(2, 1), 0.5).is_err());
        assert!(CatalogImmersion::at_time(Kind::ExpanderEt, cp(2, 1), -0.5).is_err());
        assert!(CatalogImmersion::at_time(Kind::VtCase2, cp(3, 2), -0.5).is_err());
        assert!(CatalogImmersion::at_time(Kind::VtCase3, cp(2, 1), 0.5).is_err());
        assert!(CatalogImmersion::new(Kind::ShrinkerSt, cp(2, 1)).is_err());
        assert!(CatalogImmersion::new(Kind::LimitS0, cp(2, 1)).unwrap().with_half_domain().is_err());
    }

    #[test]
    fn singular_locus_refused_for_jets() {
        let v = CatalogImmersion::at_time(Kind::VtCase2, cp(3, 2), 1.0).unwrap();
        assert!(matches!(v.evaluate_jet(&[0.0, 1.0]), Err(Error::SingularLocus { .. })));
        assert!(v.evaluate(&[0.0, 1.0]).is_ok());
        let s0 = CatalogImmersion::new(Kind::LimitS0, cp(2, 1)).unwrap();
        assert!(s0.evaluate_jet(&[0.0, 1.0]).is_err());
        assert!(s0.frame(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn time_scaling_reduces_to_soliton_at_t_equal_c() {
        for params in ConeParams::sweep(5) {
            let c = params.self_similar_constant();
            let s = CatalogImmersion::new(Kind::ShrinkerS, params).unwrap();
            let st = CatalogImmersion::at_time(Kind::ShrinkerSt, params, -c).unwrap();
            let e = CatalogImmersion::new(Kind::ExpanderE, params).unwrap();
            let et = CatalogImmersion::at_time(Kind::ExpanderEt, params, c).unwrap();
            for &(mu, th) in &[(0.3, 0.2), (-1.1, 4.0), (2.0, 6.1)] {
                let d = &s.evaluate(&[mu, th]).unwrap() - &st.evaluate(&[mu, th]).unwrap();
                assert!(d.max_abs() < 1e-14);
                let d = &e.evaluate(&[mu, th]).unwrap() - &et.evaluate(&[mu, th]).unwrap();
                assert!(d.max_abs() < 1e-14);
            }
        }
    }

    #[test]
    fn shrinker_lies_on_level_set() {
        for params in ConeParams::sweep(5) {
            let (p, q) = (params.pf(), params.qf());
            let s = CatalogImmersion::new(Kind::ShrinkerS, params).unwrap();
            for i in 0..10 {
                for k in 0..10 {
                    let mu = -2.0 + 0.4 * i as f64;
                    let th = 0.6 * k as f64;
                    let f = s.evaluate(&[mu, th]).unwrap();
                    let level = p * f.z(0).norm_sqr() - q * f.z(1).norm_sqr();
                    assert!((level - p * q).abs() < 1e-12 * (1.0 + f.norm_sq()));
                }
            }
        }
    }

    #[test]
    fn gamma_on_unit_sphere() {
        for params in ConeParams::sweep(7) {
            let g = CatalogImmersion::gamma(params);
            for k in 0..50 {
                let th = TAU * k as f64 / 50.0;
                assert!((g.evaluate(&[th]).unwrap().norm_sq() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn crease_is_continuous_but_not_smooth() {
        let params = cp(3, 2);
        let v = CatalogImmersion::at_time(Kind::VtCase2, params, 1.0).unwrap();
        let h = 1e-9;
        for k in 0..16 {
            let th = TAU * k as f64 / 16.0;
            let plus = v.evaluate(&[h, th]).unwrap();
            let minus = v.evaluate(&[-h, th]).unwrap();
            assert!((&plus - &minus).max_abs() < 1e-8);
            let d_plus = v.frame(&[h, th]).unwrap().tangents[0].clone();
            let d_minus = v.frame(&[-h, th]).unwrap().tangents[0].clone();
            assert!((&d_plus - &d_minus).norm() > 0.1);
        }
        let v3 = CatalogImmersion::at_time(Kind::VtCase3, cp(2, 1), -1.0).unwrap();
        let plus = v3.evaluate(&[1e-12, 0.4]).unwrap();
        let minus = v3.evaluate(&[-1e-12, 0.4]).unwrap();
        assert!((&plus - &minus).max_abs() < 1e-10);
    }

    #[test]
    fn dual_frame_matches_jet_frame() {
        let lp = LambdaParams::new(vec![1.0, 2.0, -3.0], 1.5).unwrap();
        let imms = vec![
            CatalogImmersion::at_time(Kind::VtCase2, cp(3, 2), 0.7).unwrap(),
            CatalogImmersion::new(Kind::LimitV0Case3, cp(2, 1)).unwrap(),
            CatalogImmersion::lambda_family(lp, LambdaChart::new(0, Sign::Plus)).unwrap(),
        ];
        for imm in &imms {
            let u: Vec<f64> = if imm.domain_dim() == 3 {
                vec![0.3, 0.1, 1.2]
            } else {
                vec![-0.4, 2.5]
            };
            let f = imm.frame(&u).unwrap();
            let j = imm.evaluate_jet(&u).unwrap();
            assert!((&f.position - &j.position()).max_abs() < 1e-15);
            for a in 0..u.len() {
                assert!((&f.tangents[a] - &j.partial(a)).max_abs() < 1e-14);
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let st = CatalogImmersion::at_time(Kind::ShrinkerSt, cp(2, 1), -1.0).unwrap();
        assert!((st.closed_form_reference(&[0.0, 0.3]).unwrap().norm_sq - 1.0).abs() < 1e-15);
        let s0 = CatalogImmersion::new(Kind::LimitS0, cp(2, 1)).unwrap();
        let r = s0.closed_form_reference(&[1.0, 0.3]).unwrap();
        assert!((r.h_norm_sq - 1.0 / 6.0).abs() < 1e-15);
        assert!((r.area_density - 3.0 * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn lambda_chart_evaluation_satisfies_level() {
        let lp = LambdaParams::new(vec![1.0, 1.0, -1.0], 2.0).unwrap();
        let imm = CatalogImmersion::lambda_family(lp.clone(), LambdaChart::new(0, Sign::Minus)).unwrap();
        let f = imm.evaluate(&[0.4, 0.9, 1.0]).unwrap();
        let x: Vec<f64> = (0..3).map(|i| f.z(i).norm() * if i == 0 { -1.0 } else { 1.0 }).collect();
        // |z_i| loses the sign, but the level only depends on squares
        assert!(lp.level_residual(&x).abs() < 1e-12);
        // no real solution: 2 - 9 + 0 < 0 with λ_1 = 1
        assert!(imm.evaluate(&[3.0, 0.0, 1.0]).is_err());
        let chart = LambdaChart::containing(&lp, &[-1.2, 0.5, 0.3]).unwrap();
        assert_eq!(chart, LambdaChart::new(0, Sign::Minus));
        assert_eq!(chart.chart_coords(&[-1.2, 0.5, 0.3]), vec![0.5, 0.3]);
        let _ = dot;
    }

    #[test]
    fn radial_support_intervals() {
        let st = CatalogImmersion::at_time(Kind::ShrinkerSt, cp(2, 1), -1.0).unwrap();
        // |S_t|² = 1 + 3 sinh²μ ≤ 4 ⇔ |μ| ≤ asinh 1
        let iv = st.radial_support(0.0, 2.0);
        let m = 1f64.asinh();
        assert_eq!(iv.len(), 2);
        assert!((iv[0].0 + m).abs() < 1e-15 && iv[0].1 == 0.0);
        assert!((iv[1].1 - m).abs() < 1e-15);
        assert!(st.radial_support(0.0, 0.5).is_empty());
        let half = st.with_half_domain().unwrap();
        assert_eq!(half.radial_support(0.0, 2.0).len(), 1);
        let cone = CatalogImmersion::new(Kind::ConePp, cp(2, 1)).unwrap();
        let iv = cone.radial_support(0.5, 1.5);
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 - 0.5 / 3f64.sqrt()).abs() < 1e-15);
    }
}
