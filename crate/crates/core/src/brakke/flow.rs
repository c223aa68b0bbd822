use serde::Serialize;

use super::integrals::{surface_integrals, surface_integrals_on, FirstVariation};
use super::test_function::TestFunction;
use crate::error::{Error, Result};
use crate::immersions::{CatalogImmersion, Kind};
use crate::quadrature::QuadratureConfig;

/// Times closer to 0 than this are refused by [`mass_time_derivative`].
pub const MIN_TIME: f64 = 1e-6;

/// Finite-difference step as a fraction of |t|.
pub const STEP_FRACTION: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// t → 0⁻
    Minus,
    /// t → 0⁺
    Plus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Minus => -1.0,
            Side::Plus => 1.0,
        }
    }

    pub fn of(t: f64) -> Self {
        if t < 0.0 {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Derivative {
    pub t: f64,
    pub value: f64,
    /// |value − fine| plus the propagated quadrature error: a bound on the
    /// error of the unextrapolated fine difference, so conservative for value.
    pub error: f64,
    pub step: f64,
    /// Central differences at steps h and h/2.
    pub coarse: f64,
    pub fine: f64,
    pub converged: bool,
}

/// d/dt ‖Vₜ‖(φ) by central differences at h and h/2 combined by one
/// Richardson step.
pub fn mass_time_derivative(family: &CatalogImmersion, phi: &TestFunction, cfg: &QuadratureConfig) -> Result<Derivative> {
    let t = family
        .time()
        .ok_or_else(|| Error::Precondition(format!("{} is not time-indexed", family.kind())))?;
    if t.abs() < MIN_TIME {
        return Err(Error::Precondition(format!(
            "|t| = {} is below {MIN_TIME}; use limit extrapolation",
            t.abs()
        )));
    }
    let h = STEP_FRACTION * t.abs();
    let m = |dt: f64| surface_integrals(&family.with_time(t + dt)?, phi, cfg).map(|s| s.mass);
    let (p1, m1, p2, m2) = (m(h)?, m(-h)?, m(h / 2.0)?, m(-h / 2.0)?);
    let coarse = (p1.value - m1.value) / (2.0 * h);
    let fine = (p2.value - m2.value) / h;
    let value = (4.0 * fine - coarse) / 3.0;
    let quad = ((p1.error + m1.error) / (2.0 * h) + 4.0 * (p2.error + m2.error) / h) / 3.0;
    Ok(Derivative {
        t,
        value,
        error: (value - fine).abs() + quad,
        step: h,
        coarse,
        fine,
        converged: p1.converged && m1.converged && p2.converged && m2.converged,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitConfig {
    pub t0: f64,
    /// K: the sequence is t₀·2⁻ᵏ, k = 0…K.
    pub levels: usize,
    pub rel_tol: f64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self {
            t0: 1.0,
            levels: 10,
            rel_tol: 1e-3,
        }
    }
}

impl LimitConfig {
    fn times(&self, side: Side) -> Result<Vec<f64>> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) || self.levels < 1 {
            return Err(Error::InvalidParams(format!(
                "need t0 > 0 and at least one level, got t0 = {}, K = {}",
                self.t0, self.levels
            )));
        }
        Ok((0..=self.levels)
            .map(|k| side.sign() * self.t0 * 0.5f64.powi(k as i32))
            .collect())
    }
}

/// The t → 0 limit varifold of a time-indexed family.
pub fn limit_target(family: &CatalogImmersion) -> Result<CatalogImmersion> {
    let params = *family
        .cone_params()
        .ok_or_else(|| Error::Precondition("limit targets exist for the cone families only".into()))?;
    if family.half_domain() {
        return CatalogImmersion::new(Kind::ConePp, params);
    }
    let kind = match family.kind() {
        Kind::ShrinkerSt => Kind::LimitS0,
        Kind::ExpanderEt => Kind::LimitE0,
        Kind::VtCase2 => Kind::LimitV0Case2,
        Kind::VtCase3 => Kind::LimitV0Case3,
        k => return Err(Error::Precondition(format!("{k} has no t → 0 limit in the catalog"))),
    };
    CatalogImmersion::new(kind, params)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitMatch {
    pub side: Side,
    pub times: Vec<f64>,
    pub deltas: Vec<f64>,
    pub delta_errors: Vec<f64>,
    pub extrapolated: f64,
    pub extrapolation_error: f64,
    pub target: f64,
    pub target_error: f64,
    pub target_kind: Kind,
    pub tolerance: f64,
    pub passed: bool,
    pub converged: bool,
}

/// δ(Vₜ, φ)(h) along t = ±t₀·2⁻ᵏ, extrapolated to t = 0 by L = 2δ_K − δ_{K−1}
/// and compared with δ(V₀, φ)(h(V₀)).
pub fn limit_match(
    family: &CatalogImmersion,
    phi: &TestFunction,
    side: Side,
    lcfg: &LimitConfig,
    cfg: &QuadratureConfig,
) -> Result<LimitMatch> {
    let at0 = phi.value_at_origin();
    if at0 != 0.0 {
        return Err(Error::Precondition(format!(
            "φ(0) = {at0} ≠ 0; the limit is −∞, use classify_divergence"
        )));
    }
    let times = lcfg.times(side)?;
    let mut deltas = Vec::with_capacity(times.len());
    let mut errors = Vec::with_capacity(times.len());
    let mut converged = true;
    for &t in &times {
        let s = surface_integrals(&family.with_time(t)?, phi, cfg)?;
        deltas.push(s.first_variation());
        errors.push(s.first_variation_error());
        converged &= s.converged();
    }
    let k = deltas.len() - 1;
    let extrapolated = 2.0 * deltas[k] - deltas[k - 1];
    let limit = limit_target(family)?;
    let s0 = surface_integrals(&limit, phi, cfg)?;
    converged &= s0.converged();
    let target = s0.first_variation();
    let tolerance = lcfg.rel_tol * (1.0 + target.abs());
    Ok(LimitMatch {
        side,
        times,
        extrapolation_error: (extrapolated - deltas[k]).abs(),
        deltas,
        delta_errors: errors,
        extrapolated,
        target,
        target_error: s0.first_variation_error(),
        target_kind: limit.kind(),
        tolerance,
        passed: (extrapolated - target).abs() < tolerance,
        converged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceClass {
    Finite,
    MinusInfinity,
    Inconclusive,
}

/// Least-squares fit y ≈ A·x + B.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthFit {
    pub a: f64,
    pub b: f64,
    pub sigma_a: f64,
    pub residual_rms: f64,
    pub n: usize,
}

pub fn fit_log_growth(x: &[f64], y: &[f64]) -> Option<GrowthFit> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let ssr: f64 = x.iter().zip(y).map(|(u, v)| (v - a * u - b).powi(2)).sum();
    Some(GrowthFit {
        a,
        b,
        sigma_a: (ssr / (nf - 2.0) / sxx).sqrt(),
        residual_rms: (ssr / nf).sqrt(),
        n,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceConfig {
    /// Largest |t| (or truncation η on the limit side) in the sequence.
    pub t0: f64,
    pub levels: usize,
}

impl Default for DivergenceConfig {
    fn default() -> Self {
        Self { t0: 1e-3, levels: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub class: DivergenceClass,
    /// The sequence variable: |t| for a family, η for a truncated limit.
    pub scales: Vec<f64>,
    /// ∫φ|h|² d‖V‖ at each scale.
    pub integrals: Vec<f64>,
    pub fit: Option<GrowthFit>,
    /// 2π(p − q)²/√(pq)·φ(0), per branch of the first parameter.
    pub unit_slope: f64,
    /// A divided by the unit slope and the number of branches.
    pub normalized_slope: f64,
    /// Log-slope of 2·asinh(a/√ε) fitted on the same scales.
    pub reduced_model_slope: f64,
    /// |normalized − reduced| / reduced.
    pub reduced_model_deviation: f64,
}

/// ∫_{|y|≤a} dy/√(y² + ε)
pub fn reduced_model(a: f64, eps: f64) -> f64 {
    2.0 * (a / eps.sqrt()).asinh()
}

fn classify(fit: Option<&GrowthFit>, integrals: &[f64]) -> DivergenceClass {
    if let Some(f) = fit {
        if f.a > 0.0 && f.a > 3.0 * f.sigma_a {
            return DivergenceClass::MinusInfinity;
        }
    }
    let n = integrals.len();
    if n >= 2 && (integrals[n - 1] - integrals[n - 2]).abs() < 1e-6 {
        DivergenceClass::Finite
    } else {
        DivergenceClass::Inconclusive
    }
}

fn unit_slope(imm: &CatalogImmersion, phi: &TestFunction) -> f64 {
    let cp = imm.cone_params().expect("cone family");
    std::f64::consts::TAU * cp.angle_slope().powi(2) / (cp.pf() * cp.qf()).sqrt() * phi.value_at_origin()
}

fn branches(imm: &CatalogImmersion) -> f64 {
    if imm.first_param_min() < 0.0 {
        2.0
    } else {
        1.0
    }
}

/// Fits ∫φ|h(Vₜ)|² d‖Vₜ‖ ≈ A·log(1/|t|) + B along t = ±t₀·2⁻ᵏ and
/// classifies −∞ when A exceeds three standard errors.
pub fn classify_divergence(
    family: &CatalogImmersion,
    phi: &TestFunction,
    side: Side,
    dcfg: &DivergenceConfig,
    cfg: &QuadratureConfig,
) -> Result<DivergenceReport> {
    let at0 = phi.value_at_origin();
    if !(at0 > 0.0) {
        return Err(Error::Precondition(format!(
            "φ(0) = {at0}; classification needs φ(0) > 0, use limit_match"
        )));
    }
    let cp = *family
        .cone_params()
        .ok_or_else(|| Error::Precondition("needs a cone family".into()))?;
    let lcfg = LimitConfig {
        t0: dcfg.t0,
        levels: dcfg.levels,
        ..LimitConfig::default()
    };
    let times = lcfg.times(side)?;
    let mut integrals = Vec::with_capacity(times.len());
    for &t in &times {
        integrals.push(surface_integrals(&family.with_time(t)?, phi, cfg)?.h_term.value);
    }
    let scales: Vec<f64> = times.iter().map(|t| t.abs()).collect();
    let x: Vec<f64> = scales.iter().map(|s| (1.0 / s).ln()).collect();
    let fit = fit_log_growth(&x, &integrals);
    // the |y| ≤ a window of the reduced model, with y = √(|t|/c)·sinh μ
    let a = phi.radial_range().1 / (cp.pf() + cp.qf()).sqrt();
    let c = cp.self_similar_constant();
    let model: Vec<f64> = scales.iter().map(|s| reduced_model(a, s / c)).collect();
    let model_fit = fit_log_growth(&x, &model);
    let unit = unit_slope(family, phi);
    // each branch contributes ½·log(1/|t|) to the μ-length
    let normalized = fit.map(|f| f.a / (unit * branches(family) / 2.0)).unwrap_or(f64::NAN);
    let reduced = model_fit.map(|f| f.a).unwrap_or(f64::NAN);
    Ok(DivergenceReport {
        class: classify(fit.as_ref(), &integrals),
        scales,
        integrals,
        fit,
        unit_slope: unit,
        normalized_slope: normalized,
        reduced_model_slope: reduced,
        reduced_model_deviation: ((normalized - reduced) / reduced).abs(),
    })
}

/// The same classification on a limit varifold, using ∫_{|y|>η} along
/// η = η₀·2⁻ᵏ.
pub fn classify_limit_divergence(
    limit: &CatalogImmersion,
    phi: &TestFunction,
    dcfg: &DivergenceConfig,
    cfg: &QuadratureConfig,
) -> Result<DivergenceReport> {
    let at0 = phi.value_at_origin();
    if !(at0 > 0.0) {
        return Err(Error::Precondition(format!("φ(0) = {at0}; classification needs φ(0) > 0")));
    }
    let (lo, hi) = phi.radial_range();
    let support = limit.radial_support(lo, hi);
    let scales: Vec<f64> = (0..=dcfg.levels).map(|k| dcfg.t0 * 0.5f64.powi(k as i32)).collect();
    let mut integrals = Vec::with_capacity(scales.len());
    for &eta in &scales {
        let clipped: Vec<(f64, f64)> = support
            .iter()
            .filter_map(|&(a, b)| {
                let (a, b) = if b <= 0.0 { (a, b.min(-eta)) } else { (a.max(eta), b) };
                (a < b).then_some((a, b))
            })
            .collect();
        integrals.push(surface_integrals_on(limit, phi, &clipped, cfg)?.h_term.value);
    }
    let x: Vec<f64> = scales.iter().map(|s| (1.0 / s).ln()).collect();
    let fit = fit_log_growth(&x, &integrals);
    let unit = unit_slope(limit, phi);
    let normalized = fit.map(|f| f.a / (unit * branches(limit))).unwrap_or(f64::NAN);
    // ∫_{η<|y|<a} dy/|y| has log-slope 2 in 1/η over both branches, 1 per branch
    Ok(DivergenceReport {
        class: classify(fit.as_ref(), &integrals),
        scales,
        integrals,
        fit,
        unit_slope: unit,
        normalized_slope: normalized,
        reduced_model_slope: 1.0,
        reduced_model_deviation: (normalized - 1.0).abs(),
    })
}

/// First variation on the limit side with the −∞ class made explicit.
pub fn limit_first_variation(family: &CatalogImmersion, phi: &TestFunction, cfg: &QuadratureConfig) -> Result<FirstVariation> {
    super::integrals::first_variation(&limit_target(family)?, phi, cfg)
}
