//! Grid sweeps of the pointwise identities over catalog immersions, and the
//! cone combinatorics report. These back the geometry commands of the CLI.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::brakke::{Status, Verdict};
use crate::complex_space::{apply_j, circular_distance, dot};
use crate::cone_geometry::{
    asymptotic_cone_pair, identify_coincidences, image_distance, reparametrization_residual, shift_witness, ConeId,
    Reparametrization,
};
use crate::error::Result;
use crate::immersions::controls::{GradientGraph, NonLagrangianTorus};
use crate::immersions::{CatalogImmersion, ConeParams, Immersion, Kind, LambdaChart, LambdaParams, Sign};
use crate::lagrangian_calculus::{
    analyze, hamiltonian_stationarity_residual, induced_metric, lagrangian_angle, lagrangian_residual,
    self_similarity_residual, sff_trace, SolitonKind,
};
use crate::par::{try_map_with, Execution};

/// Tolerances of the pointwise checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryTolerances {
    pub lagrangian: f64,
    pub closed_form: f64,
    pub beta: f64,
    pub stationarity: f64,
    pub soliton: f64,
    pub special_h: f64,
}

impl Default for GeometryTolerances {
    fn default() -> Self {
        Self {
            lagrangian: 1e-12,
            closed_form: 1e-10,
            beta: 1e-10,
            stationarity: 1e-9,
            soliton: 1e-9,
            special_h: 1e-10,
        }
    }
}

/// Largest first parameter used by the grids.
pub const GRID_EXTENT: f64 = 2.0;

/// A grid of n points per direction on the smooth part of the domain:
/// midpoints in u (never u = 0), θ = 2πj/n. λ-family grids sweep the free
/// coordinates over [−1.5, 1.5] and keep points well inside the chart.
pub fn parameter_grid(imm: &CatalogImmersion, n: usize) -> Vec<Vec<f64>> {
    let thetas: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
    if imm.kind() == Kind::GammaPq {
        return thetas.into_iter().map(|t| vec![t]).collect();
    }
    if let Some((lp, chart)) = imm.lambda_params() {
        return lambda_grid(lp, chart, n, &thetas);
    }
    let lo = if imm.first_param_min() == 0.0 { 0.0 } else { -GRID_EXTENT };
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let u = lo + (GRID_EXTENT - lo) * (i as f64 + 0.5) / n as f64;
        if u.abs() < 1e-9 {
            continue;
        }
        for &t in &thetas {
            out.push(vec![u, t]);
        }
    }
    out
}

fn lambda_grid(lp: &LambdaParams, chart: LambdaChart, n: usize, thetas: &[f64]) -> Vec<Vec<f64>> {
    let free = lp.n() - 1;
    let lam = lp.lambdas();
    let others: Vec<f64> = (0..lp.n()).filter(|i| *i != chart.solved).map(|i| lam[i]).collect();
    let scale = (lp.level() / lam[chart.solved]).abs().max(1e-3);
    let mut out = Vec::new();
    let total = n.pow(free as u32);
    for idx in 0..total {
        let mut rest = idx;
        let mut x = Vec::with_capacity(free + 1);
        for _ in 0..free {
            x.push(-1.5 + 3.0 * ((rest % n) as f64 + 0.5) / n as f64);
            rest /= n;
        }
        let arg = (lp.level() - others.iter().zip(&x).map(|(l, v)| l * v * v).sum::<f64>()) / lam[chart.solved];
        if arg < 0.05 * scale {
            continue;
        }
        for &t in thetas {
            let mut p = x.clone();
            p.push(t);
            out.push(p);
        }
    }
    out
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / b.abs().max(scale).max(f64::MIN_POSITIVE)
}

/// Slope of β in the last parameter.
pub fn beta_slope(imm: &CatalogImmersion) -> Option<f64> {
    if let Some(cp) = imm.cone_params() {
        return Some(cp.angle_slope());
    }
    imm.lambda_params().map(|(lp, _)| lp.lambda_sum())
}

/// The soliton type of a self-similar catalog object, if any.
pub fn soliton_kind(imm: &CatalogImmersion) -> Option<SolitonKind> {
    if imm.lambda_params().is_some() {
        return imm.soliton_coefficient().map(|k| {
            if k < 0.0 {
                SolitonKind::Shrinker
            } else {
                SolitonKind::Expander
            }
        });
    }
    match imm.kind() {
        Kind::ShrinkerS | Kind::ShrinkerSt | Kind::VtCase3 => Some(SolitonKind::Shrinker),
        Kind::ExpanderE | Kind::ExpanderEt | Kind::VtCase2 => Some(SolitonKind::Expander),
        _ => None,
    }
}

/// Worst values of each pointwise identity over a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryCheck {
    pub label: String,
    pub kind: Kind,
    pub points: usize,
    pub lagrangian_residual: f64,
    pub metric: f64,
    pub area_density: f64,
    pub norm_sq: f64,
    pub h_norm_sq: f64,
    pub h_density: f64,
    pub beta: f64,
    pub stationarity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soliton: Option<f64>,
    /// max |H| when β has slope 0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub special_h: Option<f64>,
}

impl GeometryCheck {
    /// Closed-form concordance, the worst of the five relative deviations.
    pub fn closed_form(&self) -> f64 {
        [self.metric, self.area_density, self.norm_sq, self.h_norm_sq, self.h_density]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn verdicts(&self, tol: &GeometryTolerances) -> Vec<Verdict> {
        let mut v = vec![
            Verdict::above("grid_points", self.points as f64, 0.0).with_status(if self.points > 0 {
                Status::Pass
            } else {
                Status::Inconclusive
            }),
            Verdict::below("lagrangian", self.lagrangian_residual, tol.lagrangian),
            Verdict::below("closed_form", self.closed_form(), tol.closed_form),
            Verdict::below("beta_slope", self.beta, tol.beta),
            Verdict::below("hamiltonian_stationary", self.stationarity, tol.stationarity),
        ];
        if let Some(s) = self.soliton {
            v.push(Verdict::below("self_similar", s, tol.soliton));
        }
        if let Some(h) = self.special_h {
            v.push(Verdict::below("special_lagrangian_h", h, tol.special_h));
        }
        v
    }

    pub fn status(&self, tol: &GeometryTolerances) -> Status {
        Status::all(self.verdicts(tol).iter().map(|v| v.status))
    }
}

pub fn geometry_check(imm: &CatalogImmersion, n: usize) -> Result<GeometryCheck> {
    let grid = parameter_grid(imm, n);
    let slope = beta_slope(imm).unwrap_or(0.0);
    let sol = soliton_kind(imm);
    let special = imm.lambda_params().is_some() && slope == 0.0;
    let mut c = GeometryCheck {
        label: imm.name(),
        kind: imm.kind(),
        points: grid.len(),
        lagrangian_residual: 0.0,
        metric: 0.0,
        area_density: 0.0,
        norm_sq: 0.0,
        h_norm_sq: 0.0,
        h_density: 0.0,
        beta: 0.0,
        stationarity: 0.0,
        soliton: sol.map(|_| 0.0),
        special_h: special.then_some(0.0),
    };
    if imm.kind() == Kind::GammaPq {
        gamma_check(imm, &grid, slope, &mut c)?;
        return Ok(c);
    }
    for x in &grid {
        let g = analyze(imm, x)?;
        let r = imm.closed_form_reference(x)?;
        let gscale = r.metric.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        c.lagrangian_residual = c.lagrangian_residual.max(g.lagrangian_residual);
        for (a, b) in g.metric.iter().zip(&r.metric) {
            c.metric = c.metric.max(rel(*a, *b, gscale));
        }
        c.area_density = c.area_density.max(rel(g.area_density, r.area_density, 0.0));
        c.norm_sq = c.norm_sq.max(rel(imm.evaluate(x)?.norm_sq(), r.norm_sq, 0.0));
        let hs = g.h_norm_sq();
        c.h_norm_sq = c.h_norm_sq.max(rel(hs, r.h_norm_sq, if special { 1.0 } else { 0.0 }));
        c.h_density = c.h_density.max(rel(
            hs * g.area_density,
            r.h_norm_sq * r.area_density,
            if special { 1.0 } else { 0.0 },
        ));
        // β(…, θ) − β(…, 0) against slope·θ, mod 2π
        let mut x0 = x.clone();
        *x0.last_mut().expect("nonempty") = 0.0;
        let b0 = lagrangian_angle(&imm.evaluate_jet(&x0)?.tangents())?;
        let th = *x.last().expect("nonempty");
        c.beta = c.beta.max(circular_distance(g.beta - b0, slope * th));
        c.stationarity = c.stationarity.max(g.beta_laplacian.abs());
        if let Some(kind) = sol {
            let s = self_similarity_residual(imm, x, kind)?;
            c.soliton = c.soliton.map(|m| m.max(s));
        }
        if special {
            c.special_h = c.special_h.map(|m| m.max(g.h.norm()));
        }
    }
    Ok(c)
}

/// The link curve: Legendrian residual ⟨Jγ′, γ⟩, the curve metric, the
/// ambient curvature from the second fundamental form, and the angle of the
/// cone frame (γ, γ′).
fn gamma_check(imm: &CatalogImmersion, grid: &[Vec<f64>], slope: f64, c: &mut GeometryCheck) -> Result<()> {
    let angle = |th: f64| -> Result<f64> {
        let j = imm.evaluate_jet(&[th])?;
        lagrangian_angle(&[j.position(), j.partial(0)])
    };
    let b0 = angle(0.0)?;
    for x in grid {
        let jet = imm.evaluate_jet(x)?;
        let tangents = jet.tangents();
        let r = imm.closed_form_reference(x)?;
        let pos = jet.position();
        let metric = induced_metric(&tangents)?;
        let scale = tangents[0].norm() * pos.norm();
        c.lagrangian_residual = c
            .lagrangian_residual
            .max(dot(&apply_j(&tangents[0]), &pos).abs() / scale);
        c.metric = c.metric.max(rel(metric.g(0, 0), r.metric[0], 0.0));
        c.area_density = c.area_density.max(rel(metric.area_density(), r.area_density, 0.0));
        c.norm_sq = c.norm_sq.max(rel(pos.norm_sq(), r.norm_sq, 0.0));
        let k2 = sff_trace(&jet, &tangents, &metric).norm_sq();
        c.h_norm_sq = c.h_norm_sq.max(rel(k2, r.h_norm_sq, 0.0));
        c.h_density = c
            .h_density
            .max(rel(k2 * metric.area_density(), r.h_norm_sq * r.area_density, 0.0));
        c.beta = c.beta.max(circular_distance(angle(x[0])? - b0, slope * x[0]));
    }
    Ok(())
}

/// Every cone-family catalog object for (p, q), time families at |t| = t.
pub fn cone_catalog(params: ConeParams, t: f64) -> Result<Vec<CatalogImmersion>> {
    let mut out = vec![CatalogImmersion::gamma(params)];
    for (a, b) in [
        (Sign::Plus, Sign::Plus),
        (Sign::Plus, Sign::Minus),
        (Sign::Minus, Sign::Plus),
        (Sign::Minus, Sign::Minus),
    ] {
        out.push(CatalogImmersion::cone(params, a, b));
    }
    for k in [Kind::ShrinkerS, Kind::ExpanderE] {
        out.push(CatalogImmersion::new(k, params)?);
    }
    out.push(CatalogImmersion::at_time(Kind::ShrinkerSt, params, -t)?);
    out.push(CatalogImmersion::at_time(Kind::ExpanderEt, params, t)?);
    out.push(CatalogImmersion::at_time(Kind::VtCase2, params, t)?);
    out.push(CatalogImmersion::at_time(Kind::VtCase3, params, -t)?);
    for k in [Kind::LimitS0, Kind::LimitE0, Kind::LimitV0Case2, Kind::LimitV0Case3] {
        out.push(CatalogImmersion::new(k, params)?);
    }
    Ok(out)
}

/// Index to solve for: one with C/λᵢ > 0 so the chart contains the free
/// origin, or for C = 0 one whose sign some other λ opposes.
pub fn lambda_chart_index(lambdas: &[f64], level: f64) -> usize {
    let pick = if level != 0.0 {
        lambdas.iter().position(|l| level / l > 0.0)
    } else {
        lambdas
            .iter()
            .position(|l| lambdas.iter().any(|m| m.signum() != l.signum()))
    };
    pick.unwrap_or(0)
}

/// The λ-family level set and its time slice at t.
pub fn lambda_catalog(lambdas: &[f64], level: f64, t: f64) -> Result<Vec<CatalogImmersion>> {
    let lp = LambdaParams::new(lambdas.to_vec(), level)?;
    let sum: f64 = lambdas.iter().sum();
    let chart = LambdaChart::new(lambda_chart_index(lambdas, level), Sign::Plus);
    let chart_t = LambdaChart::new(lambda_chart_index(lambdas, -2.0 * t * sum), Sign::Plus);
    Ok(vec![
        CatalogImmersion::lambda_family(lp, chart)?,
        CatalogImmersion::lambda_family_t(lambdas.to_vec(), t, chart_t)?,
    ])
}

pub fn geometry_checks(imms: &[CatalogImmersion], n: usize, exec: Execution) -> Result<Vec<GeometryCheck>> {
    try_map_with(exec, imms, |imm| geometry_check(imm, n))
}

/// A surface that must fail one identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ControlCheck {
    pub label: String,
    pub points: usize,
    pub verdict: Verdict,
}

/// The gradient graph must show Δβ ≠ 0 and the torus must fail the
/// Lagrangian test, both by more than `threshold`.
pub fn negative_controls(n: usize, threshold: f64) -> Result<Vec<ControlCheck>> {
    let grid: Vec<[f64; 2]> = (0..n * n)
        .map(|i| {
            let a = -1.5 + 3.0 * ((i % n) as f64 + 0.5) / n as f64;
            let b = -1.5 + 3.0 * ((i / n) as f64 + 0.5) / n as f64;
            [a, b]
        })
        .collect();
    let gg = GradientGraph::new(2)?;
    let mut lap: f64 = 0.0;
    for x in &grid {
        lap = lap.max(hamiltonian_stationarity_residual(&gg, x)?);
    }
    let mut omega: f64 = 0.0;
    for x in &grid {
        let t = NonLagrangianTorus.evaluate_jet(x)?.tangents();
        omega = omega.max(lagrangian_residual(&t)?);
    }
    Ok(vec![
        ControlCheck {
            label: gg.name(),
            points: grid.len(),
            verdict: Verdict::above("not_hamiltonian_stationary", lap, threshold),
        },
        ControlCheck {
            label: NonLagrangianTorus.name(),
            points: grid.len(),
            verdict: Verdict::above("not_lagrangian", omega, threshold),
        },
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairDistance {
    pub a: String,
    pub b: String,
    pub coincident: bool,
    pub distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift_witness: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeReport {
    pub params: ConeParams,
    pub partition: Vec<Vec<String>>,
    pub pairs: Vec<PairDistance>,
    pub reparametrization: Reparametrization,
    pub reparametrization_residual: f64,
    pub asymptotic_pairs: Vec<(Kind, [String; 2])>,
    pub verdicts: Vec<Verdict>,
    pub status: Status,
}

/// Tolerances of the cone report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeTolerances {
    pub coincident: f64,
    pub distinct: f64,
    pub shift: f64,
    pub reparametrization: f64,
}

impl Default for ConeTolerances {
    fn default() -> Self {
        Self {
            coincident: 1e-3,
            distinct: 0.05,
            shift: 1e-12,
            reparametrization: 1e-12,
        }
    }
}

pub fn cone_report(params: ConeParams, samples: usize, seed: u64, tol: &ConeTolerances) -> Result<ConeReport> {
    let classes = identify_coincidences(params);
    let partition: Vec<Vec<String>> = classes.iter().map(|c| c.iter().map(ConeId::label).collect()).collect();
    let all: Vec<ConeId> = classes.iter().flatten().copied().collect();
    let mut ids = all.clone();
    ids.sort_by_key(|c| c.label());
    let mut pairs = Vec::new();
    let mut verdicts = Vec::new();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            let (a, b) = (ids[i], ids[j]);
            let coincident = classes.iter().any(|c| c.contains(&a) && c.contains(&b));
            let distance = image_distance(&a.immersion(), &b.immersion(), 1.0, samples, seed)?;
            let name = format!("{}~{}", a.label(), b.label());
            let witness = if coincident {
                let w = shift_witness(&a, &b, 64)?;
                verdicts.push(Verdict::below(format!("shift_{name}"), w, tol.shift));
                verdicts.push(Verdict::below(format!("coincident_{name}"), distance, tol.coincident));
                Some(w)
            } else {
                verdicts.push(Verdict::above(format!("distinct_{name}"), distance, tol.distinct));
                None
            };
            pairs.push(PairDistance {
                a: a.label(),
                b: b.label(),
                coincident,
                distance,
                shift_witness: witness,
            });
        }
    }
    let which = Reparametrization::for_parity(params.parity());
    let res = reparametrization_residual(which, params, 64)?;
    verdicts.push(Verdict::below("reparametrization", res, tol.reparametrization));
    let mut asymptotic_pairs = Vec::new();
    for k in [Kind::ShrinkerSt, Kind::ExpanderEt, Kind::VtCase2, Kind::VtCase3] {
        if let Ok((a, b)) = asymptotic_cone_pair(k, params) {
            asymptotic_pairs.push((k, [a.label(), b.label()]));
        }
    }
    let status = Status::all(verdicts.iter().map(|v| v.status));
    Ok(ConeReport {
        params,
        partition,
        pairs,
        reparametrization: which,
        reparametrization_residual: res,
        asymptotic_pairs,
        verdicts,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_avoid_singular_points() {
        let pr = ConeParams::new(3, 2).unwrap();
        for imm in cone_catalog(pr, 1.0).unwrap() {
            let g = parameter_grid(&imm, 7);
            assert!(!g.is_empty());
            for x in &g {
                assert!(imm.frame(x).is_ok(), "{} at {x:?}", imm.kind());
            }
        }
        let lam = lambda_catalog(&[1.0, 2.0, -1.5], 1.0, -0.5).unwrap();
        for imm in &lam {
            let g = parameter_grid(imm, 5);
            assert!(!g.is_empty());
            assert!(g.iter().all(|x| imm.frame(x).is_ok()));
        }
    }

    #[test]
    fn controls_fail_their_identity() {
        for c in negative_controls(8, 1e-3).unwrap() {
            assert_eq!(c.verdict.status, Status::Pass, "{c:?}");
        }
    }

    #[test]
    fn shrinker_check_is_clean() {
        let s = CatalogImmersion::new(Kind::ShrinkerS, ConeParams::new(2, 1).unwrap()).unwrap();
        let c = geometry_check(&s, 6).unwrap();
        assert_eq!(c.status(&GeometryTolerances::default()), Status::Pass, "{c:?}");
    }
}
