use serde::Serialize;

use super::test_function::TestFunction;
use crate::complex_space::{apply_j, dot};
use crate::error::{Error, Result};
use crate::immersions::{CatalogImmersion, Immersion};
use super::test_function::TestFunctionKind;
use crate::quadrature::{integrate_2d_split, QuadratureConfig};

/// A scalar integral with its quadrature error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// ‖V‖(φ), ∫φ|h|² d‖V‖ and ∫Dφ·h d‖V‖ from one pass over the surface.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceIntegrals {
    pub mass: Integral,
    pub h_term: Integral,
    pub d_term: Integral,
    pub evaluations: usize,
}

impl SurfaceIntegrals {
    /// δ(V, φ)(h) = −∫φ|h|² + ∫Dφ·h
    pub fn first_variation(&self) -> f64 {
        -self.h_term.value + self.d_term.value
    }

    pub fn first_variation_error(&self) -> f64 {
        self.h_term.error + self.d_term.error
    }

    pub fn converged(&self) -> bool {
        self.mass.converged && self.h_term.converged && self.d_term.converged
    }

    /// Largest error estimate among the three integrals.
    pub fn max_error(&self) -> f64 {
        self.mass.error.max(self.h_term.error).max(self.d_term.error)
    }
}

/// δ(V, φ)(h), or the −∞ class when φ(0) > 0 on a surface through the origin.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum FirstVariation {
    Finite {
        value: f64,
        h_term: f64,
        d_term: f64,
        error: f64,
        converged: bool,
    },
    MinusInfinity,
}

impl FirstVariation {
    pub fn finite_value(&self) -> Option<f64> {
        match self {
            FirstVariation::Finite { value, .. } => Some(*value),
            FirstVariation::MinusInfinity => None,
        }
    }
}

fn require_surface(imm: &CatalogImmersion) -> Result<()> {
    if !imm.is_surface() {
        return Err(Error::Precondition(format!(
            "{} is not one of the equivariant surfaces in ℂ²",
            imm.name()
        )));
    }
    Ok(())
}

/// Whether the image passes through the origin.
pub fn reaches_origin(imm: &CatalogImmersion) -> bool {
    imm.kind().is_limit() || imm.kind().is_cone()
}

/// Slope of β in θ; β does not depend on the first parameter.
fn beta_slope(imm: &CatalogImmersion) -> f64 {
    imm.cone_params().map(|c| c.angle_slope()).unwrap_or(0.0)
}

/// [φ·dA, φ|H|²·dA, Dφ·H·dA] per dμ dθ at one parameter point.
fn integrand(imm: &CatalogImmersion, phi: &TestFunction, slope: f64, u: f64, th: f64, out: &mut [f64]) -> Result<()> {
    let fr = imm.frame(&[u, th])?;
    let (v, dphi) = phi.value_and_gradient(&fr.position);
    if v == 0.0 && dphi.max_abs() == 0.0 {
        return Ok(());
    }
    let (fu, ft) = (&fr.tangents[0], &fr.tangents[1]);
    let (g11, g12, g22) = (dot(fu, fu), dot(fu, ft), dot(ft, ft));
    let det = g11 * g22 - g12 * g12;
    if !(det > 0.0) {
        return Err(Error::DegenerateMetric { det });
    }
    let dens = det.sqrt();
    // H = J(gᵃᵇ ∂_bβ ∂ₐF) with ∂β = (0, slope)
    let (i12, i22) = (-g12 / det, g11 / det);
    let h = apply_j(&fu.scale(slope * i12).axpy(slope * i22, ft));
    let h2 = slope * slope * i22;
    out[0] = v * dens;
    out[1] = v * h2 * dens;
    out[2] = dot(&dphi, &h) * dens;
    Ok(())
}

/// Samples per unit of p + q when locating the θ-edges of a shifted bump.
const EDGE_SAMPLES: usize = 48;

/// Root of g in [lo, hi] given opposite signs at the ends.
fn bisect(g: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut glo: f64) -> Result<f64> {
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Extremum of g on [a, b] by golden section; `sign` = 1 for a minimum,
/// −1 for a maximum. Returns (θ, g(θ)).
fn golden(g: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, sign: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - r * (b - a), a + r * (b - a));
    let (mut gc, mut gd) = (sign * g(c)?, sign * g(d)?);
    for _ in 0..80 {
        if b - a < 1e-13 {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = sign * g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = sign * g(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, g(x)?))
}

/// θ at which |F(u, θ) − c| = R, for shifted bumps. Radial and annular
/// bumps see a θ-independent |F| on these surfaces and need no split.
///
/// Sign changes between samples are bisected. Arcs (or gaps) narrower
/// than the sample step show up as a sampled local minimum (maximum) of
/// g = |F − c|² − R² with no sign change; those are refined by golden
/// section so that the θ-support is exact down to tangency.
fn support_edges(imm: &CatalogImmersion, phi: &TestFunction, u: f64, out: &mut Vec<f64>) -> Result<()> {
    if phi.kind != TestFunctionKind::ShiftedBump {
        return Ok(());
    }
    let cp = imm.cone_params().expect("surface kind");
    let n = EDGE_SAMPLES * (cp.p() + cp.q()) as usize;
    let r2 = phi.radius * phi.radius;
    let g = |th: f64| -> Result<f64> {
        let th = th.rem_euclid(std::f64::consts::TAU);
        Ok((&imm.evaluate(&[u, th])? - &phi.center).norm_sq() - r2)
    };
    let step = std::f64::consts::TAU / n as f64;
    let samples: Vec<f64> = (0..n).map(|k| g(step * k as f64)).collect::<Result<_>>()?;
    let at = |k: usize| samples[k % n];
    for k in 0..n {
        let (a, b) = (at(k), at(k + 1));
        let th = step * k as f64;
        if (a < 0.0) != (b < 0.0) {
            out.push(bisect(&g, th, th + step, a)?);
            continue;
        }
        // hidden arc or gap around sample k + 1
        let c = at(k + 2);
        if (b < 0.0) != (c < 0.0) {
            continue;
        }
        let sign = if b >= 0.0 && b <= a && b < c {
            1.0
        } else if b < 0.0 && b >= a && b > c {
            -1.0
        } else {
            continue;
        };
        let (x, gx) = golden(&g, th, th + 2.0 * step, sign)?;
        if (gx < 0.0) != (b < 0.0) {
            out.push(bisect(&g, th, x, a)?);
            out.push(bisect(&g, x, th + 2.0 * step, gx)?);
        }
    }
    for e in out.iter_mut() {
        *e = e.rem_euclid(std::f64::consts::TAU);
    }
    Ok(())
}

/// u-samples per interval when looking for changes in the θ-support.
const TOPOLOGY_SAMPLES: usize = 64;

fn edge_count(imm: &CatalogImmersion, phi: &TestFunction, u: f64, buf: &mut Vec<f64>) -> Result<usize> {
    buf.clear();
    support_edges(imm, phi, u, buf)?;
    Ok(buf.len())
}

/// Splits the intervals where the outer integrand loses smoothness: at the
/// radial support bounds, and for shifted bumps where the θ-support gains
/// or loses arcs (tangency of the ball to a θ-circle).
fn refine_intervals(imm: &CatalogImmersion, phi: &TestFunction, intervals: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = phi.radial_range();
    let mut breaks: Vec<f64> = imm
        .radial_support(lo, hi)
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .collect();
    if phi.kind == TestFunctionKind::ShiftedBump {
        let mut buf = Vec::new();
        for &(a, b) in intervals {
            let m = TOPOLOGY_SAMPLES;
            let at = |k: usize| a + (b - a) * k as f64 / m as f64;
            let mut prev = edge_count(imm, phi, at(0), &mut buf)?;
            for k in 1..=m {
                let cur = edge_count(imm, phi, at(k), &mut buf)?;
                if cur != prev {
                    let (mut x0, mut x1) = (at(k - 1), at(k));
                    for _ in 0..50 {
                        let mid = 0.5 * (x0 + x1);
                        if edge_count(imm, phi, mid, &mut buf)? == prev {
                            x0 = mid;
                        } else {
                            x1 = mid;
                        }
                    }
                    breaks.push(0.5 * (x0 + x1));
                }
                prev = cur;
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(intervals.len() + breaks.len());
    for &(a, b) in intervals {
        let mut start = a;
        for &x in &breaks {
            let inside = if a < b { x > start && x < b } else { x < start && x > b };
            if inside && (x - start).abs() > 1e-12 * (1.0 + x.abs()) {
                out.push((start, x));
                start = x;
            }
        }
        out.push((start, b));
    }
    Ok(out)
}

/// The three integrals over explicit first-parameter intervals.
pub fn surface_integrals_on(
    imm: &CatalogImmersion,
    phi: &TestFunction,
    intervals: &[(f64, f64)],
    cfg: &QuadratureConfig,
) -> Result<SurfaceIntegrals> {
    require_surface(imm)?;
    let slope = beta_slope(imm);
    let est = integrate_2d_split(
        |u, th, out| integrand(imm, phi, slope, u, th, out),
        |u, cuts| support_edges(imm, phi, u, cuts),
        &refine_intervals(imm, phi, intervals)?,
        (0.0, std::f64::consts::TAU),
        3,
        cfg,
    )?;
    let pick = |i: usize| Integral {
        value: est.value[i],
        error: est.error[i],
        converged: est.converged,
    };
    Ok(SurfaceIntegrals {
        mass: pick(0),
        h_term: pick(1),
        d_term: pick(2),
        evaluations: est.evaluations,
    })
}

/// The three integrals over the exact support {u : φ ∘ F(u, ·) ≢ 0}, which
/// is bounded by solving |F(u)| = r in closed form.
pub fn surface_integrals(imm: &CatalogImmersion, phi: &TestFunction, cfg: &QuadratureConfig) -> Result<SurfaceIntegrals> {
    require_surface(imm)?;
    let (lo, hi) = phi.radial_range();
    surface_integrals_on(imm, phi, &imm.radial_support(lo, hi), cfg)
}

pub fn mass(imm: &CatalogImmersion, phi: &TestFunction, cfg: &QuadratureConfig) -> Result<Integral> {
    Ok(surface_integrals(imm, phi, cfg)?.mass)
}

pub fn first_variation(imm: &CatalogImmersion, phi: &TestFunction, cfg: &QuadratureConfig) -> Result<FirstVariation> {
    require_surface(imm)?;
    if reaches_origin(imm) && phi.value_at_origin() > 0.0 {
        return Ok(FirstVariation::MinusInfinity);
    }
    let s = surface_integrals(imm, phi, cfg)?;
    Ok(FirstVariation::Finite {
        value: s.first_variation(),
        h_term: s.h_term.value,
        d_term: s.d_term.value,
        error: s.first_variation_error(),
        converged: s.converged(),
    })
}

/// (p − q)²/√(pq): the value of |h|²·(area density) per dμ dθ on every
/// shrinker/expander slice.
pub fn h_density_constant(imm: &CatalogImmersion) -> Option<f64> {
    let cp = imm.cone_params()?;
    let k = imm.kind();
    (k.uses_mu()).then(|| cp.angle_slope().powi(2) / (cp.pf() * cp.qf()).sqrt())
}

/// max relative deviation of |H|²·dA from [`h_density_constant`] on a grid
/// of μ ∈ [−3, 3] (or [0, 3]) avoiding 0, θ ∈ [0, 2π).
pub fn h_density_deviation(imm: &CatalogImmersion, grid: usize) -> Result<f64> {
    let target = h_density_constant(imm).ok_or_else(|| {
        Error::Precondition(format!("{} has no constant |h|² density", imm.kind()))
    })?;
    let slope = beta_slope(imm);
    let lo = if imm.half_domain() { 0.0 } else { -3.0 };
    let mut worst: f64 = 0.0;
    for i in 0..grid {
        let mu = lo + (3.0 - lo) * (i as f64 + 0.5) / grid as f64;
        for j in 0..grid {
            let th = std::f64::consts::TAU * j as f64 / grid as f64;
            let fr = imm.frame(&[mu, th])?;
            let (fu, ft) = (&fr.tangents[0], &fr.tangents[1]);
            let (g11, g12, g22) = (dot(fu, fu), dot(fu, ft), dot(ft, ft));
            let det = g11 * g22 - g12 * g12;
            let val = slope * slope * (g11 / det) * det.sqrt();
            worst = worst.max((val - target).abs() / target);
        }
    }
    Ok(worst)
}
