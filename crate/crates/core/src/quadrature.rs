//! Adaptive Gauss–Legendre quadrature for vector-valued integrands.
//!
//! Each panel is integrated with an n-point and a 2n-point rule; the 2n
//! result is kept and their difference is the panel's error estimate. The
//! panel with the largest scaled error is bisected until the summed
//! estimate meets the tolerance or the panel budget runs out, in which case
//! the result is returned with `converged = false` rather than an error.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Values = SmallVec<[f64; 8]>;

/// Nodes and weights on [−1, 1].
#[derive(Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// n-point Gauss–Legendre rule, computed once per n and cached.
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(n).or_insert_with(|| Arc::new(compute_rule(n))).clone()
}

fn compute_rule(n: usize) -> Rule {
    assert!(n >= 1, "rule order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureConfig {
    /// n of the (n, 2n) pair.
    pub order: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            order: 10,
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_panels: 4000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tolerance(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.order == 0 || self.max_panels == 0 || !(self.rel_tol >= 0.0) || !(self.abs_tol >= 0.0) {
            return Err(Error::Quadrature(format!("invalid configuration {self:?}")));
        }
        Ok(())
    }
}

/// Integral value with its error estimate, one entry per component.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: Values,
    pub error: Values,
    pub evaluations: usize,
    pub converged: bool,
}

impl Estimate {
    pub fn zeros(dim: usize) -> Self {
        Self {
            value: smallvec::smallvec![0.0; dim],
            error: smallvec::smallvec![0.0; dim],
            evaluations: 0,
            converged: true,
        }
    }

    fn accumulate(&mut self, other: &Estimate) {
        for (a, b) in self.value.iter_mut().zip(&other.value) {
            *a += b;
        }
        for (a, b) in self.error.iter_mut().zip(&other.error) {
            *a += b;
        }
        self.evaluations += other.evaluations;
        self.converged &= other.converged;
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Values,
    error: Values,
}

struct Integrator<'r, F> {
    f: F,
    dim: usize,
    coarse: &'r Rule,
    fine: &'r Rule,
    buf: Values,
    coarse_sum: Values,
    evaluations: usize,
}

impl<F: FnMut(f64, &mut [f64]) -> Result<()>> Integrator<'_, F> {
    fn rule_sum(&mut self, rule_is_fine: bool, a: f64, b: f64, out: &mut Values) -> Result<()> {
        let rule = if rule_is_fine { self.fine } else { self.coarse };
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            self.buf.iter_mut().for_each(|v| *v = 0.0);
            (self.f)(mid + half * x, &mut self.buf)?;
            for (o, v) in out.iter_mut().zip(&self.buf) {
                *o += w * half * v;
            }
        }
        self.evaluations += rule.nodes.len();
        Ok(())
    }

    fn panel(&mut self, a: f64, b: f64) -> Result<Panel> {
        let mut value: Values = smallvec::smallvec![0.0; self.dim];
        let mut coarse = std::mem::take(&mut self.coarse_sum);
        self.rule_sum(true, a, b, &mut value)?;
        self.rule_sum(false, a, b, &mut coarse)?;
        let error = value.iter().zip(&coarse).map(|(f, c)| (f - c).abs()).collect();
        self.coarse_sum = coarse;
        Ok(Panel { a, b, value, error })
    }
}

/// Panel budget of each inner integral of [`integrate_2d_split`].
pub const INNER_MAX_PANELS: usize = 400;

/// Multiple of machine epsilon, relative to Σ|panel values|, below which
/// error targets are not pursued.
pub const ROUNDOFF_FLOOR: f64 = 50.0 * f64::EPSILON;

/// ∫ₐᵇ f over `dim` components; only the first `checked` components take
/// part in the stopping rule.
pub fn integrate<F>(f: F, a: f64, b: f64, dim: usize, checked: usize, cfg: &QuadratureConfig) -> Result<Estimate>
where
    F: FnMut(f64, &mut [f64]) -> Result<()>,
{
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate::zeros(dim));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let checked = checked.min(dim);
    let coarse = gauss_legendre(cfg.order);
    let fine = gauss_legendre(2 * cfg.order);
    let mut it = Integrator {
        f,
        dim,
        coarse: &coarse,
        fine: &fine,
        buf: smallvec::smallvec![0.0; dim],
        coarse_sum: smallvec::smallvec![0.0; dim],
        evaluations: 0,
    };
    let min_width = (hi - lo) * 1e-12;
    let mut panels = vec![it.panel(lo, hi)?];
    let mut total_v: Values = smallvec::smallvec![0.0; dim];
    let mut total_e: Values = smallvec::smallvec![0.0; dim];
    let mut tol: Values = smallvec::smallvec![0.0; dim];
    let mut total_abs: Values = smallvec::smallvec![0.0; dim];
    let converged = loop {
        total_v.iter_mut().for_each(|v| *v = 0.0);
        total_e.iter_mut().for_each(|v| *v = 0.0);
        total_abs.iter_mut().for_each(|v| *v = 0.0);
        for p in &panels {
            for i in 0..dim {
                total_v[i] += p.value[i];
                total_e[i] += p.error[i];
                total_abs[i] += p.value[i].abs();
            }
        }
        // no tolerance below what rounding in the panel sums can resolve
        for i in 0..checked {
            tol[i] = cfg
                .abs_tol
                .max(cfg.rel_tol * total_v[i].abs())
                .max(ROUNDOFF_FLOOR * total_abs[i]);
        }
        if (0..checked).all(|i| total_e[i] <= tol[i]) {
            break true;
        }
        if panels.len() >= cfg.max_panels {
            break false;
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.b - p.a > min_width)
            .map(|(k, p)| {
                let s = (0..checked).map(|i| p.error[i] / tol[i].max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
                (k, s)
            })
            .max_by(|x, y| x.1.total_cmp(&y.1));
        let Some((k, _)) = worst else { break false };
        let p = panels.swap_remove(k);
        let mid = 0.5 * (p.a + p.b);
        panels.push(it.panel(p.a, mid)?);
        panels.push(it.panel(mid, p.b)?);
    };
    Ok(Estimate {
        value: total_v.iter().map(|v| sign * v).collect(),
        error: total_e,
        evaluations: it.evaluations,
        converged,
    })
}

/// ∬ f(u, v) over the union of `u_intervals` × [v₀, v₁], integrating v
/// inside u. Inner error estimates are integrated alongside the values and
/// added to the outer estimate.
pub fn integrate_2d<F>(
    f: F,
    u_intervals: &[(f64, f64)],
    v_range: (f64, f64),
    dim: usize,
    cfg: &QuadratureConfig,
) -> Result<Estimate>
where
    F: Fn(f64, f64, &mut [f64]) -> Result<()>,
{
    integrate_2d_split(f, |_, _| Ok(()), u_intervals, v_range, dim, cfg)
}

/// [`integrate_2d`] where `breaks(u, out)` pushes interior points of the v
/// range at which f(u, ·) may fail to be smooth; the inner integral is
/// split there.
pub fn integrate_2d_split<F, B>(
    f: F,
    breaks: B,
    u_intervals: &[(f64, f64)],
    v_range: (f64, f64),
    dim: usize,
    cfg: &QuadratureConfig,
) -> Result<Estimate>
where
    F: Fn(f64, f64, &mut [f64]) -> Result<()>,
    B: Fn(f64, &mut Vec<f64>) -> Result<()>,
{
    let total_len: f64 = u_intervals.iter().map(|(a, b)| (b - a).abs()).sum();
    let mut out = Estimate::zeros(dim);
    if total_len == 0.0 {
        return Ok(out);
    }
    let v_len = (v_range.1 - v_range.0).abs();
    let inner_cfg = QuadratureConfig {
        rel_tol: cfg.rel_tol / 4.0,
        abs_tol: cfg.abs_tol / (4.0 * total_len),
        max_panels: cfg.max_panels.min(INNER_MAX_PANELS),
        ..cfg.clone()
    };
    let mut cuts = Vec::new();
    let mut all_inner_ok = true;
    for &(a, b) in u_intervals {
        let outer_cfg = QuadratureConfig {
            abs_tol: cfg.abs_tol * (b - a).abs() / total_len,
            ..cfg.clone()
        };
        let mut inner_ok = true;
        let mut inner_evals = 0;
        let est = integrate(
            |u, o: &mut [f64]| {
                cuts.clear();
                cuts.push(v_range.0);
                breaks(u, &mut cuts)?;
                cuts.push(v_range.1);
                cuts[1..].sort_by(f64::total_cmp);
                o.iter_mut().for_each(|x| *x = 0.0);
                for w in cuts.windows(2) {
                    let (lo, hi) = (w[0], w[1]);
                    if hi <= lo {
                        continue;
                    }
                    let piece_cfg = QuadratureConfig {
                        abs_tol: inner_cfg.abs_tol * (hi - lo) / v_len,
                        ..inner_cfg.clone()
                    };
                    let inner = integrate(|v, w: &mut [f64]| f(u, v, w), lo, hi, dim, dim, &piece_cfg)?;
                    inner_ok &= inner.converged;
                    inner_evals += inner.evaluations;
                    for i in 0..dim {
                        o[i] += inner.value[i];
                        o[dim + i] += inner.error[i];
                    }
                }
                Ok(())
            },
            a,
            b,
            2 * dim,
            dim,
            &outer_cfg,
        )?;
        let piece = Estimate {
            value: est.value[..dim].into(),
            error: (0..dim).map(|i| est.error[i] + est.value[dim + i].abs()).collect(),
            evaluations: inner_evals,
            converged: est.converged,
        };
        out.accumulate(&piece);
        all_inner_ok &= inner_ok;
    }
    // an inner integral that stalled on integrand noise is acceptable when
    // the total error, which includes it, still meets the target
    if !all_inner_ok {
        out.converged &= (0..dim).all(|i| out.error[i] <= cfg.abs_tol.max(cfg.rel_tol * out.value[i].abs()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rules_integrate_polynomials_exactly() {
        for n in [1, 2, 5, 10, 20, 40] {
            let r = gauss_legendre(n);
            assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            // ∫ x^{2n−2} = 2/(2n−1)
            let deg = 2 * n - 2;
            let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((s - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn adaptive_handles_kinks() {
        // ∫₀² (1 − (x−1)²)₊² over a C¹ bump is 16/15
        let cfg = QuadratureConfig::with_tolerance(1e-12, 1e-15);
        let e = integrate(
            |x, o| {
                let r = 1.0 - (x - 0.5).powi(2) / 0.25;
                o[0] = if r > 0.0 { r * r } else { 0.0 };
                Ok(())
            },
            -1.3,
            2.0,
            1,
            1,
            &cfg,
        )
        .unwrap();
        assert!(e.converged);
        assert!((e.value[0] - 0.5 * 16.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_interval_changes_sign() {
        let cfg = QuadratureConfig::default();
        let e = integrate(|x, o| { o[0] = x.cos(); Ok(()) }, PI / 2.0, 0.0, 1, 1, &cfg).unwrap();
        assert!((e.value[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let cfg = QuadratureConfig {
            max_panels: 3,
            rel_tol: 1e-15,
            abs_tol: 0.0,
            ..QuadratureConfig::default()
        };
        let e = integrate(|x, o| { o[0] = x.abs().sqrt(); Ok(()) }, -1.0, 1.0, 1, 1, &cfg).unwrap();
        assert!(!e.converged);
    }

    #[test]
    fn nested_area_of_annulus() {
        let cfg = QuadratureConfig::default();
        let e = integrate_2d(|r, _t, o| { o[0] = r; Ok(()) }, &[(1.0, 2.0)], (0.0, 2.0 * PI), 1, &cfg).unwrap();
        assert!((e.value[0] - 3.0 * PI).abs() < 1e-12);
        assert!(e.error[0] < 1e-9);
    }

    #[test]
    fn split_inner_integral_at_kinks() {
        let cfg = QuadratureConfig::default();
        let f = |_u: f64, v: f64, o: &mut [f64]| {
            o[0] = (v - PI).abs();
            Ok(())
        };
        let plain = integrate_2d(f, &[(0.0, 1.0)], (0.0, 2.0 * PI), 1, &cfg).unwrap();
        let split = integrate_2d_split(f, |_, c| {
            c.push(PI);
            Ok(())
        }, &[(0.0, 1.0)], (0.0, 2.0 * PI), 1, &cfg)
        .unwrap();
        assert!((split.value[0] - PI * PI).abs() < 1e-12);
        assert!((plain.value[0] - PI * PI).abs() < 1e-9);
        assert!(split.evaluations < plain.evaluations);
    }
}
