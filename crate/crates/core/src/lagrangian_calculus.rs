//! Induced metric, Lagrangian angle, mean curvature and the residuals of the
//! defining identities, all computed from jets of an immersion.
//!
//! Conventions: β is the phase of `dz¹∧⋯∧dzⁿ` on the Gram–Schmidt
//! orthonormalization of the coordinate frame `(∂₁F, …, ∂ₖF)` taken in
//! parameter order, and `H = J∇β = J(gᵃᵇ ∂_bβ ∂ₐF)`. With these choices H
//! agrees with the trace of the second fundamental form `gᵃᵇ(∂ₐ∂_bF)^⊥`;
//! [`GeometryAtPoint::h_sff`] carries the latter so callers can measure it.

use serde::Serialize;
use smallvec::SmallVec;

use crate::complex_space::{
    apply_j, complex_determinant_of_frame, dot, symplectic_form, wrap_phase, ComplexPoint,
    ComplexVector, PolarValue,
};
use crate::error::{Error, Result};
use crate::immersions::{CatalogImmersion, Immersion};
use crate::jets::{Jet2, JetPoint};

/// Determinants below this are treated as a singular-locus evaluation.
pub const DEGENERATE_DET: f64 = 1e-20;

/// Lagrangian frames must give a unit holomorphic volume within this.
pub const ANGLE_MODULUS_TOL: f64 = 1e-8;

/// Position and coordinate tangent vectors at one parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub position: ComplexPoint,
    pub tangents: SmallVec<[ComplexVector; 4]>,
}

impl Frame {
    pub fn from_jet(jet: &JetPoint) -> Self {
        Self {
            position: jet.position(),
            tangents: jet.tangents(),
        }
    }

    pub fn dim(&self) -> usize {
        self.tangents.len()
    }
}

/// A k×k symmetric positive definite matrix with its inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    k: usize,
    g: SmallVec<[f64; 16]>,
    inv: SmallVec<[f64; 16]>,
    det: f64,
}

impl Metric {
    pub fn from_matrix(k: usize, g: &[f64]) -> Result<Self> {
        if g.len() != k * k {
            return Err(Error::DimensionMismatch {
                expected: k * k,
                found: g.len(),
            });
        }
        let (inv, det) = invert(k, g);
        if !(det.is_finite() && det >= DEGENERATE_DET) {
            return Err(Error::DegenerateMetric { det });
        }
        Ok(Self {
            k,
            g: g.into(),
            inv,
            det,
        })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn g(&self, a: usize, b: usize) -> f64 {
        self.g[a * self.k + b]
    }

    pub fn inv(&self, a: usize, b: usize) -> f64 {
        self.inv[a * self.k + b]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.g
    }

    pub fn inverse_matrix(&self) -> &[f64] {
        &self.inv
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn area_density(&self) -> f64 {
        self.det.sqrt()
    }

    /// vᵃ = gᵃᵇ w_b
    pub fn raise(&self, w: &[f64]) -> SmallVec<[f64; 4]> {
        (0..self.k)
            .map(|a| (0..self.k).map(|b| self.inv(a, b) * w[b]).sum())
            .collect()
    }

    /// max |g·g⁻¹ − I|
    pub fn inverse_residual(&self) -> f64 {
        let k = self.k;
        let mut worst: f64 = 0.0;
        for a in 0..k {
            for b in 0..k {
                let s: f64 = (0..k).map(|c| self.g(a, c) * self.inv(c, b)).sum();
                let id = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((s - id).abs());
            }
        }
        worst
    }
}

/// Gauss–Jordan inverse with partial pivoting; returns (inverse, det).
fn invert(k: usize, m: &[f64]) -> (SmallVec<[f64; 16]>, f64) {
    let mut a: SmallVec<[f64; 16]> = m.into();
    let mut inv: SmallVec<[f64; 16]> = smallvec::smallvec![0.0; k * k];
    for i in 0..k {
        inv[i * k + i] = 1.0;
    }
    let mut det = 1.0;
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| a[i * k + col].abs().total_cmp(&a[j * k + col].abs()))
            .unwrap_or(col);
        let d = a[piv * k + col];
        if d == 0.0 {
            return (inv, 0.0);
        }
        if piv != col {
            for c in 0..k {
                a.swap(col * k + c, piv * k + c);
                inv.swap(col * k + c, piv * k + c);
            }
            det = -det;
        }
        det *= d;
        for c in 0..k {
            a[col * k + c] /= d;
            inv[col * k + c] /= d;
        }
        for r in 0..k {
            if r == col {
                continue;
            }
            let f = a[r * k + col];
            if f != 0.0 {
                for c in 0..k {
                    a[r * k + c] -= f * a[col * k + c];
                    inv[r * k + c] -= f * inv[col * k + c];
                }
            }
        }
    }
    (inv, det)
}

/// g_ab = ⟨∂ₐF, ∂_bF⟩.
pub fn induced_metric(tangents: &[ComplexVector]) -> Result<Metric> {
    let k = tangents.len();
    let mut g: SmallVec<[f64; 16]> = smallvec::smallvec![0.0; k * k];
    for a in 0..k {
        for b in a..k {
            let v = dot(&tangents[a], &tangents[b]);
            g[a * k + b] = v;
            g[b * k + a] = v;
        }
    }
    Metric::from_matrix(k, &g)
}

/// max over pairs of |ω(∂ₐF, ∂_bF)|.
pub fn lagrangian_residual(tangents: &[ComplexVector]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in 0..tangents.len() {
        for b in a + 1..tangents.len() {
            worst = worst.max(symplectic_form(&tangents[a], &tangents[b])?.abs());
        }
    }
    Ok(worst)
}

/// Modified Gram–Schmidt in the ambient inner product.
pub fn orthonormalize(tangents: &[ComplexVector]) -> Result<SmallVec<[ComplexVector; 4]>> {
    let mut out: SmallVec<[ComplexVector; 4]> = SmallVec::with_capacity(tangents.len());
    for t in tangents {
        let mut v = t.clone();
        for e in &out {
            v = v.axpy(-dot(&v, e), e);
        }
        let n = v.norm();
        if !(n > 0.0) || n < 1e-10 * t.norm() {
            return Err(Error::DegenerateMetric { det: 0.0 });
        }
        out.push(v.scale(1.0 / n));
    }
    Ok(out)
}

/// β: phase of the holomorphic volume on the orthonormalized frame.
pub fn lagrangian_angle(tangents: &[ComplexVector]) -> Result<f64> {
    let pv = holomorphic_volume(tangents)?;
    if (pv.modulus - 1.0).abs() > ANGLE_MODULUS_TOL {
        return Err(Error::NotLagrangian {
            modulus: pv.modulus,
        });
    }
    Ok(pv.phase)
}

/// dz¹∧⋯∧dzⁿ on the orthonormalized frame, without the Lagrangian check.
pub fn holomorphic_volume(tangents: &[ComplexVector]) -> Result<PolarValue> {
    let e = orthonormalize(tangents)?;
    complex_determinant_of_frame(&e)
}

/// H = J(gᵃᵇ ∂_bβ ∂ₐF) from the coordinate partials of β.
pub fn mean_curvature(tangents: &[ComplexVector], metric: &Metric, d_beta: &[f64]) -> ComplexVector {
    let up = metric.raise(d_beta);
    let mut grad = ComplexVector::zeros(tangents[0].n());
    for (a, t) in tangents.iter().enumerate() {
        grad = grad.axpy(up[a], t);
    }
    apply_j(&grad)
}

/// v − gᵃᵇ⟨v, ∂ₐF⟩∂_bF
pub fn normal_part(v: &ComplexVector, tangents: &[ComplexVector], metric: &Metric) -> ComplexVector {
    let w: SmallVec<[f64; 4]> = tangents.iter().map(|t| dot(v, t)).collect();
    let up = metric.raise(&w);
    let mut out = v.clone();
    for (a, t) in tangents.iter().enumerate() {
        out = out.axpy(-up[a], t);
    }
    out
}

/// F^⊥ by subtracting the tangential part.
pub fn normal_projection(position: &ComplexPoint, tangents: &[ComplexVector], metric: &Metric) -> ComplexVector {
    normal_part(position, tangents, metric)
}

/// F^⊥ expanded in the normal frame J∂ₐF, valid for Lagrangian frames, where
/// ⟨J∂ₐF, J∂_bF⟩ = g_ab.
pub fn normal_projection_j_frame(
    position: &ComplexPoint,
    tangents: &[ComplexVector],
    metric: &Metric,
) -> ComplexVector {
    let jt: SmallVec<[ComplexVector; 4]> = tangents.iter().map(apply_j).collect();
    let w: SmallVec<[f64; 4]> = jt.iter().map(|t| dot(position, t)).collect();
    let up = metric.raise(&w);
    let mut out = ComplexVector::zeros(position.n());
    for (a, t) in jt.iter().enumerate() {
        out = out.axpy(up[a], t);
    }
    out
}

/// Trace of the second fundamental form gᵃᵇ(∂ₐ∂_bF)^⊥.
pub fn sff_trace(jet: &JetPoint, tangents: &[ComplexVector], metric: &Metric) -> ComplexVector {
    let k = tangents.len();
    let mut tr = ComplexVector::zeros(jet.n());
    for a in 0..k {
        for b in 0..k {
            tr = tr.axpy(metric.inv(a, b), &jet.second_partial(a, b));
        }
    }
    normal_part(&tr, tangents, metric)
}

/// Δ_g f = gᵃᵇ(∂ₐ∂_bf − Γᶜₐ_b ∂_cf) with Γᶜₐ_b = gᶜᵈ⟨∂ₐ∂_bF, ∂_dF⟩.
pub fn laplacian(f: &Jet2, jet: &JetPoint, tangents: &[ComplexVector], metric: &Metric) -> f64 {
    let k = tangents.len();
    let up = metric.raise(f.grad());
    let mut out = 0.0;
    for a in 0..k {
        for b in 0..k {
            let gab = metric.inv(a, b);
            if gab == 0.0 {
                continue;
            }
            let second = jet.second_partial(a, b);
            // Γᶜₐ_b ∂_c f = ⟨∂ₐ∂_bF, gᶜᵈ∂_cf ∂_dF⟩
            let christoffel: f64 = (0..k).map(|d| dot(&second, &tangents[d]) * up[d]).sum();
            out += gab * (f.hess(a, b) - christoffel);
        }
    }
    out
}

/// 2-jet of β by central differences of [`lagrangian_angle`], each sample
/// unwrapped against the centre value.
pub fn numeric_beta_jet(imm: &dyn Immersion, params: &[f64], h: f64) -> Result<Jet2> {
    let k = params.len();
    let angle = |u: &[f64]| -> Result<f64> { lagrangian_angle(&imm.frame(u)?.tangents) };
    let b0 = angle(params)?;
    let at = |shift: &[(usize, f64)]| -> Result<f64> {
        let mut u = params.to_vec();
        for &(a, s) in shift {
            u[a] += s;
        }
        Ok(b0 + wrap_phase(angle(&u)? - b0))
    };
    let mut grad = vec![0.0; k];
    let mut hess = vec![0.0; k * k];
    for a in 0..k {
        let p = at(&[(a, h)])?;
        let m = at(&[(a, -h)])?;
        grad[a] = (p - m) / (2.0 * h);
        hess[a * k + a] = (p - 2.0 * b0 + m) / (h * h);
        for b in 0..a {
            let pp = at(&[(a, h), (b, h)])?;
            let pm = at(&[(a, h), (b, -h)])?;
            let mp = at(&[(a, -h), (b, h)])?;
            let mm = at(&[(a, -h), (b, -h)])?;
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            hess[a * k + b] = v;
            hess[b * k + a] = v;
        }
    }
    Jet2::from_parts(b0, &grad, &hess)
}

/// Default step of [`numeric_beta_jet`].
pub const NUMERIC_BETA_STEP: f64 = 1e-4;

/// Closed-form β jet when the immersion has one, otherwise the numeric one.
pub fn beta_jet(imm: &dyn Immersion, params: &[f64]) -> Result<(Jet2, bool)> {
    match imm.beta_jet(params) {
        Some(j) => Ok((j?, true)),
        None => Ok((numeric_beta_jet(imm, params, NUMERIC_BETA_STEP)?, false)),
    }
}

/// Everything the verifier needs at one smooth parameter point.
#[derive(Clone, Debug, Serialize)]
pub struct GeometryAtPoint {
    pub metric: Vec<f64>,
    pub metric_inv: Vec<f64>,
    pub area_density: f64,
    pub lagrangian_residual: f64,
    /// Phase route, in (−π, π].
    pub beta: f64,
    /// gᵃᵇ∂_bβ
    pub grad_beta: Vec<f64>,
    #[serde(serialize_with = "ser_vec")]
    pub h: ComplexVector,
    #[serde(serialize_with = "ser_vec")]
    pub f_perp: ComplexVector,
    pub beta_laplacian: f64,
    /// gᵃᵇ(∂ₐ∂_bF)^⊥, the independent mean curvature.
    #[serde(serialize_with = "ser_vec")]
    pub h_sff: ComplexVector,
    /// Whether ∇β came from a closed form.
    pub closed_form_beta: bool,
}

fn ser_vec<S: serde::Serializer>(v: &ComplexVector, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.coords())
}

impl GeometryAtPoint {
    pub fn h_norm_sq(&self) -> f64 {
        self.h.norm_sq()
    }

    /// max over a of |⟨H, ∂ₐF⟩| / (|H|·|∂ₐF|), 0 when H = 0.
    pub fn h_normality(&self, tangents: &[ComplexVector]) -> f64 {
        let hn = self.h.norm();
        if hn == 0.0 {
            return 0.0;
        }
        tangents
            .iter()
            .map(|t| dot(&self.h, t).abs() / (hn * t.norm()))
            .fold(0.0, f64::max)
    }
}

/// Evaluates the full [`GeometryAtPoint`] at a smooth Lagrangian point.
pub fn analyze(imm: &dyn Immersion, params: &[f64]) -> Result<GeometryAtPoint> {
    let jet = imm.evaluate_jet(params)?;
    let tangents = jet.tangents();
    let metric = induced_metric(&tangents)?;
    let residual = lagrangian_residual(&tangents)?;
    let beta = lagrangian_angle(&tangents)?;
    let (bj, closed) = beta_jet(imm, params)?;
    let h = mean_curvature(&tangents, &metric, bj.grad());
    let position = jet.position();
    Ok(GeometryAtPoint {
        metric: metric.matrix().to_vec(),
        metric_inv: metric.inverse_matrix().to_vec(),
        area_density: metric.area_density(),
        lagrangian_residual: residual,
        beta,
        grad_beta: metric.raise(bj.grad()).to_vec(),
        h,
        f_perp: normal_projection(&position, &tangents, &metric),
        beta_laplacian: laplacian(&bj, &jet, &tangents, &metric),
        h_sff: sff_trace(&jet, &tangents, &metric),
        closed_form_beta: closed,
    })
}

/// |Δ_g β| with β from the closed form when available.
pub fn hamiltonian_stationarity_residual(imm: &dyn Immersion, params: &[f64]) -> Result<f64> {
    let jet = imm.evaluate_jet(params)?;
    let tangents = jet.tangents();
    let metric = induced_metric(&tangents)?;
    let (bj, _) = beta_jet(imm, params)?;
    Ok(laplacian(&bj, &jet, &tangents, &metric).abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolitonKind {
    Shrinker,
    Expander,
}

impl SolitonKind {
    pub fn sign(self) -> f64 {
        match self {
            SolitonKind::Shrinker => -1.0,
            SolitonKind::Expander => 1.0,
        }
    }
}

/// |F^⊥ − κH| / max(|F^⊥|, |H|, 1e−30).
pub fn soliton_residual_with(imm: &dyn Immersion, params: &[f64], kappa: f64) -> Result<f64> {
    let g = analyze(imm, params)?;
    let diff = g.f_perp.axpy(-kappa, &g.h);
    Ok(diff.norm() / g.f_perp.norm().max(g.h.norm()).max(1e-30))
}

/// Residual of F^⊥ = ±2cH. For the pair families c is the self-similar
/// constant times the squared homothety factor; for the λ-family
/// 2c = |C/Σλᵢ|. The sign always comes from `kind`.
pub fn self_similarity_residual(imm: &CatalogImmersion, params: &[f64], kind: SolitonKind) -> Result<f64> {
    let two_c = if let Some(cp) = imm.cone_params() {
        if !imm.is_surface() {
            return Err(Error::Precondition(format!("{} is not a surface", imm.kind())));
        }
        2.0 * cp.self_similar_constant() * imm.scale().powi(2)
    } else {
        let (lp, _) = imm.lambda_params().expect("lambda family");
        lp.soliton_coefficient()
            .ok_or_else(|| Error::Precondition("Σλᵢ = 0: the level set is not self-similar".into()))?
            .abs()
    };
    soliton_residual_with(imm, params, kind.sign() * two_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersions::{ConeParams, Kind};

    fn shrinker(p: u32, q: u32) -> CatalogImmersion {
        CatalogImmersion::new(Kind::ShrinkerS, ConeParams::new(p, q).unwrap()).unwrap()
    }

    #[test]
    fn metric_examples() {
        let jet = shrinker(2, 1).evaluate_jet(&[0.0, 0.0]).unwrap();
        let m = induced_metric(&jet.tangents()).unwrap();
        assert!((m.g(0, 0) - 2.0).abs() < 1e-15);
        assert!((m.g(1, 1) - 4.0).abs() < 1e-14);
        assert!(m.g(0, 1).abs() < 1e-15);
        assert!((m.area_density() - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!(m.inverse_residual() < 1e-14);
    }

    #[test]
    fn degenerate_metric_is_reported() {
        let v = ComplexVector::from_slice(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            induced_metric(&[v.clone(), v]),
            Err(Error::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn mean_curvature_example() {
        let imm = shrinker(2, 1);
        let g = analyze(&imm, &[0.0, 0.0]).unwrap();
        let expect = [-0.5, 0.0, 0.0, 0.0];
        for (a, b) in g.h.coords().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let expect = [1.0, 0.0, 0.0, 0.0];
        for (a, b) in g.f_perp.coords().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((&g.h - &g.h_sff).max_abs() < 1e-14);
    }

    #[test]
    fn not_lagrangian_angle_refused() {
        use crate::immersions::controls::NonLagrangianTorus;
        let f = NonLagrangianTorus.frame(&[0.7, 0.1]).unwrap();
        assert!(matches!(lagrangian_angle(&f.tangents), Err(Error::NotLagrangian { .. })));
    }

    #[test]
    fn laplacian_of_coordinate_on_flat_plane() {
        use crate::immersions::controls::GradientGraph;
        let g = GradientGraph::new(2).unwrap();
        let jet = g.evaluate_jet(&[1.0, 0.0]).unwrap();
        let t = jet.tangents();
        let m = induced_metric(&t).unwrap();
        let bj = numeric_beta_jet(&g, &[1.0, 0.0], NUMERIC_BETA_STEP).unwrap();
        let lap = laplacian(&bj, &jet, &t, &m);
        assert!((lap - GradientGraph::beta_laplacian(&[1.0, 0.0])).abs() < 1e-6);
    }
}
