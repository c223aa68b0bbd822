use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complex_space::{apply_j, dot, ComplexPoint, ComplexVector};
use crate::error::{Error, Result};
use crate::immersions::{CatalogImmersion, ConeParams, Immersion};

/// Σ_{k<q} exp(2πi·pk/q). The exponent is reduced mod q before the
/// exponential so that large k does not cost accuracy.
pub fn boundary_cancellation(params: &ConeParams) -> Complex64 {
    let (p, q) = (params.p() as u64, params.q() as u64);
    (0..q)
        .map(|k| Complex64::cis(std::f64::consts::TAU * ((p * k) % q) as f64 / q as f64))
        .sum()
}

/// An ambient vector field on ℂ².
pub trait BoundaryField: Send + Sync {
    fn label(&self) -> String;
    fn eval(&self, x: &ComplexPoint) -> ComplexVector;
}

/// Each component a polynomial of degree ≤ 2 in z₁, z₂, z̄₁, z̄₂ with complex
/// coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialField {
    label: String,
    /// coefficients[j][m] for component j and monomial m of [`monomials`].
    coefficients: [[Complex64; 15]; 2],
}

/// 1, the four variables, and their ten degree-2 products.
fn monomials(x: &ComplexPoint) -> [Complex64; 15] {
    let v = [x.z(0), x.z(1), x.z(0).conj(), x.z(1).conj()];
    let mut out = [Complex64::new(0.0, 0.0); 15];
    out[0] = Complex64::new(1.0, 0.0);
    out[1..5].copy_from_slice(&v);
    let mut m = 5;
    for i in 0..4 {
        for j in i..4 {
            out[m] = v[i] * v[j];
            m += 1;
        }
    }
    out
}

impl PolynomialField {
    pub fn constant(w: [Complex64; 2]) -> Self {
        let mut coefficients = [[Complex64::new(0.0, 0.0); 15]; 2];
        coefficients[0][0] = w[0];
        coefficients[1][0] = w[1];
        Self {
            label: format!("constant({},{})", w[0], w[1]),
            coefficients,
        }
    }

    /// Coefficients uniform in [−1, 1]² from a seeded stream.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coefficients = [[Complex64::new(0.0, 0.0); 15]; 2];
        for row in coefficients.iter_mut() {
            for c in row.iter_mut() {
                *c = Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
            }
        }
        Self {
            label: format!("random_degree2(seed={seed})"),
            coefficients,
        }
    }
}

impl BoundaryField for PolynomialField {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn eval(&self, x: &ComplexPoint) -> ComplexVector {
        let m = monomials(x);
        let w: Vec<Complex64> = self
            .coefficients
            .iter()
            .map(|row| row.iter().zip(&m).map(|(c, v)| c * v).sum())
            .collect();
        ComplexVector::from_complex(&w)
    }
}

/// (z̄₂ᵏ, 0). With k = p its frequency on the expander boundary circle
/// matches the conormal when q = 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugatePowerField {
    pub power: u32,
}

impl BoundaryField for ConjugatePowerField {
    fn label(&self) -> String {
        format!("conj_z2_pow({})", self.power)
    }

    fn eval(&self, x: &ComplexPoint) -> ComplexVector {
        let w = x.z(1).conj().powu(self.power);
        ComplexVector::from_complex(&[w, Complex64::new(0.0, 0.0)])
    }
}

/// Trapezoid nodes on the boundary circle; exact for trigonometric
/// polynomials of degree below this.
pub const BOUNDARY_NODES: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryTerm {
    pub field: String,
    pub t: f64,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    /// Scale of the integrand, for relative comparisons.
    pub scale: f64,
}

/// ∫ (⟨W, ν⟩ + i⟨W, Jν⟩)·|X| dθ over the μ = 0 circle of a half-domain
/// family, with ν = F_μ/|F_μ| the conormal.
pub fn boundary_first_variation(imm: &CatalogImmersion, field: &dyn BoundaryField) -> Result<BoundaryTerm> {
    if !imm.half_domain() || imm.time().is_none() {
        return Err(Error::Precondition(format!(
            "{} is not a half-domain time family",
            imm.kind()
        )));
    }
    let n = BOUNDARY_NODES;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut scale: f64 = 0.0;
    for k in 0..n {
        let th = std::f64::consts::TAU * k as f64 / n as f64;
        let fr = imm.frame(&[0.0, th])?;
        let fu = &fr.tangents[0];
        let nu = fu.scale(1.0 / fu.norm());
        let w = field.eval(&fr.position);
        let r = fr.position.norm();
        acc += Complex64::new(dot(&w, &nu), dot(&w, &apply_j(&nu))) * r;
        scale = scale.max(w.norm() * r);
    }
    let dth = std::f64::consts::TAU / n as f64;
    let v = acc * dth;
    Ok(BoundaryTerm {
        field: field.label(),
        t: imm.time().unwrap_or(0.0),
        re: v.re,
        im: v.im,
        modulus: v.norm(),
        scale: scale * std::f64::consts::TAU,
    })
}

/// The constant, conjugate-power and seeded random fields used by the suite.
pub fn default_fields(params: &ConeParams, seed: u64) -> Vec<Box<dyn BoundaryField>> {
    vec![
        Box::new(PolynomialField::constant([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])),
        Box::new(ConjugatePowerField { power: params.p() }),
        Box::new(PolynomialField::random(seed)),
        Box::new(PolynomialField::random(seed.wrapping_add(1))),
    ]
}
