//! Surfaces used as negative controls.

use smallvec::SmallVec;

use super::Immersion;
use crate::complex_space::{ComplexPoint, ComplexVector, Coords};
use crate::error::{Error, Result};
use crate::jets::{Cx, Jet2, JetPoint, Real};

fn check_len(params: &[f64], k: usize) -> Result<()> {
    if params.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: params.len(),
        });
    }
    if params.iter().any(|x| !x.is_finite()) {
        return Err(Error::OutsideDomain {
            kind: "control",
            detail: "non-finite parameter".into(),
        });
    }
    Ok(())
}

fn to_point(comps: &[Cx<f64>]) -> Result<ComplexPoint> {
    let c: Coords = comps.iter().flat_map(|z| [z.re, z.im]).collect();
    ComplexVector::new(c)
}

fn seeds(params: &[f64]) -> SmallVec<[Jet2; 4]> {
    let k = params.len();
    params
        .iter()
        .enumerate()
        .map(|(a, v)| Jet2::variable(k, a, *v))
        .collect()
}

/// (cos μ·e^{iθ}, sin μ): ω(∂_μ, ∂_θ) = −sin μ cos μ.
#[derive(Clone, Copy, Debug, Default)]
pub struct NonLagrangianTorus;

impl NonLagrangianTorus {
    fn components<T: Real>(u: &[T]) -> [Cx<T>; 2] {
        let (mu, th) = (&u[0], &u[1]);
        let zero = mu.lift(0.0);
        [Cx::cis(th).times(&mu.cos()), Cx::new(mu.sin(), zero)]
    }
}

impl Immersion for NonLagrangianTorus {
    fn name(&self) -> String {
        "non_lagrangian_torus".into()
    }
    fn domain_dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        2
    }
    fn evaluate(&self, params: &[f64]) -> Result<ComplexPoint> {
        check_len(params, 2)?;
        to_point(&Self::components(params))
    }
    fn evaluate_jet(&self, params: &[f64]) -> Result<JetPoint> {
        check_len(params, 2)?;
        JetPoint::from_complex(Self::components(&seeds(params)).to_vec())
    }
}

/// (e^{iμ}, μ + iθ). Not Lagrangian: ω(∂_μ, ∂_θ) ≡ 1.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExponentialCylinder;

impl ExponentialCylinder {
    fn components<T: Real>(u: &[T]) -> [Cx<T>; 2] {
        let (mu, th) = (&u[0], &u[1]);
        [Cx::cis(mu), Cx::new(mu.clone(), th.clone())]
    }
}

impl Immersion for ExponentialCylinder {
    fn name(&self) -> String {
        "exponential_cylinder".into()
    }
    fn domain_dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        2
    }
    fn evaluate(&self, params: &[f64]) -> Result<ComplexPoint> {
        check_len(params, 2)?;
        to_point(&Self::components(params))
    }
    fn evaluate_jet(&self, params: &[f64]) -> Result<JetPoint> {
        check_len(params, 2)?;
        JetPoint::from_complex(Self::components(&seeds(params)).to_vec())
    }
}

/// The gradient graph zⱼ = xⱼ + i·xⱼ²/2 of u = Σ xⱼ³/6.
///
/// Lagrangian, with β = Σ arctan xⱼ and a product metric, so
/// Δβ = −3 Σ xⱼ / (1 + xⱼ²)³, which is nonzero off the coordinate planes.
#[derive(Clone, Copy, Debug)]
pub struct GradientGraph {
    n: usize,
}

impl GradientGraph {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("dimension must be positive".into()));
        }
        Ok(Self { n })
    }

    pub fn beta(x: &[f64]) -> f64 {
        x.iter().map(|v| v.atan()).sum()
    }

    pub fn beta_laplacian(x: &[f64]) -> f64 {
        x.iter().map(|v| -3.0 * v / (1.0 + v * v).powi(3)).sum()
    }

    fn components<T: Real>(u: &[T]) -> SmallVec<[Cx<T>; 4]> {
        u.iter()
            .map(|x| Cx::new(x.clone(), (x.clone() * x.clone()).scale(0.5)))
            .collect()
    }
}

impl Immersion for GradientGraph {
    fn name(&self) -> String {
        format!("gradient_graph(n={})", self.n)
    }
    fn domain_dim(&self) -> usize {
        self.n
    }
    fn ambient_dim(&self) -> usize {
        self.n
    }
    fn evaluate(&self, params: &[f64]) -> Result<ComplexPoint> {
        check_len(params, self.n)?;
        to_point(&Self::components(params))
    }
    fn evaluate_jet(&self, params: &[f64]) -> Result<JetPoint> {
        check_len(params, self.n)?;
        JetPoint::from_complex(Self::components(&seeds(params)).into_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_space::symplectic_form;

    #[test]
    fn torus_omega_matches_hand_value() {
        let j = NonLagrangianTorus.evaluate_jet(&[std::f64::consts::FRAC_PI_4, 0.0]).unwrap();
        let w = symplectic_form(&j.partial(0), &j.partial(1)).unwrap();
        assert!((w + 0.5).abs() < 1e-15);
    }

    #[test]
    fn cylinder_is_not_lagrangian() {
        for &(mu, th) in &[(0.0, 0.0), (1.3, -0.4), (-2.0, 5.0)] {
            let j = ExponentialCylinder.evaluate_jet(&[mu, th]).unwrap();
            let w = symplectic_form(&j.partial(0), &j.partial(1)).unwrap();
            assert!((w - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_graph_is_lagrangian() {
        let g = GradientGraph::new(2).unwrap();
        let j = g.evaluate_jet(&[0.7, -1.9]).unwrap();
        assert!(symplectic_form(&j.partial(0), &j.partial(1)).unwrap().abs() < 1e-15);
        assert!((GradientGraph::beta_laplacian(&[1.0, 0.0]) + 0.375).abs() < 1e-15);
    }
}
