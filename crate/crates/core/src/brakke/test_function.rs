use serde::Serialize;

use crate::complex_space::{dot, ComplexPoint, ComplexVector};
use crate::error::{Error, Result};
use crate::immersions::ConeParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunctionKind {
    /// ψ(|x|), centred at the origin.
    RadialBump,
    /// ψ(|x − c|).
    ShiftedBump,
    /// ψ(|x| − r₀) with r₀ > R, so φ vanishes near the origin.
    AnnularBump,
}

/// φ ≥ 0 built from the C¹ profile ψ(r) = (1 − (r/R)²)² on |r| ≤ R.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestFunction {
    pub kind: TestFunctionKind,
    pub label: String,
    pub radius: f64,
    #[serde(serialize_with = "ser_point")]
    pub center: ComplexPoint,
    pub shell_radius: f64,
}

fn ser_point<S: serde::Serializer>(v: &ComplexPoint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.coords())
}

/// ψ and ψ′ at signed distance r.
fn profile(r: f64, radius: f64) -> (f64, f64) {
    let s = r / radius;
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let one = 1.0 - s * s;
    (one * one, -4.0 * s * one / radius)
}

impl TestFunction {
    fn check_radius(radius: f64) -> Result<()> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParams(format!("test-function radius {radius} must be positive")));
        }
        Ok(())
    }

    pub fn radial_bump(n: usize, radius: f64) -> Result<Self> {
        Self::check_radius(radius)?;
        Ok(Self {
            kind: TestFunctionKind::RadialBump,
            label: format!("radial_bump(R={radius})"),
            radius,
            center: ComplexVector::zeros(n),
            shell_radius: 0.0,
        })
    }

    pub fn shifted_bump(center: ComplexPoint, radius: f64) -> Result<Self> {
        Self::check_radius(radius)?;
        Ok(Self {
            kind: TestFunctionKind::ShiftedBump,
            label: format!("shifted_bump(|c|={:.6},R={radius})", center.norm()),
            radius,
            center,
            shell_radius: 0.0,
        })
    }

    pub fn annular_bump(n: usize, shell_radius: f64, radius: f64) -> Result<Self> {
        Self::check_radius(radius)?;
        if !(shell_radius > radius) {
            return Err(Error::InvalidParams(format!(
                "annular bump needs r0 > R, got r0 = {shell_radius}, R = {radius}"
            )));
        }
        Ok(Self {
            kind: TestFunctionKind::AnnularBump,
            label: format!("annular_bump(r0={shell_radius},R={radius})"),
            radius,
            center: ComplexVector::zeros(n),
            shell_radius,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Origin bump, bump on the unit link of C₊₊, bump away from every
    /// cone and annular bump at radius 1.
    pub fn default_set(params: &ConeParams) -> Vec<TestFunction> {
        let y = 1.0 / (params.pf() + params.qf()).sqrt();
        let link = ComplexVector::from_slice(&[y * params.qf().sqrt(), 0.0, 0.0, y * params.pf().sqrt()])
            .expect("four coordinates");
        let far = ComplexVector::from_slice(&[3.0, 0.0, 0.0, 0.0]).expect("four coordinates");
        vec![
            Self::radial_bump(2, 0.5).expect("valid").with_label("origin_bump"),
            Self::shifted_bump(link, 0.5).expect("valid").with_label("link_bump"),
            Self::shifted_bump(far, 0.5).expect("valid").with_label("off_image_bump"),
            Self::annular_bump(2, 1.0, 0.5).expect("valid").with_label("annular_bump"),
        ]
    }

    /// φ(x) and Dφ(x).
    pub fn value_and_gradient(&self, x: &ComplexPoint) -> (f64, ComplexVector) {
        let d = x - &self.center;
        let r = d.norm();
        let signed = match self.kind {
            TestFunctionKind::AnnularBump => r - self.shell_radius,
            _ => r,
        };
        let (v, dv) = profile(signed, self.radius);
        if dv == 0.0 || r == 0.0 {
            return (v, ComplexVector::zeros(x.n()));
        }
        (v, d.scale(dv / r))
    }

    pub fn value(&self, x: &ComplexPoint) -> f64 {
        let r = (x - &self.center).norm();
        match self.kind {
            TestFunctionKind::AnnularBump => profile(r - self.shell_radius, self.radius).0,
            _ => profile(r, self.radius).0,
        }
    }

    pub fn value_at_origin(&self) -> f64 {
        self.value(&ComplexVector::zeros(self.center.n()))
    }

    /// Range of |x| outside which φ vanishes.
    pub fn radial_range(&self) -> (f64, f64) {
        match self.kind {
            TestFunctionKind::AnnularBump => (self.shell_radius - self.radius, self.shell_radius + self.radius),
            _ => {
                let c = self.center.norm();
                ((c - self.radius).max(0.0), c + self.radius)
            }
        }
    }

    /// Dφ(x)·v
    pub fn derivative_along(&self, x: &ComplexPoint, v: &ComplexVector) -> f64 {
        dot(&self.value_and_gradient(x).1, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(c: [f64; 4]) -> ComplexPoint {
        ComplexVector::from_slice(&c).unwrap()
    }

    #[test]
    fn profile_values() {
        let phi = TestFunction::radial_bump(2, 2.0).unwrap();
        assert_eq!(phi.value_at_origin(), 1.0);
        assert_eq!(phi.value(&pt([2.0, 0.0, 0.0, 0.0])), 0.0);
        assert!((phi.value(&pt([1.0, 0.0, 0.0, 0.0])) - 0.5625).abs() < 1e-15);
        let ann = TestFunction::annular_bump(2, 1.0, 0.5).unwrap();
        assert_eq!(ann.value_at_origin(), 0.0);
        assert_eq!(ann.value(&pt([0.0, 1.0, 0.0, 0.0])), 1.0);
        assert!(TestFunction::annular_bump(2, 0.5, 0.5).is_err());
        assert!(TestFunction::radial_bump(2, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn gradient_matches_finite_differences(
            x in prop::array::uniform4(-1.5f64..1.5),
            dir in prop::array::uniform4(-1.0f64..1.0),
            kind in 0usize..3,
        ) {
            let phi = match kind {
                0 => TestFunction::radial_bump(2, 1.3).unwrap(),
                1 => TestFunction::shifted_bump(pt([0.4, -0.2, 0.1, 0.5]), 0.9).unwrap(),
                _ => TestFunction::annular_bump(2, 1.0, 0.6).unwrap(),
            };
            let x = pt(x);
            let v = pt(dir);
            let h = 1e-6;
            let fd = (phi.value(&x.axpy(h, &v)) - phi.value(&x.axpy(-h, &v))) / (2.0 * h);
            prop_assert!((fd - phi.derivative_along(&x, &v)).abs() < 1e-6);
            prop_assert!(phi.value(&x) >= 0.0);
        }

        #[test]
        fn support_is_inside_radial_range(x in prop::array::uniform4(-3.0f64..3.0), kind in 0usize..3) {
            let phi = match kind {
                0 => TestFunction::radial_bump(2, 1.3).unwrap(),
                1 => TestFunction::shifted_bump(pt([0.4, -0.2, 0.1, 0.5]), 0.9).unwrap(),
                _ => TestFunction::annular_bump(2, 1.0, 0.6).unwrap(),
            };
            let x = pt(x);
            let (lo, hi) = phi.radial_range();
            if phi.value(&x) > 0.0 {
                prop_assert!(x.norm() >= lo && x.norm() <= hi);
            }
        }
    }
}
