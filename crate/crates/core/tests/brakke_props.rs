use std::f64::consts::TAU;

use hsflow::brakke::{h_density_deviation, surface_integrals, surface_integrals_on, TestFunction};
use hsflow::immersions::{CatalogImmersion, ConeParams, Immersion, Kind};
use hsflow::quadrature::QuadratureConfig;
use proptest::prelude::*;

fn family(k: Kind, pr: ConeParams, t: f64) -> CatalogImmersion {
    let sign = match k {
        Kind::ShrinkerSt | Kind::VtCase3 => -1.0,
        _ => 1.0,
    };
    CatalogImmersion::at_time(k, pr, sign * t).unwrap()
}

fn families() -> impl Strategy<Value = CatalogImmersion> {
    (
        prop::sample::select(vec![(2u32, 1u32), (3, 2), (3, 1), (5, 2)]),
        prop::sample::select(vec![Kind::ShrinkerSt, Kind::ExpanderEt, Kind::VtCase2, Kind::VtCase3]),
        0.25f64..4.0,
    )
        .prop_map(|((p, q), k, t)| family(k, ConeParams::new(p, q).unwrap(), t))
}

/// A radial, annular or shifted bump; the shifted one sits on the surface.
fn test_function(imm: &CatalogImmersion, which: u8, a: f64, b: f64) -> TestFunction {
    match which % 3 {
        0 => TestFunction::radial_bump(2, 0.5 + 3.5 * a).unwrap(),
        1 => TestFunction::annular_bump(2, 1.0 + 2.0 * a, 0.3 + 0.6 * b).unwrap(),
        _ => {
            let c = imm.evaluate(&[0.2 + 0.8 * a, TAU * b]).unwrap();
            TestFunction::shifted_bump(c, 0.4 + 0.6 * b).unwrap()
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn doubling_the_order_stays_within_the_estimate(
        imm in families(), which in 0u8..3, a in 0.0f64..1.0, b in 0.0f64..1.0
    ) {
        let phi = test_function(&imm, which, a, b);
        let lo = surface_integrals(&imm, &phi, &QuadratureConfig::default()).unwrap();
        let hi = surface_integrals(&imm, &phi, &QuadratureConfig::default().with_order(20)).unwrap();
        for (x, y) in [(lo.mass, hi.mass), (lo.h_term, hi.h_term), (lo.d_term, hi.d_term)] {
            prop_assert!((x.value - y.value).abs() <= x.error + 1e-14 * x.value.abs(), "{x:?} vs {y:?}");
        }
    }

    #[test]
    fn no_mass_outside_the_computed_support(
        imm in families(), which in 0u8..3, a in 0.0f64..1.0, b in 0.0f64..1.0
    ) {
        let phi = test_function(&imm, which, a, b);
        let cfg = QuadratureConfig::default();
        let tight = surface_integrals(&imm, &phi, &cfg).unwrap();
        let (r0, r1) = phi.radial_range();
        let wide = surface_integrals_on(&imm, &phi, &imm.radial_support(0.5 * r0, 1.5 * r1 + 1.0), &cfg).unwrap();
        let tol = tight.mass.error + wide.mass.error + 1e-12 * tight.mass.value;
        prop_assert!((tight.mass.value - wide.mass.value).abs() <= tol, "{:?} vs {:?}", tight.mass, wide.mass);
    }

    /// −∫φ|h|² never adds mass; only the Dφ term can.
    #[test]
    fn curvature_term_is_dissipative(imm in families(), which in 0u8..3, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let phi = test_function(&imm, which, a, b);
        let s = surface_integrals(&imm, &phi, &QuadratureConfig::default()).unwrap();
        prop_assert!(s.mass.value >= -s.mass.error);
        prop_assert!(-s.h_term.value <= s.h_term.error);
    }

    #[test]
    fn constant_h_density(imm in families()) {
        prop_assert!(h_density_deviation(&imm, 16).unwrap() < 1e-10);
    }
}

#[test]
fn bump_missing_the_image_has_zero_variation() {
    let imm = family(Kind::ExpanderEt, ConeParams::new(3, 2).unwrap(), 1.0);
    let far = hsflow::complex_space::ComplexVector::from_slice(&[0.0, 0.0, 40.0, 0.0]).unwrap();
    let s = surface_integrals(&imm, &TestFunction::shifted_bump(far, 1.0).unwrap(), &QuadratureConfig::default()).unwrap();
    assert_eq!(s.first_variation(), 0.0);
    assert_eq!(s.mass.value, 0.0);
}

/// ‖V_t‖(φ) by a midpoint grid with finite-difference tangents, sharing no
/// code with the adaptive quadrature or the support solver.
fn brute_mass(imm: &CatalogImmersion, phi: &TestFunction, mu: (f64, f64), n_mu: usize, n_th: usize) -> f64 {
    let dmu = (mu.1 - mu.0) / n_mu as f64;
    let dth = TAU / n_th as f64;
    let h = 1e-6;
    let mut acc = 0.0;
    for i in 0..n_mu {
        let u = mu.0 + (i as f64 + 0.5) * dmu;
        for j in 0..n_th {
            let th = (j as f64 + 0.5) * dth;
            let x = imm.evaluate(&[u, th]).unwrap();
            let d = &x - &phi.center;
            let s = 1.0 - d.norm_sq() / (phi.radius * phi.radius);
            if s <= 0.0 {
                continue;
            }
            let fu = (&imm.evaluate(&[u + h, th]).unwrap() - &imm.evaluate(&[u - h, th]).unwrap()).scale(0.5 / h);
            let ft = (&imm.evaluate(&[u, th + h]).unwrap() - &imm.evaluate(&[u, th - h]).unwrap()).scale(0.5 / h);
            let (a, b, c) = (fu.norm_sq(), ft.norm_sq(), fu.coords().iter().zip(ft.coords()).map(|(x, y)| x * y).sum::<f64>());
            acc += s * s * (a * b - c * c).sqrt();
        }
    }
    acc * dmu * dth
}

#[test]
fn first_variation_matches_brute_force_mass_derivative() {
    let pr = ConeParams::new(2, 1).unwrap();
    let t = 1.0;
    let imm = family(Kind::ExpanderEt, pr, t);
    let c = imm.evaluate(&[0.4, 1.0]).unwrap();
    let phi = TestFunction::shifted_bump(c, 0.8).unwrap();
    let dt = 1e-3;
    // the support in μ sits well inside [−2.5, 2.5]
    let m = |tt: f64| brute_mass(&imm.with_time(tt).unwrap(), &phi, (-2.5, 2.5), 1500, 1500);
    let brute = (m(t + dt) - m(t - dt)) / (2.0 * dt);
    let delta = surface_integrals(&imm, &phi, &QuadratureConfig::default()).unwrap().first_variation();
    assert!((brute - delta).abs() < 1e-4 * (1.0 + delta.abs()), "brute {brute} vs δ {delta}");
    assert!(delta.abs() > 1e-2, "test function should see a nonzero variation, δ = {delta}");
}
