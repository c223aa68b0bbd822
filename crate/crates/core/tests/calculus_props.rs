use std::f64::consts::TAU;

use hsflow::complex_space::circular_distance;
use hsflow::immersions::{CatalogImmersion, ConeParams, Immersion, Kind};
use hsflow::lagrangian_calculus::{analyze, lagrangian_angle};
use proptest::prelude::*;

const SURFACE_KINDS: [Kind; 8] = [
    Kind::ShrinkerS,
    Kind::ExpanderE,
    Kind::ShrinkerSt,
    Kind::ExpanderEt,
    Kind::VtCase2,
    Kind::VtCase3,
    Kind::LimitS0,
    Kind::LimitE0,
];

fn surface() -> impl Strategy<Value = CatalogImmersion> {
    (prop::sample::select(ConeParams::sweep(5)), prop::sample::select(SURFACE_KINDS.to_vec()), 0.2f64..3.0).prop_map(
        |(pr, k, t)| {
            if k.is_time_indexed() {
                let sign = match k {
                    Kind::ShrinkerSt | Kind::VtCase3 => -1.0,
                    _ => 1.0,
                };
                CatalogImmersion::at_time(k, pr, sign * t).unwrap()
            } else {
                CatalogImmersion::new(k, pr).unwrap()
            }
        },
    )
}

proptest! {
    #[test]
    fn metric_inverse_and_h_normality(imm in surface(), mu in -2.0f64..2.0, th in 0.0f64..TAU) {
        prop_assume!(mu.abs() > 1e-3);
        let x = [mu, th];
        let g = analyze(&imm, &x).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let v: f64 = (0..2).map(|c| g.metric[a * 2 + c] * g.metric_inv[c * 2 + b]).sum();
                let id = if a == b { 1.0 } else { 0.0 };
                prop_assert!((v - id).abs() < 1e-10);
            }
        }
        let t = imm.evaluate_jet(&x).unwrap().tangents();
        prop_assert!(g.h_normality(&t) < 1e-9, "{}", g.h_normality(&t));
    }

    /// J∇β against the trace of the second fundamental form, which never
    /// touches β.
    #[test]
    fn mean_curvature_two_ways(imm in surface(), mu in -2.0f64..2.0, th in 0.0f64..TAU) {
        prop_assume!(mu.abs() > 1e-3);
        let g = analyze(&imm, &[mu, th]).unwrap();
        let d = &g.h - &g.h_sff;
        prop_assert!(d.norm() < 1e-9 * (1.0 + g.h.norm()), "{:e}", d.norm());
    }

    #[test]
    fn angle_gauge(imm in surface(), mu in -2.0f64..2.0, th in 0.0f64..TAU) {
        prop_assume!(mu.abs() > 1e-3);
        let slope = imm.cone_params().unwrap().angle_slope();
        let b = |t: f64| lagrangian_angle(&imm.evaluate_jet(&[mu, t]).unwrap().tangents()).unwrap();
        prop_assert!(circular_distance(b(th) - b(0.0), slope * th) < 1e-10);
    }
}
