use std::f64::consts::TAU;

use hsflow::complex_space::circular_distance;
use hsflow::immersions::{CatalogImmersion, ConeParams, Immersion, Kind, LambdaChart, LambdaParams, Sign};
use hsflow::lagrangian_calculus::{analyze, lagrangian_angle};
use num_complex::Complex64;
use proptest::prelude::*;

fn pair() -> impl Strategy<Value = ConeParams> {
    prop::sample::select(ConeParams::sweep(7))
}

/// (√q·a·e^{ipθ}, i√p·b·e^{−iqθ}), written out by hand.
fn ansatz(params: &ConeParams, a: f64, b: f64, th: f64) -> [Complex64; 2] {
    let (p, q) = (params.pf(), params.qf());
    [
        Complex64::cis(p * th) * (q.sqrt() * a),
        Complex64::i() * Complex64::cis(-q * th) * (p.sqrt() * b),
    ]
}

fn close(f: &hsflow::complex_space::ComplexVector, z: [Complex64; 2], tol: f64) -> bool {
    (f.z(0) - z[0]).norm() < tol * (1.0 + z[0].norm()) && (f.z(1) - z[1]).norm() < tol * (1.0 + z[1].norm())
}

proptest! {
    #[test]
    fn soliton_slices_at_the_self_similar_time(pr in pair(), mu in -3.0f64..3.0, th in 0.0f64..TAU) {
        prop_assume!(mu.abs() > 1e-6);
        let c = pr.self_similar_constant();
        let st = CatalogImmersion::at_time(Kind::ShrinkerSt, pr, -c).unwrap();
        let et = CatalogImmersion::at_time(Kind::ExpanderEt, pr, c).unwrap();
        prop_assert!(close(&st.evaluate(&[mu, th]).unwrap(), ansatz(&pr, mu.cosh(), mu.sinh(), th), 1e-14));
        prop_assert!(close(&et.evaluate(&[mu, th]).unwrap(), ansatz(&pr, mu.sinh(), mu.cosh(), th), 1e-14));
    }

    #[test]
    fn shrinker_level_set(pr in pair(), mu in -3.0f64..3.0, th in 0.0f64..TAU) {
        let s = CatalogImmersion::new(Kind::ShrinkerS, pr).unwrap();
        let f = s.evaluate(&[mu, th]).unwrap();
        let level = pr.pf() * f.z(0).norm_sqr() - pr.qf() * f.z(1).norm_sqr();
        let pq = pr.pf() * pr.qf();
        prop_assert!((level - pq).abs() < 1e-12 * (1.0 + f.norm_sq()));
    }

    #[test]
    fn link_on_unit_sphere(pr in pair(), th in 0.0f64..TAU) {
        let g = CatalogImmersion::gamma(pr);
        prop_assert!((g.evaluate(&[th]).unwrap().norm_sq() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn case2_crease_is_continuous_not_smooth(t in 0.2f64..4.0, th in 0.0f64..TAU) {
        let pr = ConeParams::new(3, 2).unwrap();
        let v = CatalogImmersion::at_time(Kind::VtCase2, pr, t).unwrap();
        let h = 1e-10;
        let (a, b) = (v.evaluate(&[h, th]).unwrap(), v.evaluate(&[-h, th]).unwrap());
        prop_assert!((&a - &b).max_abs() < 1e-8 * (1.0 + a.norm()));
        let da = v.frame(&[h, th]).unwrap().tangents[0].clone();
        let db = v.frame(&[-h, th]).unwrap().tangents[0].clone();
        prop_assert!((&da - &db).norm() > 1e-3 * da.norm());
    }

    #[test]
    fn zero_sum_lambda_family_has_constant_angle(
        l0 in 0.5f64..3.0,
        l1 in 0.5f64..3.0,
        n3 in any::<bool>(),
        x in -0.8f64..0.8,
        y in -0.8f64..0.8,
        th in 0.0f64..TAU,
    ) {
        // λ = (l0, −l1, l1 − l0) or (l0, −l0) sums to zero
        let lambdas = if n3 { vec![l0, -l1, l1 - l0] } else { vec![l0, -l0] };
        prop_assume!(lambdas.iter().all(|l| l.abs() > 0.1));
        let lp = LambdaParams::new(lambdas.clone(), 1.0).unwrap();
        let imm = CatalogImmersion::lambda_family(lp, LambdaChart::new(0, Sign::Plus)).unwrap();
        let mut at = vec![x];
        if n3 {
            at.push(y);
        }
        let others: f64 = lambdas[1..].iter().zip(&at).map(|(l, v)| l * v * v).sum();
        prop_assume!((1.0 - others) / lambdas[0] > 0.05);
        let angle = |th: f64| {
            let mut pt = at.clone();
            pt.push(th);
            lagrangian_angle(&imm.evaluate_jet(&pt).unwrap().tangents()).unwrap()
        };
        prop_assert!(circular_distance(angle(th), angle(0.0)) < 1e-10);
        let mut pt = at.clone();
        pt.push(th);
        prop_assert!(analyze(&imm, &pt).unwrap().h.norm() < 1e-10);
    }
}
