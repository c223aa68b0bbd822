use hsflow::complex_space::{
    apply_j, circular_distance, complex_determinant_of_frame, euclidean_inner, symplectic_form, ComplexVector,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn vector(n: usize) -> impl Strategy<Value = ComplexVector> {
    prop::collection::vec(-10.0f64..10.0, 2 * n).prop_map(|c| ComplexVector::from_slice(&c).unwrap())
}

fn frame() -> impl Strategy<Value = Vec<ComplexVector>> {
    (2usize..=4).prop_flat_map(|n| prop::collection::vec(vector(n), n))
}

proptest! {
    #[test]
    fn j_squared_is_minus_identity(v in (1usize..=4).prop_flat_map(vector)) {
        let jj = apply_j(&apply_j(&v));
        for (a, b) in jj.coords().iter().zip(v.coords()) {
            prop_assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn omega_is_inner_product_with_j(
        (u, v) in (1usize..=4).prop_flat_map(|n| (vector(n), vector(n)))
    ) {
        let w = symplectic_form(&u, &v).unwrap();
        let via_j = euclidean_inner(&apply_j(&u), &v).unwrap();
        // Im Σ conj(uᵢ)vᵢ, straight from the complex coordinates
        let oracle: f64 = u.to_complex().iter().zip(v.to_complex().iter()).map(|(a, b)| (a.conj() * b).im).sum();
        let scale = 1.0 + u.norm() * v.norm();
        prop_assert!((w - via_j).abs() < 1e-14 * scale);
        prop_assert!((w - oracle).abs() < 1e-14 * scale);
    }

    #[test]
    fn determinant_is_alternating(f in frame(), i in 0usize..4, j in 0usize..4) {
        let n = f.len();
        let (i, j) = (i % n, j % n);
        prop_assume!(i != j);
        let a = complex_determinant_of_frame(&f).unwrap();
        prop_assume!(a.modulus > 1e-6);
        let mut g = f.clone();
        g.swap(i, j);
        let b = complex_determinant_of_frame(&g).unwrap();
        prop_assert!((a.modulus - b.modulus).abs() < 1e-10 * a.modulus);
        prop_assert!(circular_distance(a.phase + std::f64::consts::PI, b.phase) < 1e-9);
    }

    #[test]
    fn two_by_two_determinant_matches_formula(f in prop::collection::vec(vector(2), 2)) {
        let z: Vec<Vec<Complex64>> = f.iter().map(|v| v.to_complex().to_vec()).collect();
        // columns are frame vectors
        let oracle = z[0][0] * z[1][1] - z[1][0] * z[0][1];
        let d = complex_determinant_of_frame(&f).unwrap();
        prop_assert!((d.modulus - oracle.norm()).abs() < 1e-12 * (1.0 + oracle.norm()));
        if oracle.norm() > 1e-6 {
            prop_assert!(circular_distance(d.phase, oracle.arg()) < 1e-10);
        }
    }
}
