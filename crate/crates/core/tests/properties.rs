//! Randomized invariants for the arithmetic and closed-form layers.

use nalgebra::DVector;
use proptest::prelude::*;

use fspectra::ambient::make_sphere_cylinder;
use fspectra::theorem::{
    cylinder_gap, euclid_decomposition, index_lower_bound, wedge_test_functions,
};

fn unit(coords: Vec<f64>) -> Option<DVector<f64>> {
    let v = DVector::from_vec(coords);
    let n = v.norm();
    (n > 1e-3).then(|| v / n)
}

proptest! {
    /// The lower bound is a reduced fraction of 2 b1 / (d (d-1)) with a
    /// correct ceiling, monotone in b1.
    #[test]
    fn index_bound_is_reduced_and_monotone(d in 2usize..40, b1 in 0usize..500) {
        let bound = index_lower_bound(d, b1).unwrap();
        let lhs = 2 * b1 as i64 * bound.denominator;
        let rhs = (d * (d - 1)) as i64 * bound.numerator;
        prop_assert_eq!(lhs, rhs, "fraction value changed by reduction");
        prop_assert_eq!(
            bound.ceiling as usize,
            (2 * b1).div_ceil(d * (d - 1)),
            "ceiling mismatch"
        );
        let next = index_lower_bound(d, b1 + 1).unwrap();
        prop_assert!(next.ceiling >= bound.ceiling);
        prop_assert!(
            next.numerator * bound.denominator >= bound.numerator * next.denominator
        );
    }

    /// The closed-form curvature gap is strictly negative for k >= 3 on any
    /// admissible (X, N) built from actual tangent vectors.
    #[test]
    fn cylinder_gap_negative_for_k_ge_3(
        k in 3usize..6,
        lambda in 0.2f64..3.0,
        xc in prop::collection::vec(-1.0f64..1.0, 8),
        nc in prop::collection::vec(-1.0f64..1.0, 8),
        seed_point in -1.0f64..1.0,
    ) {
        let amb = make_sphere_cylinder(k, 2, lambda).unwrap();
        let d = amb.embed_dim_d;
        // a point on the cylinder: sphere factor at a pole, free R^2 part
        let mut p = DVector::zeros(d);
        p[0] = amb.sphere_radius().unwrap();
        p[d - 1] = seed_point;
        let sphere_tangent = |c: &[f64]| {
            let mut v = DVector::zeros(d);
            for (i, &x) in c.iter().take(d - 1).enumerate() {
                v[i + 1] = x; // orthogonal to the pole axis
            }
            v
        };
        let (n, x) = match (unit(sphere_tangent(&nc).as_slice().to_vec()),
                            sphere_tangent(&xc)) {
            (Some(n), x) => (n, x),
            _ => return Ok(()),
        };
        let x = &x - x.dot(&n) * &n;
        if x.norm() < 1e-3 {
            return Ok(());
        }
        let gap = cylinder_gap(k, lambda, &euclid_decomposition(&amb, &x, &n)).unwrap();
        prop_assert!(gap < 0.0, "gap {gap} not negative");
    }

    /// Lagrange's identity: the wedge fields of a unit normal and a
    /// tangential form satisfy sum u_ij^2 = |omega|^2.
    #[test]
    fn wedge_fields_satisfy_lagrange(
        nc in prop::collection::vec(-1.0f64..1.0, 5),
        wc in prop::collection::vec(-1.0f64..1.0, 5),
    ) {
        let n = match unit(nc) {
            Some(n) => n,
            None => return Ok(()),
        };
        let w0 = DVector::from_vec(wc);
        let w = &w0 - w0.dot(&n) * &n;
        let family = wedge_test_functions(&[(n, w.clone())]).unwrap();
        prop_assert!(family.lagrange_residual(&[w.norm_squared()]) < 1e-10);
    }

    /// The gap formula rejects decompositions that violate Cauchy-Schwarz.
    #[test]
    fn impossible_decompositions_are_rejected(extra in 0.1f64..5.0) {
        use fspectra::theorem::XDecomposition;
        let bad = XDecomposition {
            x_norm: 1.0,
            pi_r_x: 1.0 + extra, // longer than the full vector
            pi_r_n: 0.5,
            dot: 0.0,
        };
        prop_assert!(cylinder_gap(3, 1.0, &bad).is_err());
    }
}
