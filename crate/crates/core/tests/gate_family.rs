use std::f64::consts::FRAC_PI_2;

use envest::gate_family::{
    edge_point, eigenphases, unitary_canonical, unitary_spectral, CanonicalParams, Edge,
};
use envest::linalg::{c, max_abs};
use proptest::prelude::*;

fn chamber_point() -> impl Strategy<Value = CanonicalParams> {
    prop::array::uniform3(0.0..=FRAC_PI_2).prop_map(|mut a| {
        a.sort_by(|x, y| y.total_cmp(x));
        CanonicalParams::new(a[0], a[1], a[2]).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn canonical_unitary_is_special_unitary(p in chamber_point()) {
        let u = unitary_canonical(&p);
        prop_assert!(u.unitarity_defect() <= 1e-12);
        prop_assert!((u.determinant() - c(1.0, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn spectral_and_explicit_forms_agree(p in chamber_point()) {
        let a = unitary_spectral(&p);
        let b = unitary_canonical(&p);
        prop_assert!(max_abs(&(a.0 - b.0)) <= 1e-12);
        prop_assert!(a.unitarity_defect() <= 1e-12);
    }

    #[test]
    fn eigenphases_sum_to_zero(p in chamber_point()) {
        let s: f64 = eigenphases(&p).iter().sum();
        prop_assert!(s.abs() <= 1e-15);
    }

    #[test]
    fn edge_images_respect_weyl_ordering(alpha in 0.0..=FRAC_PI_2, k in 0usize..6) {
        let e = Edge::ALL[k];
        let p = edge_point(e, alpha).unwrap();
        prop_assert!(p.alpha_x <= FRAC_PI_2);
        prop_assert!(p.alpha_x >= p.alpha_y && p.alpha_y >= p.alpha_z && p.alpha_z >= 0.0);
    }
}

#[test]
fn eigenphase_sum_is_exact_on_dyadic_points() {
    for p in [(1.5, 0.75, 0.25), (0.5, 0.5, 0.5), (1.0, 0.0, 0.0)] {
        let s: f64 = eigenphases(&CanonicalParams::new(p.0, p.1, p.2).unwrap())
            .iter()
            .sum();
        assert_eq!(s, 0.0);
    }
}
