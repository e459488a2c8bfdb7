use jcurves::acs::gallery::{Nonintegrable, Profile, Pushforward};
use jcurves::acs::{deformation_endomorphism, nijenhuis, StructureField};
use jcurves::cauchy_green::{cauchy_green, holder_seminorm, lp_norm, PlaneGrid};
use jcurves::{linalg, Complex64};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn family(kind: u8, amplitude: f64) -> StructureField {
    match kind % 3 {
        0 => StructureField::new(Pushforward::new(2, amplitude, Profile::Bump, None).unwrap()),
        1 => StructureField::new(Pushforward::new(2, amplitude, Profile::Rational { s: 0.75 }, None).unwrap()),
        _ => StructureField::new(Nonintegrable::new(2, amplitude).unwrap()),
    }
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, 4)
}

fn grid(points: usize) -> impl Strategy<Value = PlaneGrid> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), points * points).prop_map(move |vals| {
        let mut g = PlaneGrid::zeros(2.0, points, 1).unwrap();
        for (slot, (re, im)) in g.values_mut().iter_mut().zip(vals) {
            *slot = Complex64::new(re, im);
        }
        g
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gallery_squares_to_minus_identity(kind in 0u8..3, amp in 1e-4..5e-2f64, z in point()) {
        let j = family(kind, amp).evaluate(&z);
        let id = DMatrix::<f64>::identity(4, 4);
        prop_assert!((&j * &j + id).amax() < 1e-12);
    }

    #[test]
    fn deformation_anticommutes_with_standard(kind in 0u8..3, amp in 1e-4..5e-2f64, z in point()) {
        let q = deformation_endomorphism(&family(kind, amp), &z).unwrap();
        let js = linalg::j_st(2);
        prop_assert!((&q * &js + &js * &q).amax() < 1e-12);
    }

    #[test]
    fn nijenhuis_is_antisymmetric(
        kind in 0u8..3,
        amp in 1e-4..5e-2f64,
        z in point(),
        x in prop::collection::vec(-1.0..1.0f64, 4),
        y in prop::collection::vec(-1.0..1.0f64, 4),
    ) {
        let j = family(kind, amp);
        let a = nijenhuis(&j, &z, &x, &y).unwrap();
        let b = nijenhuis(&j, &z, &y, &x).unwrap();
        for (p, q) in a.iter().zip(&b) {
            prop_assert_eq!(*p, -*q);
        }
    }

    #[test]
    fn cauchy_green_is_linear(f in grid(9), g in grid(9), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let combo = f.scale(Complex64::new(a, 0.0)).axpy(Complex64::new(b, 0.0), &g).unwrap();
        let lhs = cauchy_green(&combo);
        let rhs = cauchy_green(&f).scale(Complex64::new(a, 0.0)).axpy(Complex64::new(b, 0.0), &cauchy_green(&g)).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().sup_norm() <= 1e-12 * (1.0 + rhs.sup_norm()));
    }

    #[test]
    fn lp_norm_is_homogeneous(g in grid(9), re in -3.0..3.0f64, im in -3.0..3.0f64, p in 1.0..2.5f64) {
        let c = Complex64::new(re, im);
        let lhs = lp_norm(&g.scale(c), p);
        let rhs = c.norm() * lp_norm(&g, p);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn holder_estimate_grows_with_more_pairs(g in grid(9), gamma in 0.05..0.95f64, k in 0usize..50, seed in any::<u64>()) {
        prop_assert!(holder_seminorm(&g, gamma, k, seed) <= holder_seminorm(&g, gamma, k + 25, seed));
    }
}
