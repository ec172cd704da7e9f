use pairspace::configspace::{
    canonical_representative, canonicalize, from_polar, in_domain, invert, to_polar, HalfSpaceVector, OrderedPair,
};
use pairspace::harmonics::{wigner_rotate, AngularExpansion, AngularIndex, EulerAngles};
use pairspace::{Complex64, Vec3};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    prop_oneof![-50.0..50.0f64, Just(0.0), Just(-0.0), Just(1.0), Just(-1.0)]
}

fn vec3() -> impl Strategy<Value = Vec3> {
    (coord(), coord(), coord()).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #[test]
    fn canonicalize_ignores_labels(a in vec3(), b in vec3()) {
        let p = OrderedPair::new(a, b);
        prop_assert_eq!(canonicalize(&p).unwrap(), canonicalize(&p.swapped()).unwrap());
    }

    #[test]
    fn invert_recovers_the_set(a in vec3(), b in vec3()) {
        let p = OrderedPair::new(a, b);
        let q = invert(&canonicalize(&p).unwrap());
        prop_assert!(q.same_points(&p, 1e-12 * (1.0 + a.norm() + b.norm())));
    }

    #[test]
    fn exactly_one_of_v_and_minus_v_in_domain(v in vec3()) {
        prop_assume!(v.norm() != 0.0);
        prop_assert!(in_domain(&v) != in_domain(&-v));
        prop_assert!(in_domain(&canonical_representative(&v)));
    }

    #[test]
    fn polar_round_trip(v in vec3()) {
        prop_assume!(v.norm() > 1e-6);
        let h = HalfSpaceVector::new(canonical_representative(&v)).unwrap();
        let p = to_polar(&h);
        let back = from_polar(p.r, &p.angles).unwrap();
        prop_assert!((back.as_vec() - h.as_vec()).norm() <= 1e-12 * p.r.max(1.0));
    }

    #[test]
    fn rotation_preserves_norm(l in 0u32..8, m_off in 0u32..17, a in 0.0..6.3f64, b in 0.0..3.15f64, g in 0.0..6.3f64) {
        let m = (m_off % (2 * l + 1)) as i32 - l as i32;
        let idx = AngularIndex::new(l, m).unwrap();
        let c: AngularExpansion = [(idx, Complex64::new(0.6, -0.8))].into_iter().collect();
        let r = wigner_rotate(&c, &EulerAngles::new(a, b, g));
        prop_assert!((r.norm() - 1.0).abs() < 1e-12);
    }
}
