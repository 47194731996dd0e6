use polyapprox::linalg::{dot, norm, sub};
use polyapprox::shape::{constants, g};
use polyapprox::volumes::exact_intrinsic_volumes;
use polyapprox::ConvexBody;
use proptest::prelude::*;

fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    v.iter().map(|x| x / n).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The projection `p` of `x` satisfies `<x - p, y - p> <= 0` for every `y`
    /// in the body; boundary points in random directions stand in for `y`.
    #[test]
    fn ellipsoid_projection_is_variational(
        axes in prop::collection::vec(0.01f64..3.0, 3),
        x in prop::collection::vec(-5.0f64..5.0, 3),
        dirs in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 16),
    ) {
        let e = ConvexBody::ellipsoid_aligned(axes).unwrap();
        let p = e.project_onto(&x).unwrap();
        let r = sub(&x, &p);
        for u in dirs.iter().filter(|u| norm(u) > 1e-3) {
            let y = e.support_point(&unit(u)).unwrap();
            prop_assert!(dot(&r, &sub(&y, &p)) <= 1e-8 * norm(&r).max(1.0));
        }
    }

    #[test]
    fn shape_factor_is_scale_invariant(
        sides in prop::collection::vec(0.05f64..4.0, 3),
        t in 0.5f64..2.0,
        l in 300.0f64..1e5,
    ) {
        let table = constants(3).unwrap();
        let b = ConvexBody::cuboid(vec![0.0; 3], sides).unwrap();
        let v = exact_intrinsic_volumes(&b).unwrap();
        let a = g(&v, l, &table).unwrap();
        let s = g(&v.scaled(t), l, &table).unwrap();
        prop_assert!((a - s).abs() <= 1e-9 * a.max(1.0), "{} vs {}", a, s);
    }
}
