use std::f64::consts::PI;

use polyapprox::approx::{self, ApproxOptions};
use polyapprox::{ConvexBody, ConvexBodySpec, HPolytope};

fn body(json: &str) -> ConvexBody {
    let spec: ConvexBodySpec = serde_json::from_str(json).unwrap();
    ConvexBody::from_spec(&spec).unwrap()
}

#[test]
fn spec_document_builds_ellipsoid() {
    let e = body(r#"{"dim": 3, "variant": "ellipsoid", "semi_axes": [1, 0.3, 0.2], "center": [1, 0, 0]}"#);
    let u = [0.6, 0.0, 0.8];
    let want = 0.6 + (0.36f64 + 0.04 * 0.64).sqrt();
    assert!((e.support_value(&u).unwrap() - want).abs() < 1e-12);
}

#[test]
fn disc_approximation_matches_polygon_geometry() {
    let disc = body(r#"{"dim": 2, "variant": "ball", "radius": 0.5}"#);
    let r = approx::approximate_eps(&disc, 0.05, &ApproxOptions::with_seed(3)).unwrap();
    assert!(r.d_h < 0.05 && r.facets_ok && r.containment_ok, "{r:?}");

    // circumscribed polygon: the distance is attained at a vertex between
    // consecutive tangent directions θ apart, at 0.5 (1/cos(θ/2) - 1)
    let mut angles: Vec<f64> = r.polytope.normals().iter().map(|a| a[1].atan2(a[0])).collect();
    angles.sort_by(f64::total_cmp);
    let mut gaps: Vec<f64> = angles.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.push(angles[0] + 2.0 * PI - angles[angles.len() - 1]);
    let widest = gaps.iter().cloned().fold(0.0, f64::max);
    let want = 0.5 * (1.0 / (widest / 2.0).cos() - 1.0);
    assert!((r.d_h - want).abs() < 1e-5, "{} vs {want}", r.d_h);
}

#[test]
fn polytope_text_round_trip_keeps_distance() {
    let cube = ConvexBody::unit_cube(3).unwrap();
    let r = approx::approximate_eps(&cube, 0.3, &ApproxOptions::with_seed(8)).unwrap();
    let back = HPolytope::from_text(&r.polytope.to_text()).unwrap();
    assert_eq!(back.len(), r.polytope.len());
    let again = approx::hausdorff_exact(&cube, &back).unwrap();
    assert!((again - r.d_h).abs() < 1e-9);
}
