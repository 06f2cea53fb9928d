use std::f64::consts::PI;

use frameflow_core::geometry::hyperbolic::disk_distance;
use frameflow_core::geometry::{holonomy, wrap_angle, ManifoldModel};
use nalgebra::Vector3;
use num_complex::Complex64;
use proptest::prelude::*;

/// Solid angle of the spherical triangle `abc` (Van Oosterom–Strackee).
fn spherical_area(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let num = a.dot(&b.cross(c)).abs();
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

/// Angle defect of a hyperbolic triangle from its side lengths.
fn hyperbolic_area(p: Complex64, q: Complex64, r: Complex64) -> f64 {
    let (a, b, c) = (disk_distance(q, r), disk_distance(p, r), disk_distance(p, q));
    let angle = |opp: f64, s: f64, t: f64| ((s.cosh() * t.cosh() - opp.cosh()) / (s.sinh() * t.sinh())).clamp(-1.0, 1.0).acos();
    PI - angle(a, b, c) - angle(b, a, c) - angle(c, a, b)
}

fn ambient(v: &Vector3<f64>) -> Vec<f64> {
    vec![v[0], v[1], v[2]]
}

#[test]
fn octant_triangle_on_the_sphere() {
    let s2 = ManifoldModel::round_sphere();
    let v = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
    let h = holonomy(&s2, &v).unwrap();
    assert!((h.abs() - PI / 2.0).abs() <= 1e-12, "{h}");
}

#[test]
fn sphere_holonomy_is_curvature_times_area() {
    let s2 = ManifoldModel::round_sphere();
    let tris = [
        [Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0), Vector3::new(0.3, 0.2, 0.9).normalize()],
        [Vector3::new(0.2, -0.1, 1.0).normalize(), Vector3::new(0.4, 0.1, 0.9).normalize(), Vector3::new(0.1, 0.35, 0.95).normalize()],
    ];
    for t in &tris {
        let area = spherical_area(&t[0], &t[1], &t[2]);
        let h = holonomy(&s2, &t.iter().map(ambient).collect::<Vec<_>>()).unwrap();
        assert!((h - s2.curvature() * area).abs() <= 1e-6, "{h} vs {area}");
    }
}

#[test]
fn octagon_holonomy_is_curvature_times_area() {
    let oct = ManifoldModel::hyperbolic_octagon();
    let tris = [
        [Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5)],
        [Complex64::new(-0.3, -0.2), Complex64::new(0.4, -0.1), Complex64::new(0.1, 0.55)],
    ];
    for t in &tris {
        let area = hyperbolic_area(t[0], t[1], t[2]);
        let v: Vec<Vec<f64>> = t.iter().map(|z| vec![z.re, z.im]).collect();
        let h = holonomy(&oct, &v).unwrap();
        assert!((h - oct.curvature() * area).abs() <= 1e-6, "{h} vs {}", -area);
    }
}

#[test]
fn torus_holonomy_is_trivial() {
    let t2 = ManifoldModel::flat_torus(2).unwrap();
    assert_eq!(holonomy(&t2, &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn small_sphere_triangles(x in -0.3f64..0.3, y in -0.3f64..0.3, d in 0.05f64..0.3, e in 0.05f64..0.3) {
        let s2 = ManifoldModel::round_sphere();
        let a = Vector3::new(x, y, 1.0).normalize();
        let b = Vector3::new(x + d, y, 1.0).normalize();
        let c = Vector3::new(x, y + e, 1.0).normalize();
        let h = holonomy(&s2, &[ambient(&a), ambient(&b), ambient(&c)]).unwrap();
        prop_assert!((h - spherical_area(&a, &b, &c)).abs() <= 1e-6);
        // reversing orientation flips the sign
        let r = holonomy(&s2, &[ambient(&a), ambient(&c), ambient(&b)]).unwrap();
        prop_assert!((wrap_angle(r + h)).abs() <= 1e-9);
    }

    #[test]
    fn small_octagon_triangles(x in -0.3f64..0.3, y in -0.3f64..0.3, d in 0.05f64..0.25, e in 0.05f64..0.25) {
        let oct = ManifoldModel::hyperbolic_octagon();
        let (p, q, r) = (Complex64::new(x, y), Complex64::new(x + d, y), Complex64::new(x, y + e));
        let h = holonomy(&oct, &[vec![p.re, p.im], vec![q.re, q.im], vec![r.re, r.im]]).unwrap();
        prop_assert!((h + hyperbolic_area(p, q, r)).abs() <= 1e-6);
    }
}
