//! Round unit sphere in the spherical chart `(θ, φ)`; dynamics run in ℝ³.

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Points closer than this (in `sin θ`) to a pole are outside the chart.
pub const POLE_EXCLUSION: f64 = 1e-12;

pub fn to_ambient(point: &[f64]) -> Vector3<f64> {
    let (t, p) = (point[0], point[1]);
    Vector3::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos())
}

pub fn from_ambient(p: &Vector3<f64>) -> Result<[f64; 2]> {
    let rho = p.x.hypot(p.y);
    let theta = rho.atan2(p.z);
    if theta.sin() < POLE_EXCLUSION {
        return Err(Error::Domain("point at a pole of the spherical chart".into()));
    }
    Ok([theta, p.y.atan2(p.x)])
}

fn frame_vectors(point: &[f64]) -> (Vector3<f64>, Vector3<f64>) {
    let (t, p) = (point[0], point[1]);
    let e_theta = Vector3::new(t.cos() * p.cos(), t.cos() * p.sin(), -t.sin());
    let e_phi = Vector3::new(-p.sin(), p.cos(), 0.0);
    (e_theta, e_phi)
}

pub fn check_chart(point: &[f64]) -> Result<()> {
    if point.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "sphere chart points have 2 coordinates, got {}",
            point.len()
        )));
    }
    if point[0].sin() < POLE_EXCLUSION || !point[0].is_finite() || !point[1].is_finite() {
        return Err(Error::Domain(format!("({}, {}) is outside the spherical chart", point[0], point[1])));
    }
    Ok(())
}

pub fn tangent_to_ambient(point: &[f64], v: &[f64]) -> Vector3<f64> {
    let (e_theta, e_phi) = frame_vectors(point);
    e_theta * v[0] + e_phi * (v[1] * point[0].sin())
}

pub fn tangent_from_ambient(point: &[f64], v: &Vector3<f64>) -> [f64; 2] {
    let (e_theta, e_phi) = frame_vectors(point);
    [v.dot(&e_theta), v.dot(&e_phi) / point[0].sin()]
}

/// Great-circle motion of a unit tangent vector `v` at `p` for time `t`.
pub fn great_circle(p: &Vector3<f64>, v: &Vector3<f64>, t: f64) -> (Vector3<f64>, Vector3<f64>) {
    let (s, c) = t.sin_cos();
    let q = (p * c + v * s).normalize();
    let w = -p * s + v * c;
    // keep the velocity tangent after rounding
    let w = (w - q * q.dot(&w)).normalize();
    (q, w)
}

/// Parallel transport of `w` along the great circle through `(p, v)`.
pub fn transport(p: &Vector3<f64>, v: &Vector3<f64>, t: f64, w: &Vector3<f64>) -> Vector3<f64> {
    let n = p.cross(v);
    let along = w.dot(v);
    let normal = w.dot(&n);
    let (_, v_t) = great_circle(p, v, t);
    v_t * along + n * normal
}

/// Signed rotation angle of parallel transport around a closed geodesic polygon.
pub fn holonomy(vertices: &[Vector3<f64>]) -> Result<f64> {
    let start = vertices[0];
    let first_dir = edge_direction(&vertices[0], &vertices[1])?;
    let mut w = first_dir;
    for i in 0..vertices.len() {
        let a = vertices[i];
        let b = vertices[(i + 1) % vertices.len()];
        let v = edge_direction(&a, &b)?;
        let length = a.dot(&b).clamp(-1.0, 1.0).acos();
        w = transport(&a, &v, length, &w);
    }
    // angle from the initial vector to the returned one, oriented by the outward normal
    let sin = first_dir.cross(&w).dot(&start);
    let cos = first_dir.dot(&w);
    Ok(sin.atan2(cos))
}

fn edge_direction(a: &Vector3<f64>, b: &Vector3<f64>) -> Result<Vector3<f64>> {
    let t = b - a * a.dot(b);
    if t.norm() < 1e-12 {
        return Err(Error::InvalidInput(
            "degenerate polygon: repeated or antipodal consecutive vertices".into(),
        ));
    }
    Ok(t.normalize())
}
