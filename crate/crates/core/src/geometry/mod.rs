//! Closed-form Riemannian model manifolds: flat tori, the round two-sphere and
//! the genus-two surface built from the regular hyperbolic octagon.
//!
//! Chart conventions:
//! * `FlatTorus`: Cartesian coordinates, wrapped into `[0, Lᵢ)`.
//! * `RoundSphere2`: spherical coordinates `(θ, φ)` with the poles excluded;
//!   velocities are chart components `(θ̇, φ̇)`.
//! * `HyperbolicOctagon`: Poincaré disk coordinates `(x, y)` of a point in the
//!   fundamental octagon, metric `4 |dz|² / (1 − |z|²)²`.

pub mod hyperbolic;
pub mod integrator;
pub mod sphere;
pub mod torus;

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use hyperbolic::{Octagon, Su11};

#[derive(Debug, Clone, PartialEq)]
pub enum ManifoldModel {
    FlatTorus { periods: Vec<f64> },
    RoundSphere2,
    HyperbolicOctagon(Box<Octagon>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    FlatTorus,
    RoundSphere2,
    HyperbolicOctagon,
}

impl ManifoldModel {
    /// Flat torus of dimension 2 or 3 with all periods `2π`.
    pub fn flat_torus(dim: usize) -> Result<Self> {
        Self::flat_torus_with_periods(vec![TAU; dim])
    }

    pub fn flat_torus_with_periods(periods: Vec<f64>) -> Result<Self> {
        if !(2..=3).contains(&periods.len()) {
            return Err(Error::InvalidInput(format!(
                "flat torus dimension must be 2 or 3, got {}",
                periods.len()
            )));
        }
        if periods.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidInput("torus periods must be positive".into()));
        }
        Ok(Self::FlatTorus { periods })
    }

    pub fn round_sphere() -> Self {
        Self::RoundSphere2
    }

    pub fn hyperbolic_octagon() -> Self {
        Self::HyperbolicOctagon(Box::new(Octagon::regular()))
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Self::FlatTorus { .. } => ModelKind::FlatTorus,
            Self::RoundSphere2 => ModelKind::RoundSphere2,
            Self::HyperbolicOctagon(_) => ModelKind::HyperbolicOctagon,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::FlatTorus { periods } => periods.len(),
            _ => 2,
        }
    }

    /// Constant sectional curvature.
    pub fn curvature(&self) -> f64 {
        match self {
            Self::FlatTorus { .. } => 0.0,
            Self::RoundSphere2 => 1.0,
            Self::HyperbolicOctagon(_) => -1.0,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Self::FlatTorus { periods } => periods.iter().product(),
            Self::RoundSphere2 => 4.0 * PI,
            Self::HyperbolicOctagon(_) => Octagon::area(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::FlatTorus { periods } => format!("T{}", periods.len()),
            Self::RoundSphere2 => "S2".into(),
            Self::HyperbolicOctagon(_) => "octagon".into(),
        }
    }

    pub(crate) fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "{} points have {} coordinates, got {}",
                self.name(),
                self.dim(),
                point.len()
            )));
        }
        match self {
            Self::FlatTorus { .. } => {
                if point.iter().all(|x| x.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::Domain("non-finite torus coordinate".into()))
                }
            }
            Self::RoundSphere2 => sphere::check_chart(point),
            Self::HyperbolicOctagon(oct) => {
                let z = Complex64::new(point[0], point[1]);
                if oct.contains(z) {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("{z} is outside the fundamental octagon")))
                }
            }
        }
    }
}

/// A point of the unit (co)tangent bundle, or any tangent vector at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointState {
    pub point: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl PointState {
    pub fn new(point: Vec<f64>, velocity: Vec<f64>) -> Self {
        Self { point, velocity }
    }
}

/// A base point with an oriented orthonormal frame; column 0 is the flow direction.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePoint {
    pub point: Vec<f64>,
    pub frame: DMatrix<f64>,
}

impl FramePoint {
    pub fn new(point: Vec<f64>, frame: DMatrix<f64>) -> Self {
        Self { point, frame }
    }

    /// State of the first frame vector.
    pub fn state(&self) -> PointState {
        PointState::new(self.point.clone(), self.frame.column(0).iter().cloned().collect())
    }

    /// `max |Fᵀ G F − I|`.
    pub fn orthonormality_residual(&self, model: &ManifoldModel) -> Result<f64> {
        let g = metric_at(model, &self.point)?;
        let gram = self.frame.transpose() * g * &self.frame;
        let n = gram.nrows();
        Ok((gram - DMatrix::identity(n, n)).amax())
    }

    /// Determinant of the frame expressed in an oriented orthonormal gauge.
    pub fn orientation(&self, model: &ManifoldModel) -> Result<f64> {
        let scale = orthonormal_gauge(model, &self.point)?;
        Ok((scale * &self.frame).determinant())
    }
}

/// Matrix taking chart components to components in the oriented orthonormal
/// frame `(∂₁/|∂₁|, …)`.
pub(crate) fn orthonormal_gauge(model: &ManifoldModel, point: &[f64]) -> Result<DMatrix<f64>> {
    model.check_point(point)?;
    let n = model.dim();
    Ok(match model {
        ManifoldModel::FlatTorus { .. } => DMatrix::identity(n, n),
        ManifoldModel::RoundSphere2 => DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, point[0].sin()])),
        ManifoldModel::HyperbolicOctagon(_) => {
            let lambda = hyperbolic::conformal_factor(Complex64::new(point[0], point[1]));
            DMatrix::identity(2, 2) * lambda
        }
    })
}

/// Metric matrix `G(point)` in chart coordinates.
pub fn metric_at(model: &ManifoldModel, point: &[f64]) -> Result<DMatrix<f64>> {
    let gauge = orthonormal_gauge(model, point)?;
    Ok(gauge.transpose() * gauge)
}

pub fn inner(model: &ManifoldModel, point: &[f64], a: &[f64], b: &[f64]) -> Result<f64> {
    let g = metric_at(model, point)?;
    let n = model.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += a[i] * g[(i, j)] * b[j];
        }
    }
    Ok(acc)
}

pub fn norm(model: &ManifoldModel, point: &[f64], v: &[f64]) -> Result<f64> {
    Ok(inner(model, point, v, v)?.sqrt())
}

fn disk_point(point: &[f64]) -> Complex64 {
    Complex64::new(point[0], point[1])
}

fn disk_state(oct: &Octagon, state: &PointState) -> Result<(Su11, f64)> {
    let z = disk_point(&state.point);
    if !oct.contains(z) {
        return Err(Error::Domain(format!("{z} is outside the fundamental octagon")));
    }
    let angle = state.velocity[1].atan2(state.velocity[0]);
    let speed = state.velocity[0].hypot(state.velocity[1]) * hyperbolic::conformal_factor(z);
    Ok((Su11::from_point_direction(z, angle)?, speed))
}

fn disk_unpack(g: &Su11, speed: f64) -> PointState {
    let z = g.base_point();
    let euclid = speed / hyperbolic::conformal_factor(z);
    let angle = g.direction_angle();
    PointState::new(vec![z.re, z.im], vec![euclid * angle.cos(), euclid * angle.sin()])
}

/// Geodesic flow for time `t` (velocity magnitude is preserved, so unit-speed
/// states stay on the unit tangent bundle).
pub fn geodesic_advance(model: &ManifoldModel, state: &PointState, t: f64) -> Result<PointState> {
    model.check_point(&state.point)?;
    if state.velocity.len() != model.dim() {
        return Err(Error::InvalidInput("velocity has the wrong dimension".into()));
    }
    match model {
        ManifoldModel::FlatTorus { periods } => Ok(PointState::new(
            torus::advance(&state.point, &state.velocity, t, periods),
            state.velocity.clone(),
        )),
        ManifoldModel::RoundSphere2 => {
            let p = sphere::to_ambient(&state.point);
            let v = sphere::tangent_to_ambient(&state.point, &state.velocity);
            let speed = v.norm();
            if speed == 0.0 {
                return Ok(state.clone());
            }
            let (q, w) = sphere::great_circle(&p, &(v / speed), t * speed);
            let point = sphere::from_ambient(&q)?;
            let velocity = sphere::tangent_from_ambient(&point, &(w * speed));
            Ok(PointState::new(point.to_vec(), velocity.to_vec()))
        }
        ManifoldModel::HyperbolicOctagon(oct) => {
            let (g, speed) = disk_state(oct, state)?;
            if speed == 0.0 {
                return Ok(state.clone());
            }
            let moved = oct.flow(g, t * speed)?;
            Ok(disk_unpack(&moved, speed))
        }
    }
}

/// Geodesic in the disk chart without side-pairing re-entry.
pub(crate) fn disk_geodesic_unreduced(state: &PointState, t: f64) -> Result<PointState> {
    let z = disk_point(&state.point);
    let angle = state.velocity[1].atan2(state.velocity[0]);
    let speed = state.velocity[0].hypot(state.velocity[1]) * hyperbolic::conformal_factor(z);
    let g = Su11::from_point_direction(z, angle)?;
    Ok(disk_unpack(&g.flow(t * speed), speed))
}

/// Levi-Civita transport of `w` along the geodesic through `state` for time `t`.
pub fn parallel_transport(
    model: &ManifoldModel,
    state: &PointState,
    t: f64,
    w: &[f64],
) -> Result<Vec<f64>> {
    let (_, mut moved) = advance_with_transport(model, state, t, &[w.to_vec()])?;
    Ok(moved.remove(0))
}

/// Geodesic flow of `state` together with the parallel transport of each of
/// `vectors` along it, computing the geodesic once.
pub fn advance_with_transport(
    model: &ManifoldModel,
    state: &PointState,
    t: f64,
    vectors: &[Vec<f64>],
) -> Result<(PointState, Vec<Vec<f64>>)> {
    model.check_point(&state.point)?;
    if vectors.iter().any(|w| w.len() != model.dim()) {
        return Err(Error::InvalidInput("transported vector has the wrong dimension".into()));
    }
    match model {
        ManifoldModel::FlatTorus { .. } => Ok((geodesic_advance(model, state, t)?, vectors.to_vec())),
        ManifoldModel::RoundSphere2 => {
            let p = sphere::to_ambient(&state.point);
            let v = sphere::tangent_to_ambient(&state.point, &state.velocity);
            let speed = v.norm();
            if speed == 0.0 {
                return Ok((state.clone(), vectors.to_vec()));
            }
            let v = v / speed;
            let (q, vq) = sphere::great_circle(&p, &v, t * speed);
            let point = sphere::from_ambient(&q)?;
            let moved = vectors
                .iter()
                .map(|w| {
                    let w3 = sphere::tangent_to_ambient(&state.point, w);
                    sphere::tangent_from_ambient(&point, &sphere::transport(&p, &v, t * speed, &w3)).to_vec()
                })
                .collect();
            let velocity = sphere::tangent_from_ambient(&point, &(vq * speed)).to_vec();
            Ok((PointState::new(point.to_vec(), velocity), moved))
        }
        ManifoldModel::HyperbolicOctagon(_) => {
            let end = geodesic_advance(model, state, t)?;
            let moved = vectors
                .iter()
                .map(|w| rotate_with_velocity(&state.point, &state.velocity, &end.point, &end.velocity, w))
                .collect();
            Ok((end, moved))
        }
    }
}

/// In a conformal 2-d chart, keeps the angle between `w` and the velocity and
/// the metric length of `w`.
fn rotate_with_velocity(p0: &[f64], v0: &[f64], p1: &[f64], v1: &[f64], w: &[f64]) -> Vec<f64> {
    let l0 = hyperbolic::conformal_factor(disk_point(p0));
    let l1 = hyperbolic::conformal_factor(disk_point(p1));
    let rel = w[1].atan2(w[0]) - v0[1].atan2(v0[0]);
    let len = w[0].hypot(w[1]) * l0 / l1;
    let angle = v1[1].atan2(v1[0]) + rel;
    vec![len * angle.cos(), len * angle.sin()]
}

/// Rotation angle (radians, in `(−π, π]`) of parallel transport around the
/// closed geodesic polygon through `vertices`.
///
/// Sphere vertices may be given in the chart `(θ, φ)` or as ambient unit
/// vectors `(x, y, z)`, so polygons through the poles can be described.
pub fn holonomy(model: &ManifoldModel, vertices: &[Vec<f64>]) -> Result<f64> {
    if vertices.len() < 3 {
        return Err(Error::InvalidInput("a polygon needs at least three vertices".into()));
    }
    for i in 0..vertices.len() {
        let j = (i + 1) % vertices.len();
        let d: f64 = vertices[i]
            .iter()
            .zip(&vertices[j])
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        if d < 1e-12 {
            return Err(Error::InvalidInput(format!("repeated vertex at position {j}")));
        }
    }
    match model {
        ManifoldModel::FlatTorus { .. } => {
            for v in vertices {
                model.check_point(v)?;
            }
            Ok(0.0)
        }
        ManifoldModel::RoundSphere2 => {
            let pts = vertices
                .iter()
                .map(|v| match v.len() {
                    3 => {
                        let p = Vector3::new(v[0], v[1], v[2]);
                        if (p.norm() - 1.0).abs() > 1e-12 {
                            Err(Error::Domain("ambient sphere vertex is not a unit vector".into()))
                        } else {
                            Ok(p)
                        }
                    }
                    _ => {
                        sphere::check_chart(v)?;
                        Ok(sphere::to_ambient(v))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            sphere::holonomy(&pts)
        }
        ManifoldModel::HyperbolicOctagon(_) => {
            let mut turned = 0.0;
            for i in 0..vertices.len() {
                model.check_point(&vertices[i])?;
                let a = disk_point(&vertices[i]);
                let b = disk_point(&vertices[(i + 1) % vertices.len()]);
                // move a to the origin; the geodesic to b becomes a diameter
                let w = (b - a) / (Complex64::new(1.0, 0.0) - a.conj() * b);
                let start = Su11::from_point_direction(a, w.arg())?;
                let end = start.flow(2.0 * w.norm().atanh());
                turned += end.direction_angle() - start.direction_angle();
            }
            Ok(wrap_angle(turned))
        }
    }
}

/// Area of the geodesic triangle through three vertices: the solid angle on
/// the sphere (ambient or chart vertices) and the angle defect on the octagon.
pub fn triangle_area(model: &ManifoldModel, vertices: &[Vec<f64>]) -> Result<f64> {
    if vertices.len() != 3 {
        return Err(Error::InvalidInput(format!("a triangle has three vertices, got {}", vertices.len())));
    }
    match model {
        ManifoldModel::FlatTorus { .. } => Err(Error::Capability("flat triangles carry no curvature".into())),
        ManifoldModel::RoundSphere2 => {
            let p: Vec<Vector3<f64>> = vertices
                .iter()
                .map(|v| if v.len() == 3 { Vector3::new(v[0], v[1], v[2]).normalize() } else { sphere::to_ambient(v) })
                .collect();
            let num = p[0].dot(&p[1].cross(&p[2])).abs();
            let den = 1.0 + p[0].dot(&p[1]) + p[1].dot(&p[2]) + p[2].dot(&p[0]);
            Ok(2.0 * num.atan2(den))
        }
        ManifoldModel::HyperbolicOctagon(_) => {
            let z: Vec<Complex64> = vertices.iter().map(|v| disk_point(v)).collect();
            let side = |i: usize, j: usize| hyperbolic::disk_distance(z[i], z[j]);
            let (a, b, c_) = (side(1, 2), side(0, 2), side(0, 1));
            let angle = |opp: f64, s: f64, t: f64| {
                ((s.cosh() * t.cosh() - opp.cosh()) / (s.sinh() * t.sinh())).clamp(-1.0, 1.0).acos()
            };
            Ok(PI - angle(a, b, c_) - angle(b, a, c_) - angle(c_, a, b))
        }
    }
}

/// Maps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Christoffel symbols of the Poincaré metric at any point of the open disk.
pub(crate) fn disk_christoffel(point: &[f64]) -> Vec<DMatrix<f64>> {
    let r2 = point[0] * point[0] + point[1] * point[1];
    // gradient of log λ
    let u = [2.0 * point[0] / (1.0 - r2), 2.0 * point[1] / (1.0 - r2)];
    let mut gamma = vec![DMatrix::zeros(2, 2); 2];
    for (k, g) in gamma.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                let mut v = 0.0;
                if i == k {
                    v += u[j];
                }
                if j == k {
                    v += u[i];
                }
                if i == j {
                    v -= u[k];
                }
                g[(i, j)] = v;
            }
        }
    }
    gamma
}

/// Christoffel symbols `Γ^k_{ij}`, returned as one `n×n` matrix per upper index `k`.
pub fn christoffel(model: &ManifoldModel, point: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    model.check_point(point)?;
    let n = model.dim();
    let mut gamma = vec![DMatrix::zeros(n, n); n];
    match model {
        ManifoldModel::FlatTorus { .. } => {}
        ManifoldModel::RoundSphere2 => {
            let (s, c) = point[0].sin_cos();
            gamma[0][(1, 1)] = -s * c;
            gamma[1][(0, 1)] = c / s;
            gamma[1][(1, 0)] = c / s;
        }
        ManifoldModel::HyperbolicOctagon(_) => gamma = disk_christoffel(point),
    }
    Ok(gamma)
}
