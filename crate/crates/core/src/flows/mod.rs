//! Frame flow on the oriented orthonormal frame bundle, the induced action on
//! observables and Birkhoff averages along trajectories.

mod liouville;

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::group::random_rotation;
use crate::algebra::rep::RepresentationTable;
use crate::error::{Error, Result};
use crate::geometry::{advance_with_transport, metric_at, sphere, FramePoint, ManifoldModel, Octagon};
use crate::linalg::{c, max_abs, CMatrix};

pub use liouville::{liouville_haar_average, liouville_nodes, DEFAULT_RESOLUTION};

/// Drift above which a transported frame is re-orthonormalized.
pub const REORTHONORMALIZE_TOL: f64 = 1e-12;
pub const DEFAULT_DT: f64 = 0.01;

pub type Evaluator = dyn Fn(&FramePoint) -> Result<CMatrix> + Send + Sync;

/// An `End(ℂᵐ)`-valued function on the frame bundle.
#[derive(Clone)]
pub struct FlowObservable {
    evaluator: Arc<Evaluator>,
    pub fiber_dim: usize,
    pub equivariance_rep: Option<Arc<RepresentationTable>>,
    pub label: String,
}

impl fmt::Debug for FlowObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowObservable")
            .field("label", &self.label)
            .field("fiber_dim", &self.fiber_dim)
            .field("equivariant", &self.equivariance_rep.is_some())
            .finish()
    }
}

impl FlowObservable {
    pub fn new(
        label: impl Into<String>,
        fiber_dim: usize,
        evaluator: impl Fn(&FramePoint) -> Result<CMatrix> + Send + Sync + 'static,
    ) -> Self {
        Self {
            evaluator: Arc::new(evaluator),
            fiber_dim,
            equivariance_rep: None,
            label: label.into(),
        }
    }

    /// Real scalar observable.
    pub fn scalar(label: impl Into<String>, f: impl Fn(&FramePoint) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(label, 1, move |x| Ok(CMatrix::from_element(1, 1, c(f(x)))))
    }

    pub fn constant(value: CMatrix) -> Self {
        let m = value.nrows();
        Self::new("constant", m, move |_| Ok(value.clone()))
    }

    pub fn with_equivariance(mut self, rep: Arc<RepresentationTable>) -> Self {
        self.equivariance_rep = Some(rep);
        self
    }

    pub fn evaluate(&self, x: &FramePoint) -> Result<CMatrix> {
        let v = (self.evaluator)(x)?;
        if v.shape() != (self.fiber_dim, self.fiber_dim) {
            return Err(Error::InvalidInput(format!(
                "observable {} returned a {}×{} matrix, expected fiber dimension {}",
                self.label,
                v.nrows(),
                v.ncols(),
                self.fiber_dim
            )));
        }
        Ok(v)
    }

    /// Pointwise product `f·h`.
    pub fn product(&self, other: &FlowObservable) -> Result<FlowObservable> {
        if self.fiber_dim != other.fiber_dim {
            return Err(Error::InvalidInput("fiber dimensions differ".into()));
        }
        let (a, b) = (self.clone(), other.clone());
        Ok(Self::new(format!("({})·({})", self.label, other.label), self.fiber_dim, move |x| {
            Ok(a.evaluate(x)? * b.evaluate(x)?)
        }))
    }

    /// Pointwise adjoint `f*`.
    pub fn adjoint(&self) -> FlowObservable {
        let a = self.clone();
        let mut out = Self::new(format!("({})*", self.label), self.fiber_dim, move |x| Ok(a.evaluate(x)?.adjoint()));
        out.equivariance_rep = self.equivariance_rep.clone();
        out
    }

    /// Worst violation of `f(x·g) = ρ̂(g)⁻¹ f(x) ρ̂(g)` over the given frames and
    /// every `stride`-th sample of the attached representation.
    pub fn equivariance_residual(&self, frames: &[FramePoint], stride: usize) -> Result<f64> {
        let Some(rep) = &self.equivariance_rep else {
            return Err(Error::Capability(format!("observable {} carries no representation", self.label)));
        };
        let mut worst: f64 = 0.0;
        for x in frames {
            let fx = self.evaluate(x)?;
            for s in rep.samples.iter().step_by(stride.max(1)) {
                let n = s.element.nrows();
                let h = s.element.view((1, 1), (n - 1, n - 1)).into_owned();
                let lhs = self.evaluate(&right_action(x, &h)?)?;
                let rhs = s.matrix.adjoint() * &fx * &s.matrix;
                worst = worst.max(max_abs(&(lhs - rhs)));
            }
        }
        Ok(worst)
    }
}

/// Gram–Schmidt in the metric at the base point; keeps the direction of `e₁`.
fn reorthonormalize(model: &ManifoldModel, point: &[f64], frame: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let g = metric_at(model, point)?;
    let n = frame.ncols();
    let mut out = frame.clone();
    for j in 0..n {
        for i in 0..j {
            let proj = (out.column(i).transpose() * &g * out.column(j))[(0, 0)];
            let ci = out.column(i).into_owned();
            out.column_mut(j).axpy(-proj, &ci, 1.0);
        }
        let len = (out.column(j).transpose() * &g * out.column(j))[(0, 0)].sqrt();
        out.column_mut(j).scale_mut(1.0 / len);
    }
    Ok(out)
}

/// `γ_t`: moves `e₁` along its geodesic and parallel transports `e₂,…,eₙ`.
pub fn frame_flow(model: &ManifoldModel, fp: &FramePoint, t: f64) -> Result<FramePoint> {
    if t == 0.0 {
        return Ok(fp.clone());
    }
    let n = model.dim();
    if fp.frame.shape() != (n, n) {
        return Err(Error::InvalidInput(format!("frame must be {n}×{n}")));
    }
    let rest: Vec<Vec<f64>> = (1..n).map(|j| fp.frame.column(j).iter().cloned().collect()).collect();
    let (state, moved) = advance_with_transport(model, &fp.state(), t, &rest)?;
    let mut frame = DMatrix::zeros(n, n);
    frame.column_mut(0).copy_from_slice(&state.velocity);
    for (j, w) in moved.iter().enumerate() {
        frame.column_mut(j + 1).copy_from_slice(w);
    }
    let mut out = FramePoint::new(state.point, frame);
    if out.orthonormality_residual(model)? > REORTHONORMALIZE_TOL {
        out.frame = reorthonormalize(model, &out.point, &out.frame)?;
    }
    Ok(out)
}

/// `x·g`: rotates `(e₂,…,eₙ)` by `g ∈ SO(n−1)`.
pub fn right_action(fp: &FramePoint, g: &DMatrix<f64>) -> Result<FramePoint> {
    let n = fp.frame.ncols();
    if g.shape() != (n - 1, n - 1) {
        return Err(Error::InvalidInput(format!("expected a {}×{} rotation", n - 1, n - 1)));
    }
    let orth = (g.transpose() * g - DMatrix::identity(n - 1, n - 1)).amax();
    if orth > 1e-10 || (n > 1 && (g.determinant() - 1.0).abs() > 1e-10) {
        return Err(Error::InvalidInput(format!("g is not in SO({}) (orthogonality residual {orth:.2e})", n - 1)));
    }
    let mut block = DMatrix::identity(n, n);
    block.view_mut((1, 1), (n - 1, n - 1)).copy_from(g);
    Ok(FramePoint::new(fp.point.clone(), &fp.frame * block))
}

/// `(β_t f)(x) = f(γ_{−t} x)`.
pub fn beta_flow(model: &ManifoldModel, f: &FlowObservable, t: f64) -> FlowObservable {
    let inner = f.clone();
    let model = model.clone();
    let mut out = FlowObservable::new(format!("β_{t}({})", f.label), f.fiber_dim, move |x| {
        inner.evaluate(&frame_flow(&model, x, -t)?)
    });
    out.equivariance_rep = f.equivariance_rep.clone();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffEstimate {
    pub time_average: CMatrix,
    pub space_average: CMatrix,
    pub horizon: f64,
    pub dt: f64,
    pub trajectory_count: usize,
}

impl BirkhoffEstimate {
    /// `max |time − space|` entrywise.
    pub fn gap(&self) -> f64 {
        max_abs(&(&self.time_average - &self.space_average))
    }

    /// Gap relative to `max(|space|, floor)`.
    pub fn relative_gap(&self, floor: f64) -> f64 {
        self.gap() / max_abs(&self.space_average).max(floor)
    }
}

fn check_horizon(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && horizon >= dt && horizon.is_finite()) {
        return Err(Error::InvalidInput(format!("need T ≥ dt > 0, got T={horizon}, dt={dt}")));
    }
    Ok((horizon / dt).round() as usize)
}

/// `(dt/T) Σ_{k<T/dt} f(γ_{k dt} fp)`; the flow is stepped incrementally.
pub fn time_average(model: &ManifoldModel, f: &FlowObservable, fp: &FramePoint, horizon: f64, dt: f64) -> Result<CMatrix> {
    let steps = check_horizon(horizon, dt)?;
    let m = f.fiber_dim;
    let mut acc = CMatrix::zeros(m, m);
    let mut x = fp.clone();
    for k in 0..steps {
        acc += f.evaluate(&x)?;
        if k + 1 < steps {
            x = frame_flow(model, &x, dt)?;
        }
    }
    Ok(acc * c(1.0 / steps as f64))
}

pub fn birkhoff_average(
    model: &ManifoldModel,
    f: &FlowObservable,
    fp: &FramePoint,
    horizon: f64,
    dt: f64,
) -> Result<BirkhoffEstimate> {
    birkhoff_average_many(model, f, std::slice::from_ref(fp), horizon, dt, DEFAULT_RESOLUTION)
}

/// Pooled time average over independent trajectories (parallel over
/// trajectories, summed in input order) against the Liouville×Haar average.
pub fn birkhoff_average_many(
    model: &ManifoldModel,
    f: &FlowObservable,
    starts: &[FramePoint],
    horizon: f64,
    dt: f64,
    resolution: usize,
) -> Result<BirkhoffEstimate> {
    check_horizon(horizon, dt)?;
    if starts.is_empty() {
        return Err(Error::InvalidInput("at least one trajectory is required".into()));
    }
    let per: Vec<Result<CMatrix>> = starts.par_iter().map(|fp| time_average(model, f, fp, horizon, dt)).collect();
    let m = f.fiber_dim;
    let mut pooled = CMatrix::zeros(m, m);
    for avg in per {
        pooled += avg?;
    }
    Ok(BirkhoffEstimate {
        time_average: pooled * c(1.0 / starts.len() as f64),
        space_average: liouville_haar_average(model, f, resolution)?,
        horizon,
        dt,
        trajectory_count: starts.len(),
    })
}

/// Frame with `e₁` at angle `alpha` in the oriented orthonormal gauge of a
/// two-dimensional model.
pub fn frame_from_angle(model: &ManifoldModel, point: &[f64], alpha: f64) -> Result<FramePoint> {
    if model.dim() != 2 {
        return Err(Error::InvalidInput("direction angles describe frames on surfaces only".into()));
    }
    model.check_point(point)?;
    let g = metric_at(model, point)?;
    let (s, co) = alpha.sin_cos();
    let (a, b) = (g[(0, 0)].sqrt(), g[(1, 1)].sqrt());
    let frame = DMatrix::from_row_slice(2, 2, &[co / a, -s / a, s / b, co / b]);
    Ok(FramePoint::new(point.to_vec(), frame))
}

/// Seeded frame point, uniform in the base for the torus and the sphere and
/// uniform in the Euclidean disk picture for the octagon.
pub fn random_frame_point(model: &ManifoldModel, rng: &mut ChaCha8Rng) -> Result<FramePoint> {
    match model {
        ManifoldModel::FlatTorus { periods } => {
            let point: Vec<f64> = periods.iter().map(|p| rng.random_range(0.0..*p)).collect();
            Ok(FramePoint::new(point, random_rotation(periods.len(), rng)))
        }
        ManifoldModel::RoundSphere2 => loop {
            let z: f64 = rng.random_range(-1.0..1.0);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let point = [z.acos(), phi];
            if sphere::check_chart(&point).is_ok() && point[0].sin() > 1e-6 {
                return frame_from_angle(model, &point, rng.random_range(0.0..std::f64::consts::TAU));
            }
        },
        ManifoldModel::HyperbolicOctagon(oct) => {
            let r = Octagon::vertex_radius();
            loop {
                let (x, y): (f64, f64) = (rng.random_range(-r..r), rng.random_range(-r..r));
                if oct.contains(num_complex::Complex64::new(x, y)) {
                    return frame_from_angle(model, &[x, y], rng.random_range(0.0..std::f64::consts::TAU));
                }
            }
        }
    }
}

pub fn random_frame_points(model: &ManifoldModel, count: usize, seed: u64) -> Result<Vec<FramePoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_frame_point(model, &mut rng)).collect()
}

/// One sample of a trajectory; `value` is `tr f / m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub point: Vec<f64>,
    pub frame: Vec<f64>,
    pub value_re: f64,
    pub value_im: f64,
}

pub fn trajectory(
    model: &ManifoldModel,
    f: &FlowObservable,
    fp: &FramePoint,
    horizon: f64,
    dt: f64,
) -> Result<Vec<TrajectoryRow>> {
    let steps = check_horizon(horizon, dt)?;
    let mut rows = Vec::with_capacity(steps + 1);
    let mut x = fp.clone();
    for k in 0..=steps {
        let tr = f.evaluate(&x)?.trace() / c(f.fiber_dim as f64);
        rows.push(TrajectoryRow {
            t: k as f64 * dt,
            point: x.point.clone(),
            frame: x.frame.transpose().iter().cloned().collect(),
            value_re: tr.re,
            value_im: tr.im,
        });
        if k < steps {
            x = frame_flow(model, &x, dt)?;
        }
    }
    Ok(rows)
}

/// CSV with columns `t, x0…, f00 f01 …(row-major), value_re, value_im`.
pub fn write_trajectory_csv<W: Write>(rows: &[TrajectoryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = rows.first() {
        let n = first.point.len();
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        header.extend((0..n * n).map(|k| format!("f{}{}", k / n, k % n)));
        header.extend(["value_re".to_string(), "value_im".to_string()]);
        w.write_record(&header).map_err(io_error)?;
    }
    for r in rows {
        let mut rec = vec![r.t];
        rec.extend(&r.point);
        rec.extend(&r.frame);
        rec.extend([r.value_re, r.value_im]);
        w.write_record(rec.iter().map(|v| format!("{v:.17e}"))).map_err(io_error)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(e.to_string()))
}

fn io_error(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv output failed: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::group::plane_rotation;
    use std::f64::consts::{FRAC_PI_2, TAU};

    #[test]
    fn zero_time_is_identity() {
        let m = ManifoldModel::round_sphere();
        let fp = frame_from_angle(&m, &[1.0, 0.5], 0.3).unwrap();
        assert_eq!(frame_flow(&m, &fp, 0.0).unwrap(), fp);
    }

    #[test]
    fn torus_frame_is_constant() {
        let m = ManifoldModel::flat_torus(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fp = random_frame_point(&m, &mut rng).unwrap();
        let out = frame_flow(&m, &fp, 1.7).unwrap();
        assert_eq!(out.frame, fp.frame);
        assert!(out.point != fp.point);
    }

    #[test]
    fn sphere_frame_closes_after_two_pi() {
        let m = ManifoldModel::round_sphere();
        let fp = frame_from_angle(&m, &[1.1, 2.0], 0.7).unwrap();
        let out = frame_flow(&m, &fp, TAU).unwrap();
        assert!((out.frame - &fp.frame).amax() < 1e-9);
        assert!(out.point.iter().zip(&fp.point).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn right_action_quarter_turn() {
        let m = ManifoldModel::flat_torus(3).unwrap();
        let fp = FramePoint::new(vec![0.0; 3], DMatrix::identity(3, 3));
        let out = right_action(&fp, &plane_rotation(2, 0, 1, FRAC_PI_2)).unwrap();
        assert!((out.frame.column(1) - fp.frame.column(2)).amax() < 1e-15);
        assert!((out.frame.column(2) + fp.frame.column(1)).amax() < 1e-15);
        assert!(out.orthonormality_residual(&m).unwrap() < 1e-15);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(right_action(&fp, &bad).is_err());
    }

    #[test]
    fn beta_flow_on_torus_is_a_shift() {
        let m = ManifoldModel::flat_torus(2).unwrap();
        let f = FlowObservable::scalar("cos x1", |x| x.point[0].cos());
        let v = [0.6f64, 0.8];
        let fp = FramePoint::new(vec![0.4, 1.0], DMatrix::from_row_slice(2, 2, &[v[0], -v[1], v[1], v[0]]));
        let t = 2.3;
        let got = beta_flow(&m, &f, t).evaluate(&fp).unwrap()[(0, 0)].re;
        assert!((got - (0.4 - t * v[0]).cos()).abs() < 1e-12);
    }

    #[test]
    fn constant_time_average_is_exact() {
        let m = ManifoldModel::hyperbolic_octagon();
        let value = CMatrix::from_element(1, 1, num_complex::Complex64::new(0.25, -1.0));
        let f = FlowObservable::constant(value.clone());
        let fp = random_frame_points(&m, 1, 9).unwrap().remove(0);
        let est = birkhoff_average(&m, &f, &fp, 2.0, 0.5).unwrap();
        assert_eq!(est.time_average, value);
    }

    #[test]
    fn invalid_horizon_is_rejected() {
        let m = ManifoldModel::flat_torus(2).unwrap();
        let f = FlowObservable::constant(CMatrix::identity(1, 1));
        let fp = FramePoint::new(vec![0.0; 2], DMatrix::identity(2, 2));
        assert!(birkhoff_average(&m, &f, &fp, 0.001, 0.01).is_err());
        assert!(birkhoff_average(&m, &f, &fp, 1.0, 0.0).is_err());
    }

    #[test]
    fn trajectory_csv_has_header_and_rows() {
        let m = ManifoldModel::flat_torus(2).unwrap();
        let f = FlowObservable::scalar("cos x1", |x| x.point[0].cos());
        let fp = FramePoint::new(vec![0.0; 2], DMatrix::identity(2, 2));
        let rows = trajectory(&m, &f, &fp, 1.0, 0.5).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("t,x0,x1,f00,f01,f10,f11,value_re,value_im"));
    }
}
