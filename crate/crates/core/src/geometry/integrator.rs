//! Generic fourth-order integration of the parallel-transport equation
//! `ẇᵏ = −Γᵏᵢⱼ vⁱ wʲ`, used as an independent check of the closed forms.
//!
//! The geodesic itself is taken from the closed-form flow. On the octagon the
//! path is followed in the disk chart without side re-entry, so `t` must be
//! short enough for the chart path to stay in the disk.

use super::{christoffel, disk_christoffel, disk_geodesic_unreduced, geodesic_advance, ManifoldModel, PointState};
use crate::error::Result;

fn path(model: &ManifoldModel, state: &PointState, s: f64) -> Result<PointState> {
    match model {
        ManifoldModel::HyperbolicOctagon(_) => disk_geodesic_unreduced(state, s),
        _ => geodesic_advance(model, state, s),
    }
}

fn christoffel_any(model: &ManifoldModel, point: &[f64]) -> Result<Vec<nalgebra::DMatrix<f64>>> {
    match model {
        // off-domain chart points are legitimate along an unreduced disk path
        ManifoldModel::HyperbolicOctagon(_) => Ok(disk_christoffel(point)),
        _ => christoffel(model, point),
    }
}

fn rhs(model: &ManifoldModel, state: &PointState, s: f64, w: &[f64]) -> Result<Vec<f64>> {
    let at = path(model, state, s)?;
    let gamma = christoffel_any(model, &at.point)?;
    let n = w.len();
    Ok((0..n)
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += gamma[k][(i, j)] * at.velocity[i] * w[j];
                }
            }
            -acc
        })
        .collect())
}

/// Transports `w` along the geodesic through `state` for time `t` using
/// `steps` classical Runge–Kutta steps.
pub fn transport_rk4(
    model: &ManifoldModel,
    state: &PointState,
    t: f64,
    w: &[f64],
    steps: usize,
) -> Result<Vec<f64>> {
    let h = t / steps as f64;
    let mut w = w.to_vec();
    let axpy = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * y).collect() };
    for i in 0..steps {
        let s = i as f64 * h;
        let k1 = rhs(model, state, s, &w)?;
        let k2 = rhs(model, state, s + 0.5 * h, &axpy(&w, &k1, 0.5 * h))?;
        let k3 = rhs(model, state, s + 0.5 * h, &axpy(&w, &k2, 0.5 * h))?;
        let k4 = rhs(model, state, s + h, &axpy(&w, &k3, h))?;
        for j in 0..w.len() {
            w[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    Ok(w)
}
