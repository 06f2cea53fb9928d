//! Product quadrature for the Liouville measure on `S*M` extended by Haar
//! measure on the `SO(n−1)` fiber, normalized to total mass one.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, TAU};

use rayon::prelude::*;

use super::{frame_from_angle, FlowObservable};
use crate::algebra::group::so3_euler_rule;
use crate::error::{Error, Result};
use crate::geometry::{hyperbolic, FramePoint, ManifoldModel};
use crate::linalg::{c, CMatrix};
use crate::quadrature::{gauss_legendre, gauss_legendre_on, trapezoid_circle};

pub const DEFAULT_RESOLUTION: usize = 12;

fn torus_base(periods: &[f64], r: usize) -> Vec<(Vec<f64>, f64)> {
    let mut out = vec![(Vec::new(), 1.0)];
    for &p in periods {
        out = out
            .into_iter()
            .flat_map(|(pt, w)| {
                (0..r).map(move |k| {
                    let mut next = pt.clone();
                    next.push(p * k as f64 / r as f64);
                    (next, w / r as f64)
                })
            })
            .collect();
    }
    out
}

/// Nodes `(frame point, weight)` with weights summing to one.
pub fn liouville_nodes(model: &ManifoldModel, resolution: usize) -> Result<Vec<(FramePoint, f64)>> {
    if resolution < 4 {
        return Err(Error::InvalidInput(format!("quadrature resolution must be at least 4, got {resolution}")));
    }
    let r = resolution;
    let directions = trapezoid_circle(r);
    let mut nodes = Vec::new();
    match model {
        ManifoldModel::FlatTorus { periods } if periods.len() == 2 => {
            for (pt, w) in torus_base(periods, r) {
                for (a, wa) in &directions {
                    nodes.push((frame_from_angle(model, &pt, *a)?, w * wa));
                }
            }
        }
        ManifoldModel::FlatTorus { periods } => {
            let fiber = so3_euler_rule(r);
            for (pt, w) in torus_base(periods, r) {
                for s in &fiber {
                    nodes.push((FramePoint::new(pt.clone(), s.element.clone()), w * s.weight));
                }
            }
        }
        ManifoldModel::RoundSphere2 => {
            let (u, wu) = gauss_legendre(r);
            let phis = trapezoid_circle(2 * r);
            for (cu, w1) in u.iter().zip(&wu) {
                for (phi, w2) in &phis {
                    let pt = [cu.acos(), *phi];
                    for (a, wa) in &directions {
                        nodes.push((frame_from_angle(model, &pt, *a)?, 0.5 * w1 * w2 / TAU * wa));
                    }
                }
            }
        }
        ManifoldModel::HyperbolicOctagon(oct) => {
            // 16 half-sectors between a side midpoint and a vertex, polar coordinates
            for k in 0..8 {
                let mid = k as f64 * FRAC_PI_4;
                for (lo, hi) in [(mid - FRAC_PI_8, mid), (mid, mid + FRAC_PI_8)] {
                    for (phi, wphi) in gauss_legendre_on(r, lo, hi) {
                        let edge = oct.boundary_radius(phi);
                        for (rho, wr) in gauss_legendre_on(r, 0.0, edge) {
                            let z = num_complex::Complex64::from_polar(rho, phi);
                            let lambda = hyperbolic::conformal_factor(z);
                            let area = wphi * wr * lambda * lambda * rho;
                            for (a, wa) in &directions {
                                nodes.push((frame_from_angle(model, &[z.re, z.im], *a)?, area * wa));
                            }
                        }
                    }
                }
            }
        }
    }
    let total: f64 = nodes.iter().map(|(_, w)| w).sum();
    for (_, w) in nodes.iter_mut() {
        *w /= total;
    }
    Ok(nodes)
}

/// `∫ f dμ_L dg` by a product rule (nodes evaluated in parallel, summed in order).
pub fn liouville_haar_average(model: &ManifoldModel, f: &FlowObservable, resolution: usize) -> Result<CMatrix> {
    let nodes = liouville_nodes(model, resolution)?;
    let values: Vec<Result<CMatrix>> = nodes.par_iter().map(|(x, w)| Ok(f.evaluate(x)? * c(*w))).collect();
    let m = f.fiber_dim;
    let mut acc = CMatrix::zeros(m, m);
    for v in values {
        acc += v?;
    }
    Ok(acc)
}

/// Unnormalized hyperbolic area of the octagon from the same rule.
#[cfg(test)]
fn octagon_area(resolution: usize) -> f64 {
    let oct = crate::geometry::Octagon::regular();
    let mut area = 0.0;
    for k in 0..16 {
        let lo = k as f64 * FRAC_PI_8 - FRAC_PI_8;
        for (phi, wphi) in gauss_legendre_on(resolution, lo, lo + FRAC_PI_8) {
            for (rho, wr) in gauss_legendre_on(resolution, 0.0, oct.boundary_radius(phi)) {
                let lambda = 2.0 / (1.0 - rho * rho);
                area += wphi * wr * lambda * lambda * rho;
            }
        }
    }
    area
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn octagon_area_is_four_pi() {
        assert!((octagon_area(24) - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn constants_average_to_themselves() {
        for m in [
            ManifoldModel::flat_torus(2).unwrap(),
            ManifoldModel::flat_torus(3).unwrap(),
            ManifoldModel::round_sphere(),
            ManifoldModel::hyperbolic_octagon(),
        ] {
            let f = FlowObservable::constant(CMatrix::identity(1, 1));
            let avg = liouville_haar_average(&m, &f, 4).unwrap();
            assert!((avg[(0, 0)].re - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_z_squared_is_one_third() {
        let m = ManifoldModel::round_sphere();
        let f = FlowObservable::scalar("z^2", |x| x.point[0].cos().powi(2));
        let avg = liouville_haar_average(&m, &f, 6).unwrap();
        assert!((avg[(0, 0)].re - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn torus_cosine_averages_to_zero() {
        let m = ManifoldModel::flat_torus(2).unwrap();
        let f = FlowObservable::scalar("cos x1", |x| x.point[0].cos());
        assert!(liouville_haar_average(&m, &f, 8).unwrap()[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn resolution_below_four_is_rejected() {
        assert!(liouville_nodes(&ManifoldModel::round_sphere(), 3).is_err());
    }
}
