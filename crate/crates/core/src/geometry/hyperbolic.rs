//! Genus-two surface as the regular hyperbolic octagon in the Poincaré disk.
//!
//! Unit tangent vectors are encoded as elements of SU(1,1): the matrix
//! `g = [[a, b], [b̄, ā]]` with `|a|² − |b|² = 1` represents the unit vector at
//! `g(0)` pointing in the direction `2·arg(a)`. The geodesic flow is right
//! multiplication by `diag`-conjugated hyperbolic translations and the side
//! pairings act on the left.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Longest sub-step taken between fundamental-domain checks.
const MAX_STEP: f64 = 0.1;
const MAX_REDUCTIONS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su11 {
    pub a: Complex64,
    pub b: Complex64,
}

impl Su11 {
    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// Unit-speed geodesic flow along the real axis for time `t`.
    pub fn translation(t: f64) -> Self {
        Self {
            a: Complex64::new((0.5 * t).cosh(), 0.0),
            b: Complex64::new((0.5 * t).sinh(), 0.0),
        }
    }

    /// Hyperbolic translation by distance `distance` along the diameter at angle `angle`.
    pub fn translation_along(angle: f64, distance: f64) -> Self {
        Self {
            a: Complex64::new((0.5 * distance).cosh(), 0.0),
            b: Complex64::from_polar((0.5 * distance).sinh(), angle),
        }
    }

    /// The unit tangent vector at `z` with Euclidean direction `angle`.
    pub fn from_point_direction(z: Complex64, angle: f64) -> Result<Self> {
        let r2 = z.norm_sqr();
        if r2 >= 1.0 {
            return Err(Error::Domain(format!("point {z} is not in the open unit disk")));
        }
        let a = Complex64::from_polar(1.0 / (1.0 - r2).sqrt(), 0.5 * angle);
        Ok(Self { a, b: z * a.conj() })
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            a: self.a * o.a + self.b * o.b.conj(),
            b: self.a * o.b + self.b * o.a.conj(),
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    pub fn det(&self) -> f64 {
        self.a.norm_sqr() - self.b.norm_sqr()
    }

    pub fn normalized(&self) -> Self {
        let s = self.det().sqrt();
        Self {
            a: self.a / s,
            b: self.b / s,
        }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }

    pub fn base_point(&self) -> Complex64 {
        self.b / self.a.conj()
    }

    /// Euclidean direction angle of the encoded unit vector.
    pub fn direction_angle(&self) -> f64 {
        2.0 * self.a.arg()
    }

    /// Advance along the encoded geodesic (no fundamental-domain reduction).
    pub fn flow(&self, t: f64) -> Self {
        self.mul(&Self::translation(t)).normalized()
    }
}

/// Conformal factor `λ(z) = 2 / (1 − |z|²)` of the Poincaré metric `λ² |dz|²`.
pub fn conformal_factor(z: Complex64) -> f64 {
    2.0 / (1.0 - z.norm_sqr())
}

/// Hyperbolic distance in the Poincaré disk.
pub fn disk_distance(z: Complex64, w: Complex64) -> f64 {
    let q = (z - w) / (Complex64::new(1.0, 0.0) - z.conj() * w);
    2.0 * q.norm().atanh()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Octagon {
    /// Side pairings as real SL(2,ℝ) matrices acting on the upper half-plane.
    pub side_pairings: [[[f64; 2]; 2]; 8],
    disk_pairings: [Su11; 8],
    side_centers: [Complex64; 8],
    side_radius: f64,
}

fn cayley() -> [[Complex64; 2]; 2] {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [[one, -i], [one, i]]
}

fn cayley_inverse() -> [[Complex64; 2]; 2] {
    let h = Complex64::new(0.5, 0.0);
    let ih = Complex64::new(0.0, 0.5);
    [[h, h], [ih, -ih]]
}

fn mat2_mul(x: &[[Complex64; 2]; 2], y: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

fn disk_to_half_plane(g: &Su11) -> [[f64; 2]; 2] {
    let d = [[g.a, g.b], [g.b.conj(), g.a.conj()]];
    let m = mat2_mul(&mat2_mul(&cayley_inverse(), &d), &cayley());
    [[m[0][0].re, m[0][1].re], [m[1][0].re, m[1][1].re]]
}

fn half_plane_to_disk(m: &[[f64; 2]; 2]) -> Su11 {
    let mc = [
        [Complex64::new(m[0][0], 0.0), Complex64::new(m[0][1], 0.0)],
        [Complex64::new(m[1][0], 0.0), Complex64::new(m[1][1], 0.0)],
    ];
    let d = mat2_mul(&mat2_mul(&cayley(), &mc), &cayley_inverse());
    Su11 {
        a: d[0][0],
        b: d[0][1],
    }
    .normalized()
}

impl Octagon {
    /// Hyperbolic distance from the centre to a side midpoint: `cosh r = cot(π/8)`.
    pub fn midpoint_distance() -> f64 {
        (1.0 + 2f64.sqrt()).acosh()
    }

    /// Hyperbolic distance from the centre to a vertex: `cosh r = cot²(π/8)`.
    pub fn vertex_distance() -> f64 {
        (3.0 + 2.0 * 2f64.sqrt()).acosh()
    }

    /// Regular octagon with vertex angle π/4, opposite sides paired.
    pub fn regular() -> Self {
        let shift = 2.0 * Self::midpoint_distance();
        let mut side_pairings = [[[0.0; 2]; 2]; 8];
        for (k, slot) in side_pairings.iter_mut().enumerate() {
            let g = Su11::translation_along(k as f64 * FRAC_PI_4, shift);
            *slot = disk_to_half_plane(&g);
        }
        Self::from_side_pairings(side_pairings).expect("regular octagon pairings are unimodular")
    }

    /// Builds the domain data from half-plane pairing matrices; pairing `k`
    /// must carry the side opposite to side `k` onto side `k`.
    pub fn from_side_pairings(side_pairings: [[[f64; 2]; 2]; 8]) -> Result<Self> {
        for (k, m) in side_pairings.iter().enumerate() {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if (det - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "side pairing {k} has determinant {det}, expected 1"
                )));
            }
        }
        let disk_pairings = side_pairings.map(|m| half_plane_to_disk(&m));
        let m = (0.5 * Self::midpoint_distance()).tanh();
        let center_radius = 0.5 * (m + 1.0 / m);
        let side_radius = 0.5 * (1.0 / m - m);
        let side_centers =
            std::array::from_fn(|k| Complex64::from_polar(center_radius, k as f64 * FRAC_PI_4));
        Ok(Self {
            side_pairings,
            disk_pairings,
            side_centers,
            side_radius,
        })
    }

    pub fn disk_pairing(&self, k: usize) -> Su11 {
        self.disk_pairings[k]
    }

    /// Index of a side whose outer half-plane contains `z`, if any.
    pub fn violated_side(&self, z: Complex64) -> Option<usize> {
        (0..8).find(|&k| (z - self.side_centers[k]).norm() < self.side_radius)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.norm_sqr() < 1.0
            && self
                .side_centers
                .iter()
                .all(|c| (z - c).norm() >= self.side_radius * (1.0 - 1e-13))
    }

    /// Euclidean radius at which the ray at angle `phi` leaves the octagon.
    pub fn boundary_radius(&self, phi: f64) -> f64 {
        // nearest side: midpoint angles are multiples of π/4
        let k = (phi / FRAC_PI_4).round();
        let delta = phi - k * FRAC_PI_4;
        let rc = self.side_centers[0].norm();
        let cd = delta.cos();
        rc * cd - (rc * rc * cd * cd - 1.0).sqrt()
    }

    /// Euclidean radius of the vertices.
    pub fn vertex_radius() -> f64 {
        (0.5 * Self::vertex_distance()).tanh()
    }

    /// Angle of vertex `k`, between the midpoints of sides `k` and `k+1`.
    pub fn vertex_angle(k: usize) -> f64 {
        k as f64 * FRAC_PI_4 + FRAC_PI_8
    }

    /// Total hyperbolic area of the genus-two surface, `4π`.
    pub fn area() -> f64 {
        4.0 * PI
    }

    /// Maps a unit tangent vector back into the fundamental domain.
    pub fn reduce(&self, mut g: Su11) -> Result<Su11> {
        for _ in 0..MAX_REDUCTIONS {
            match self.violated_side(g.base_point()) {
                None => return Ok(g),
                Some(k) => g = self.disk_pairings[k].inverse().mul(&g).normalized(),
            }
        }
        Err(Error::Domain(
            "fundamental-domain reduction did not terminate".into(),
        ))
    }

    /// Geodesic flow on the closed surface with re-entry through the side pairings.
    pub fn flow(&self, g: Su11, t: f64) -> Result<Su11> {
        let steps = ((t.abs() / MAX_STEP).ceil() as usize).max(1);
        let h = t / steps as f64;
        let step = Su11::translation(h);
        let mut g = g;
        for _ in 0..steps {
            g = g.mul(&step).normalized();
            g = self.reduce(g)?;
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairings_map_opposite_midpoint_to_midpoint() {
        let oct = Octagon::regular();
        let r = (0.5 * Octagon::midpoint_distance()).tanh();
        for k in 0..8 {
            let angle = k as f64 * FRAC_PI_4;
            let opposite = Complex64::from_polar(r, angle + PI);
            let image = oct.disk_pairing(k).apply(opposite);
            assert!((image - Complex64::from_polar(r, angle)).norm() < 1e-12);
            let m = oct.side_pairings[k];
            assert!((m[0][0] * m[1][1] - m[0][1] * m[1][0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn vertices_lie_on_two_side_circles() {
        let oct = Octagon::regular();
        for k in 0..8 {
            let v = Complex64::from_polar(Octagon::vertex_radius(), Octagon::vertex_angle(k));
            let d0 = (v - oct.side_centers[k]).norm() - oct.side_radius;
            let d1 = (v - oct.side_centers[(k + 1) % 8]).norm() - oct.side_radius;
            assert!(d0.abs() < 1e-12 && d1.abs() < 1e-12);
            assert!((oct.boundary_radius(Octagon::vertex_angle(k)) - Octagon::vertex_radius()).abs() < 1e-12);
        }
    }

    #[test]
    fn su11_encodes_point_and_direction() {
        let z = Complex64::new(0.3, -0.2);
        let g = Su11::from_point_direction(z, 1.1).unwrap();
        assert!((g.base_point() - z).norm() < 1e-15);
        assert!((g.direction_angle() - 1.1).abs() < 1e-14);
        assert!((g.det() - 1.0).abs() < 1e-14);
        let moved = g.flow(0.7);
        assert!((disk_distance(z, moved.base_point()) - 0.7).abs() < 1e-12);
    }
}
