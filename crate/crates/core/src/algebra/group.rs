//! Haar quadratures on `SO(m)`.
//!
//! * `SO(1)`: the identity.
//! * `SO(2)`: 64-node trapezoid in the angle.
//! * `SO(3)`: Euler angles `Rz(α)Ry(β)Rz(γ)`, Gauss–Legendre in `cos β` and
//!   trapezoid in `α`, `γ` (16 nodes each).
//! * `SO(4)`: `x ↦ q₁ x q̄₂` with `q₁`, `q₂` running over the 120 vertices of the
//!   600-cell, a spherical 11-design on `S³`.
//! * `SO(m)`, `m ≥ 5`: seeded Haar-random samples; flagged as not exact.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::quadrature::{gauss_legendre, trapezoid_circle};

pub const SO2_NODES: usize = 64;
pub const SO3_NODES: usize = 16;
pub const RANDOM_SAMPLES: usize = 4096;
const RANDOM_SEED: u64 = 0x5eed_0f50;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSample {
    pub element: DMatrix<f64>,
    pub weight: f64,
}

/// Returns the samples and whether the rule is exact for the low-degree
/// matrix coefficients used in this crate.
pub fn haar_quadrature(m: usize) -> (Vec<GroupSample>, bool) {
    match m {
        0 | 1 => (
            vec![GroupSample {
                element: DMatrix::identity(m, m),
                weight: 1.0,
            }],
            true,
        ),
        2 => {
            let rule = trapezoid_circle(SO2_NODES);
            let samples = rule
                .iter()
                .map(|(a, _)| GroupSample {
                    element: plane_rotation(2, 0, 1, *a),
                    weight: 1.0 / SO2_NODES as f64,
                })
                .collect();
            (samples, true)
        }
        3 => (so3_euler(), true),
        4 => (so4_six_hundred_cell(), true),
        _ => (random_haar(m, RANDOM_SAMPLES, RANDOM_SEED), false),
    }
}

/// Rotation by `angle` in the `(i, j)` plane taking `eᵢ` towards `eⱼ`.
pub fn plane_rotation(m: usize, i: usize, j: usize, angle: f64) -> DMatrix<f64> {
    let mut r = DMatrix::identity(m, m);
    let (s, c) = angle.sin_cos();
    r[(i, i)] = c;
    r[(j, j)] = c;
    r[(j, i)] = s;
    r[(i, j)] = -s;
    r
}

fn so3_euler() -> Vec<GroupSample> {
    so3_euler_rule(SO3_NODES)
}

/// Euler-angle product rule with `nodes` points per angle; exact for matrix
/// coefficients of degree `< nodes`.
pub fn so3_euler_rule(nodes: usize) -> Vec<GroupSample> {
    let angles = trapezoid_circle(nodes);
    let (u, wu) = gauss_legendre(nodes);
    let norm = 1.0 / (2.0 * (nodes * nodes) as f64);
    let mut out = Vec::with_capacity(nodes.pow(3));
    for (alpha, _) in &angles {
        for (cb, wb) in u.iter().zip(&wu) {
            let beta = cb.acos();
            for (gamma, _) in &angles {
                let r = plane_rotation(3, 0, 1, *alpha) * plane_rotation(3, 2, 0, beta) * plane_rotation(3, 0, 1, *gamma);
                out.push(GroupSample {
                    element: r,
                    weight: wb * norm,
                });
            }
        }
    }
    out
}

fn even_permutations() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    if p.iter().any(|&x| std::mem::replace(&mut seen[x], true)) {
                        continue;
                    }
                    let inversions = (0..4)
                        .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
                        .filter(|&(i, j)| p[i] > p[j])
                        .count();
                    if inversions % 2 == 0 {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// The 120 unit quaternions forming the vertices of the 600-cell.
pub fn six_hundred_cell() -> Vec<[f64; 4]> {
    let mut out = Vec::with_capacity(120);
    for i in 0..4 {
        for s in [1.0, -1.0] {
            let mut q = [0.0; 4];
            q[i] = s;
            out.push(q);
        }
    }
    for mask in 0..16u32 {
        out.push(std::array::from_fn(|i| if mask >> i & 1 == 1 { -0.5 } else { 0.5 }));
    }
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let base = [0.5 * phi, 0.5, 0.5 / phi, 0.0];
    for perm in even_permutations() {
        for mask in 0..8u32 {
            let signed: [f64; 4] = std::array::from_fn(|i| {
                if i < 3 && mask >> i & 1 == 1 {
                    -base[i]
                } else {
                    base[i]
                }
            });
            let mut q = [0.0; 4];
            for i in 0..4 {
                q[perm[i]] = signed[i];
            }
            out.push(q);
        }
    }
    out
}

fn left_mult(q: &[f64; 4]) -> DMatrix<f64> {
    let [a, b, c, d] = *q;
    DMatrix::from_row_slice(4, 4, &[a, -b, -c, -d, b, a, -d, c, c, d, a, -b, d, -c, b, a])
}

fn right_mult(q: &[f64; 4]) -> DMatrix<f64> {
    let [a, b, c, d] = *q;
    DMatrix::from_row_slice(4, 4, &[a, -b, -c, -d, b, a, d, -c, c, -d, a, b, d, c, -b, a])
}

fn so4_six_hundred_cell() -> Vec<GroupSample> {
    let cell = six_hundred_cell();
    let w = 1.0 / (cell.len() * cell.len()) as f64;
    let mut out = Vec::with_capacity(cell.len() * cell.len());
    for q1 in &cell {
        let l = left_mult(q1);
        for q2 in &cell {
            let conj = [q2[0], -q2[1], -q2[2], -q2[3]];
            out.push(GroupSample {
                element: &l * right_mult(&conj),
                weight: w,
            });
        }
    }
    out
}

/// Haar-random rotations from QR of Gaussian matrices.
pub fn random_haar(m: usize, count: usize, seed: u64) -> Vec<GroupSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| GroupSample {
            element: random_rotation(m, &mut rng),
            weight: 1.0 / count as f64,
        })
        .collect()
}

pub fn random_rotation(m: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(m, m, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// `SO(3)` volume check helper: `∫ dg = 1`.
pub fn total_weight(samples: &[GroupSample]) -> f64 {
    samples.iter().map(|s| s.weight).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn second_moment_residual(m: usize) -> f64 {
        // ∫ R_ij R_kl dg = δ_ik δ_jl / m for m ≥ 3; SO(2) adds ε_ik ε_jl / 2
        let eps = |a: usize, b: usize| match (a, b) {
            (0, 1) => 1.0,
            (1, 0) => -1.0,
            _ => 0.0,
        };
        let (samples, _) = haar_quadrature(m);
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let v: f64 = samples.iter().map(|s| s.weight * s.element[(i, j)] * s.element[(k, l)]).sum();
                        let mut expect = if i == k && j == l { 1.0 / m as f64 } else { 0.0 };
                        if m == 2 {
                            expect += eps(i, k) * eps(j, l) / 2.0;
                        }
                        worst = worst.max((v - expect).abs());
                    }
                }
            }
        }
        worst
    }

    #[test]
    fn exact_rules_reproduce_second_moments() {
        for m in 2..=4 {
            let (samples, exact) = haar_quadrature(m);
            assert!(exact);
            assert!((total_weight(&samples) - 1.0).abs() < 1e-12);
            assert!(second_moment_residual(m) < 1e-12, "SO({m})");
            for s in samples.iter().step_by(97) {
                let e = &s.element;
                assert!((e.transpose() * e - DMatrix::identity(m, m)).amax() < 1e-13);
                assert!((e.determinant() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn six_hundred_cell_is_unit_and_complete() {
        let cell = six_hundred_cell();
        assert_eq!(cell.len(), 120);
        for q in &cell {
            let n: f64 = q.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
        // vertices are distinct
        for i in 0..cell.len() {
            for j in i + 1..cell.len() {
                let d: f64 = cell[i].iter().zip(&cell[j]).map(|(a, b)| (a - b).abs()).sum();
                assert!(d > 1e-6);
            }
        }
    }
}
