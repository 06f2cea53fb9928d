//! Projective spin representation and the induced conjugation action on
//! `End(ℂ^{2^⌊n/2⌋})`.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::clifford::CliffordModel;
use super::rep::{GroupLabel, RepresentationTable};
use crate::error::{Error, Result};
use crate::linalg::{c, kron, CMatrix};

/// Factorizes `r ∈ SO(n)` into plane rotations and multiplies their lifts
/// `cos(θ/2) − sin(θ/2) γᵢγⱼ`. The result `S` satisfies `S γ_v S⁻¹ = γ_{r v}`
/// and is determined up to sign.
pub fn spin_lift(cl: &CliffordModel, r: &DMatrix<f64>) -> Result<CMatrix> {
    let n = cl.n;
    if r.shape() != (n, n) {
        return Err(Error::InvalidInput(format!("expected a {n}×{n} rotation")));
    }
    let mut work = r.clone();
    let mut planes = Vec::new();
    for col in 0..n.saturating_sub(1) {
        for row in (col + 1..n).rev() {
            let (i, j) = (row - 1, row);
            let (a, b) = (work[(i, col)], work[(j, col)]);
            if b == 0.0 && a >= 0.0 {
                continue;
            }
            let phi = (-b).atan2(a);
            let (s, co) = phi.sin_cos();
            for k in 0..n {
                let (ri, rj) = (work[(i, k)], work[(j, k)]);
                work[(i, k)] = co * ri - s * rj;
                work[(j, k)] = s * ri + co * rj;
            }
            planes.push((i, j, phi));
        }
    }
    if (work - DMatrix::identity(n, n)).amax() > 1e-9 {
        return Err(Error::InvalidInput("matrix is not a proper rotation".into()));
    }
    let k = cl.module_dim();
    let mut spin = CMatrix::identity(k, k);
    for (i, j, phi) in planes {
        let half = -0.5 * phi;
        let factor = CMatrix::identity(k, k) * c(half.cos()) - cl.bivector(i, j) * c(half.sin());
        spin *= factor;
    }
    Ok(spin)
}

/// `SO(n) → PU(2^⌊n/2⌋)`, tabulated on the Haar quadrature.
pub fn spin_rep(cl: &CliffordModel) -> RepresentationTable {
    let model = cl.clone();
    RepresentationTable::tabulate(
        GroupLabel::SpecialOrthogonal(cl.n),
        cl.module_dim(),
        true,
        format!("spin({})", cl.n),
        Arc::new(move |g: &DMatrix<f64>| spin_lift(&model, g).expect("quadrature elements are rotations")),
    )
}

/// Column-major vectorization.
pub fn vectorize(x: &CMatrix) -> CMatrix {
    CMatrix::from_column_slice(x.len(), 1, x.as_slice())
}

pub fn unvectorize(v: &CMatrix, k: usize) -> CMatrix {
    CMatrix::from_column_slice(k, k, v.as_slice())
}

/// Matrix of `x ↦ S⁻¹ x S` acting on column-major vectorized `x`.
pub fn conjugation_matrix(spin: &CMatrix) -> CMatrix {
    kron(&spin.transpose(), &spin.adjoint())
}

/// `SO(n−1)` acting on `End(ℂ^{2^⌊n/2⌋})` by `τ(g)x = ρ(g)⁻¹ x ρ(g)`.
///
/// This is a right action: `τ(gh) = τ(h) τ(g)`. The phase ambiguity of the
/// lift cancels, so the table is not projective.
pub fn conjugation_rep(cl: &CliffordModel) -> RepresentationTable {
    let model = cl.clone();
    let k = cl.module_dim();
    RepresentationTable::tabulate(
        GroupLabel::Stabilizer(cl.n),
        k * k,
        false,
        format!("conjugation on End(C^{k}) for SO({})", cl.n - 1),
        Arc::new(move |g: &DMatrix<f64>| {
            conjugation_matrix(&spin_lift(&model, g).expect("quadrature elements are rotations"))
        }),
    )
}

/// Applies `τ(g)` from a table of conjugation matrices to `x`.
pub fn apply_conjugation(tau: &CMatrix, x: &CMatrix) -> CMatrix {
    let k = x.nrows();
    unvectorize(&(tau * vectorize(x)), k)
}

#[cfg(test)]
fn rotate(r: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (r * nalgebra::DVector::from_column_slice(v)).iter().cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::clifford::build_clifford;
    use crate::algebra::group::random_rotation;
    use crate::linalg::max_abs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lift_covers_the_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=6 {
            let cl = build_clifford(n).unwrap();
            for _ in 0..5 {
                let r = random_rotation(n, &mut rng);
                let s = spin_lift(&cl, &r).unwrap();
                let k = cl.module_dim();
                assert!(max_abs(&(s.adjoint() * &s - CMatrix::identity(k, k))) < 1e-12);
                let v: Vec<f64> = (0..n).map(|i| (i as f64 + 0.3).sin()).collect();
                let lhs = &s * cl.clifford_mult(&v).unwrap() * s.adjoint();
                let rhs = cl.clifford_mult(&rotate(&r, &v)).unwrap();
                assert!(max_abs(&(lhs - rhs)) < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn reflection_is_rejected() {
        let cl = build_clifford(3).unwrap();
        let mut r = DMatrix::identity(3, 3);
        r[(2, 2)] = -1.0;
        assert!(spin_lift(&cl, &r).is_err());
    }

    #[test]
    fn identity_acts_trivially() {
        let cl = build_clifford(4).unwrap();
        let tau = conjugation_matrix(&spin_lift(&cl, &DMatrix::identity(4, 4)).unwrap());
        assert!(max_abs(&(tau - CMatrix::identity(16, 16))) < 1e-15);
    }
}
