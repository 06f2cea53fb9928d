use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, CMatrix};
use crate::spectral::{OperatorMatrix, SpectralModel};

/// Commutator tolerance for a subspace projector.
pub const COMMUTATION_TOL: f64 = 1e-10;
/// Eigenvalue threshold separating the range of a projector from its kernel.
const RANGE_THRESHOLD: f64 = 0.5;

/// Spread of eigenstate values of `A` around a limit value inside one subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub label: String,
    pub n: usize,
    pub variance: f64,
    pub limit_value: Complex64,
    pub deviations: Vec<Complex64>,
}

impl VarianceReport {
    pub fn recompute(&self) -> f64 {
        if self.deviations.is_empty() {
            return 0.0;
        }
        self.deviations.iter().map(|d| d.norm_sqr()).sum::<f64>() / self.deviations.len() as f64
    }
}

fn dense_on(op: &OperatorMatrix, space: &SpectralModel, modes: &[usize]) -> CMatrix {
    let basis = &space.basis;
    let mut offs = Vec::with_capacity(modes.len());
    let mut acc = 0;
    for &m in modes {
        offs.push(acc);
        acc += basis.modes[m].fiber_dim;
    }
    let mut out = CMatrix::zeros(acc, acc);
    for (i, &r) in modes.iter().enumerate() {
        for (j, &col) in modes.iter().enumerate() {
            if let Some(b) = op.block(r, col) {
                out.view_mut((offs[i], offs[j]), b.shape()).copy_from(b);
            }
        }
    }
    out
}

/// Orthonormal columns spanning the eigenvalue clusters of a Hermitian matrix.
fn eigen_groups(m: &CMatrix, basis_cols: &CMatrix) -> Vec<CMatrix> {
    let (vals, vecs) = hermitian_eigen(m);
    let mut groups: Vec<(usize, usize)> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        match groups.last_mut() {
            Some((start, end)) if (vals[*start] - v).abs() <= 1e-9 * v.abs().max(1.0) => *end = i + 1,
            _ => groups.push((i, i + 1)),
        }
    }
    groups
        .into_iter()
        .map(|(s, e)| basis_cols * vecs.columns(s, e - s))
        .collect()
}

/// `S(N) = (1/N) Σ |⟨φ_j, Aφ_j⟩ − limit|²` over the first `N` joint eigenstates
/// of `Δ` and `P` in the range of `P`.
///
/// Inside each joint degenerate space the states diagonalize the Hermitian
/// part of `A`, which makes the result independent of the solver's basis.
pub fn quantum_variance(
    space: &SpectralModel,
    laplacian: &OperatorMatrix,
    a: &OperatorMatrix,
    projector: &OperatorMatrix,
    n: usize,
    limit: Complex64,
) -> Result<VarianceReport> {
    for op in [laplacian, a, projector] {
        if op.rows.as_ref() != space.basis.as_ref() || op.cols.as_ref() != space.basis.as_ref() {
            return Err(Error::BasisMismatch(format!("{} is not an operator on this model", op.label)));
        }
    }
    let comm = projector.commutator(laplacian)?.max_abs();
    if comm > COMMUTATION_TOL {
        return Err(Error::InvalidInput(format!(
            "{} does not commute with the Laplacian (residual {comm:.2e})",
            projector.label
        )));
    }
    let mut deviations = Vec::with_capacity(n);
    'clusters: for cluster in OperatorMatrix::clusters(&space.basis) {
        let lap = dense_on(laplacian, space, &cluster);
        let p = dense_on(projector, space, &cluster);
        let am = dense_on(a, space, &cluster);
        let k = lap.nrows();
        for lap_group in eigen_groups(&lap, &CMatrix::identity(k, k)) {
            let p_local = lap_group.adjoint() * &p * &lap_group;
            let (pv, pvecs) = hermitian_eigen(&p_local);
            let first = pv.partition_point(|&v| v < RANGE_THRESHOLD);
            if first == pv.len() {
                continue;
            }
            let range = &lap_group * pvecs.columns(first, pv.len() - first);
            let a_local = range.adjoint() * &am * &range;
            let herm = (&a_local + a_local.adjoint()) * c(0.5);
            let (_, states) = hermitian_eigen(&herm);
            for j in 0..states.ncols() {
                let phi = states.column(j);
                let value = (phi.adjoint() * &a_local * phi)[(0, 0)];
                deviations.push(value - limit);
                if deviations.len() == n {
                    break 'clusters;
                }
            }
        }
    }
    if deviations.len() < n {
        return Err(Error::InvalidInput(format!(
            "{} has only {} states in range below the cutoff, asked for {n}",
            projector.label,
            deviations.len()
        )));
    }
    let mut report = VarianceReport {
        label: projector.label.clone(),
        n,
        variance: 0.0,
        limit_value: limit,
        deviations,
    };
    report.variance = report.recompute();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ManifoldModel;
    use crate::spectral::{build_laplacian, Bundle};

    #[test]
    fn multiples_of_identity_have_no_variance() {
        let (space, lap) = build_laplacian(&ManifoldModel::flat_torus(2).unwrap(), Bundle::Functions, 4, 0.0, 0.0).unwrap();
        let id = OperatorMatrix::identity(&space.basis);
        let a = id.scale(c(2.5));
        let r = quantum_variance(&space, &lap, &a, &id, 20, c(2.5)).unwrap();
        assert_eq!(r.variance, 0.0);
        assert_eq!(r.deviations.len(), 20);
    }

    #[test]
    fn non_commuting_projectors_are_rejected() {
        let (space, lap) = build_laplacian(&ManifoldModel::round_sphere(), Bundle::Functions, 3, 0.0, 0.0).unwrap();
        let z = crate::spectral::sphere_multiply_z(&space).unwrap();
        assert!(quantum_variance(&space, &lap, &z, &z, 2, c(0.0)).is_err());
    }
}
