use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::OperatorMatrix;
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, CMatrix};

/// Heat-state values are trusted when the Gibbs weight beyond the complete
/// part of the truncation is below this fraction of the partition function.
pub const HEAT_TRUNCATION_TOL: f64 = 1e-12;

/// A state value with an error estimate; `reliable` is false when the
/// truncation dominates the error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub reliable: bool,
}

impl Estimate {
    pub fn exact(value: Complex64) -> Self {
        Self {
            value,
            error: 0.0,
            reliable: true,
        }
    }
}

fn lap_blocks(lap: &OperatorMatrix) -> Result<Vec<(Vec<f64>, CMatrix)>> {
    if !lap.is_block_diagonal() || lap.hermitian_residual() > 1e-12 {
        return Err(Error::InvalidInput(format!("{} must be Hermitian and block diagonal", lap.label)));
    }
    Ok((0..lap.rows.modes.len())
        .map(|i| {
            let d = lap.rows.modes[i].fiber_dim;
            let b = lap.block(i, i).cloned().unwrap_or_else(|| CMatrix::zeros(d, d));
            hermitian_eigen(&b)
        })
        .collect())
}

/// `√(‖A‖₁ ‖A‖_∞)`, a cheap upper bound on the operator norm.
fn schur_bound(a: &OperatorMatrix) -> f64 {
    let (rows, cols) = a.shape();
    let mut row_sums = vec![0.0; rows];
    let mut col_sums = vec![0.0; cols];
    for (&(r, c_), b) in a.blocks() {
        let (ro, co) = (a.rows.offset(r), a.cols.offset(c_));
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                let v = b[(i, j)].norm();
                row_sums[ro + i] += v;
                col_sums[co + j] += v;
            }
        }
    }
    let max = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
    (max(row_sums) * max(col_sums)).sqrt()
}

/// `dim · e^{−t(λ_c − λ_min)} / Z` with `λ_c` the completeness threshold of the basis.
pub fn heat_truncation_bound(lap: &OperatorMatrix, t: f64) -> Result<f64> {
    let blocks = lap_blocks(lap)?;
    let lmin = blocks.iter().flat_map(|(v, _)| v.iter().cloned()).fold(f64::INFINITY, f64::min);
    let shift = lap.diagonal().first().map_or(0.0, |z| z.re) - lap.rows.modes.first().map_or(0.0, |m| m.eigenvalue);
    let z: f64 = blocks.iter().flat_map(|(v, _)| v.iter()).map(|l| (-t * (l - lmin)).exp()).sum();
    let lc = lap.rows.complete_eigenvalue + shift;
    Ok(lap.rows.dim() as f64 * (-t * (lc - lmin)).exp() / z)
}

/// `ω_t(A) = tr(A e^{−tΔ}) / tr(e^{−tΔ})` over the truncated basis.
pub fn heat_state_trace(a: &OperatorMatrix, lap: &OperatorMatrix, t: f64) -> Result<Estimate> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::InvalidInput(format!("heat time must be positive, got {t}")));
    }
    if a.rows.as_ref() != lap.rows.as_ref() || a.cols.as_ref() != lap.cols.as_ref() {
        return Err(Error::BasisMismatch(format!("{} and {} live on different bases", a.label, lap.label)));
    }
    let blocks = lap_blocks(lap)?;
    let lmin = blocks.iter().flat_map(|(v, _)| v.iter().cloned()).fold(f64::INFINITY, f64::min);
    let mut num = c(0.0);
    let mut den = 0.0;
    for (i, (values, vectors)) in blocks.iter().enumerate() {
        let weights: Vec<f64> = values.iter().map(|l| (-t * (l - lmin)).exp()).collect();
        den += weights.iter().sum::<f64>();
        if let Some(ab) = a.block(i, i) {
            // tr(A_ii V diag(w) V*) = Σ_j w_j (V* A_ii V)_jj
            let rotated = vectors.adjoint() * ab * vectors;
            for (j, w) in weights.iter().enumerate() {
                num += rotated[(j, j)] * *w;
            }
        }
    }
    let bound = heat_truncation_bound(lap, t)?;
    Ok(Estimate {
        value: num / den,
        error: bound * schur_bound(a),
        reliable: bound < HEAT_TRUNCATION_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ManifoldModel;
    use crate::spectral::{build_laplacian, quantize, Bundle, TorusSymbol};

    #[test]
    fn identity_has_value_one() {
        let (space, lap) = build_laplacian(&ManifoldModel::flat_torus(2).unwrap(), Bundle::Functions, 6, 0.0, 0.0).unwrap();
        let id = OperatorMatrix::identity(&space.basis);
        let e = heat_state_trace(&id, &lap, 2.0).unwrap();
        assert_eq!(e.value, c(1.0));
        assert!(e.reliable);
        let cosine = quantize(&space, &TorusSymbol::cosine(2, 1, &[1, 0])).unwrap();
        assert_eq!(heat_state_trace(&cosine, &lap, 0.5).unwrap().value, c(0.0));
    }

    #[test]
    fn small_times_are_flagged() {
        let (space, lap) = build_laplacian(&ManifoldModel::flat_torus(2).unwrap(), Bundle::Functions, 4, 0.0, 0.0).unwrap();
        let id = OperatorMatrix::identity(&space.basis);
        assert!(!heat_state_trace(&id, &lap, 0.01).unwrap().reliable);
    }
}
