//! States on truncated observable algebras and their high-energy behaviour.

mod decay;
mod tracial;
mod variance;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::c;
use crate::spectral::{heat_state_trace, Estimate, OperatorMatrix, SpectralModel};

pub use decay::{egorov_residual, egorov_table, negative_order_decay, DecayRow, DecayTable};
pub use tracial::{
    ergodic_decomposition, frame_completing, projection_field, symbol_observable, ErgodicComponent, InvarianceCheck,
    TracialState, INVARIANCE_FLOOR,
};
pub use variance::{quantum_variance, VarianceReport};

/// Relative slack and absolute floor for "the gap shrinks along the ladder".
pub const MONOTONE_SLACK: f64 = 0.1;
pub const MONOTONE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StateKind {
    /// `j`-th basis vector in the canonical eigen-ordering.
    Eigen(usize),
    /// Average of the first `N` eigenstates, `N` rounded up to a degeneracy block.
    Cesaro(usize),
    /// Gibbs state at inverse temperature `t`.
    Heat(f64),
}

/// A state on operators over the basis of one spectral model.
#[derive(Debug, Clone)]
pub struct StateFunctional {
    pub kind: StateKind,
    pub space: SpectralModel,
    laplacian: Option<OperatorMatrix>,
}

pub fn eigen_state(space: &SpectralModel, j: usize) -> Result<StateFunctional> {
    if j >= space.dim() {
        return Err(Error::InvalidInput(format!("eigenstate {j} is beyond the truncation (dim {})", space.dim())));
    }
    Ok(StateFunctional {
        kind: StateKind::Eigen(j),
        space: space.clone(),
        laplacian: None,
    })
}

/// `N` rounded up to the end of its degeneracy block.
pub fn round_to_block(space: &SpectralModel, n: usize) -> Result<usize> {
    if n == 0 || n > space.dim() {
        return Err(Error::InvalidInput(format!("N = {n} must lie in 1..={}", space.dim())));
    }
    Ok(*space.basis.block_ends().iter().find(|&&e| e >= n).expect("the last block ends at dim"))
}

pub fn cesaro_state(space: &SpectralModel, n: usize) -> Result<StateFunctional> {
    Ok(StateFunctional {
        kind: StateKind::Cesaro(round_to_block(space, n)?),
        space: space.clone(),
        laplacian: None,
    })
}

pub fn heat_state(space: &SpectralModel, laplacian: &OperatorMatrix, t: f64) -> Result<StateFunctional> {
    if laplacian.rows.as_ref() != space.basis.as_ref() {
        return Err(Error::BasisMismatch("the Laplacian is not built on this model".into()));
    }
    if t.is_nan() || t <= 0.0 {
        return Err(Error::InvalidInput(format!("heat time must be positive, got {t}")));
    }
    Ok(StateFunctional {
        kind: StateKind::Heat(t),
        space: space.clone(),
        laplacian: Some(laplacian.clone()),
    })
}

impl StateFunctional {
    fn check(&self, a: &OperatorMatrix) -> Result<()> {
        if a.rows.as_ref() != self.space.basis.as_ref() || a.cols.as_ref() != self.space.basis.as_ref() {
            return Err(Error::BasisMismatch(format!("{} is not an operator on the state's basis", a.label)));
        }
        Ok(())
    }

    pub fn evaluate(&self, a: &OperatorMatrix) -> Result<Estimate> {
        self.check(a)?;
        match &self.kind {
            StateKind::Eigen(j) => {
                let (mode, f) = self.space.basis.locate(*j);
                let v = a.block(mode, mode).map_or(c(0.0), |b| b[(f, f)]);
                Ok(Estimate {
                    value: v,
                    error: 0.0,
                    reliable: self.space.basis.modes[mode].eigenvalue <= self.space.basis.complete_eigenvalue,
                })
            }
            StateKind::Cesaro(n) => {
                let diag = a.diagonal();
                let value: Complex64 = diag[..*n].iter().sum::<Complex64>() / c(*n as f64);
                Ok(Estimate {
                    value,
                    error: 0.0,
                    reliable: *n <= self.space.basis.complete_dim(),
                })
            }
            StateKind::Heat(t) => heat_state_trace(a, self.laplacian.as_ref().expect("heat states carry Δ"), *t),
        }
    }

    /// Smallest `Re ω(A*A)` over the given operators (positivity witness).
    pub fn positivity_minimum(&self, ops: &[OperatorMatrix]) -> Result<f64> {
        let mut worst = f64::INFINITY;
        for a in ops {
            worst = worst.min(self.evaluate(&a.adjoint().mul(a)?)?.value.re);
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub parameter: f64,
    pub value: Complex64,
    pub error: f64,
    pub reliable: bool,
    pub gap_to_tracial: f64,
}

/// Cesàro and heat values along ladders against the tracial value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub observable: String,
    pub tracial: Estimate,
    pub cesaro: Vec<LadderRow>,
    pub heat: Vec<LadderRow>,
    /// Worst `|ω_N − ω_t|` over reliable heat rows, against the last Cesàro value.
    pub cesaro_heat_gap: f64,
    pub cesaro_monotone: bool,
    pub heat_monotone: bool,
}

/// `g_{i+1} ≤ (1 + slack) g_i + floor` along the ladder.
pub fn gaps_shrink(gaps: &[f64]) -> bool {
    gaps.windows(2).all(|w| w[1] <= (1.0 + MONOTONE_SLACK) * w[0] + MONOTONE_FLOOR)
}

/// Compares Cesàro states along `n_ladder` (increasing N) and heat states
/// along `t_ladder` (decreasing t) with the tracial state of `A`'s symbol.
pub fn compare_states(
    space: &SpectralModel,
    laplacian: &OperatorMatrix,
    a: &OperatorMatrix,
    tracial: &TracialState,
    n_ladder: &[usize],
    t_ladder: &[f64],
) -> Result<ComparisonReport> {
    let symbol = a
        .symbol
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("{} carries no principal symbol", a.label)))?;
    if a.order != 0 {
        return Err(Error::InvalidInput(format!("{} has order {}, expected 0", a.label, a.order)));
    }
    let trace_value = tracial.evaluate(symbol)?;
    let row = |p: f64, e: Estimate| LadderRow {
        parameter: p,
        gap_to_tracial: (e.value - trace_value.value).norm(),
        value: e.value,
        error: e.error,
        reliable: e.reliable,
    };
    let mut cesaro = Vec::new();
    for &n in n_ladder {
        let st = cesaro_state(space, n)?;
        let StateKind::Cesaro(rounded) = st.kind else { unreachable!() };
        cesaro.push(row(rounded as f64, st.evaluate(a)?));
    }
    let mut heat = Vec::new();
    for &t in t_ladder {
        heat.push(row(t, heat_state(space, laplacian, t)?.evaluate(a)?));
    }
    let last = cesaro.last().map(|r| r.value);
    let cesaro_heat_gap = match last {
        Some(v) => heat.iter().filter(|r| r.reliable).map(|r| (r.value - v).norm()).fold(0.0, f64::max),
        None => 0.0,
    };
    let cg: Vec<f64> = cesaro.iter().map(|r| r.gap_to_tracial).collect();
    let hg: Vec<f64> = heat.iter().filter(|r| r.reliable).map(|r| r.gap_to_tracial).collect();
    Ok(ComparisonReport {
        observable: a.label.clone(),
        tracial: trace_value,
        cesaro_monotone: gaps_shrink(&cg),
        heat_monotone: gaps_shrink(&hg),
        cesaro,
        heat,
        cesaro_heat_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ManifoldModel;
    use crate::spectral::{build_laplacian, sphere_multiply_z_squared, Bundle, ModeLabel};

    #[test]
    fn eigenstate_of_y10_sees_three_fifths() {
        let (space, _) = build_laplacian(&ManifoldModel::round_sphere(), Bundle::Functions, 6, 0.0, 0.0).unwrap();
        let z2 = sphere_multiply_z_squared(&space).unwrap();
        let j = space.basis.offset(space.basis.mode_index(&ModeLabel::Harmonic { l: 1, m: 0 }).unwrap());
        let v = eigen_state(&space, j).unwrap().evaluate(&z2).unwrap().value;
        assert!((v.re - 0.6).abs() < 1e-15);
    }

    #[test]
    fn cesaro_rounds_up_to_blocks() {
        let space = SpectralModel::new(&ManifoldModel::round_sphere(), Bundle::Functions, 4).unwrap();
        assert_eq!(round_to_block(&space, 2).unwrap(), 4);
        assert_eq!(round_to_block(&space, 4).unwrap(), 4);
        assert!(round_to_block(&space, 26).is_err());
    }

    #[test]
    fn gap_monotonicity_allows_slack() {
        assert!(gaps_shrink(&[1.0, 0.5, 0.54]));
        assert!(!gaps_shrink(&[1.0, 0.5, 0.6]));
        assert!(gaps_shrink(&[1e-16, 2e-16, 0.0]));
    }
}
