use std::sync::Arc;

use super::operator::{OperatorMatrix, SymbolField};
use super::{build_basis, Bundle, SpectralModel, PSEUDO_INVERSE_TOL};
use crate::algebra::clifford::build_clifford;
use crate::error::{Error, Result};
use crate::geometry::ManifoldModel;
use crate::linalg::c;

/// Dirac operator for the trivial spin structure on a flat torus: the
/// block on mode `k` is `γ(ξ)`, so `D² = |ξ|²` per mode.
pub fn build_dirac(model: &ManifoldModel, cutoff: usize) -> Result<(SpectralModel, OperatorMatrix)> {
    let ManifoldModel::FlatTorus { periods } = model else {
        return Err(Error::Capability(format!("the Dirac operator is built on flat tori, not {}", model.name())));
    };
    let cl = build_clifford(periods.len())?;
    let basis = Arc::new(build_basis(model, Bundle::Spinors, cutoff)?);
    let d = OperatorMatrix::block_diagonal(&basis, "D", |i| cl.clifford_mult(&basis.modes[i].xi).expect("ξ has the model dimension"));
    let sym = cl.clone();
    let symbol = SymbolField::new("γ(ω)", cl.module_dim(), move |_, w| sym.clifford_mult(w).expect("direction has the model dimension"));
    let space = SpectralModel {
        model: model.clone(),
        bundle: Bundle::Spinors,
        cutoff,
        basis,
        potential: 0.0,
        mass: 0.0,
    };
    Ok((space, d.with_symbol(symbol, 1)))
}

#[derive(Debug, Clone)]
pub struct SignDecomposition {
    pub sign: OperatorMatrix,
    pub plus: OperatorMatrix,
    pub minus: OperatorMatrix,
    pub abs: OperatorMatrix,
    pub kernel: OperatorMatrix,
    pub kernel_dim: usize,
}

/// `sign(D)` with `sign(0) = 0`, the spectral halves `P± = ½(1 ± sign D)`
/// restricted off the kernel, `|D|` and the kernel projector.
pub fn sign_and_halves(d: &OperatorMatrix) -> Result<SignDecomposition> {
    let residual = d.hermitian_residual();
    if residual > 1e-12 {
        return Err(Error::InvalidInput(format!("{} is not self-adjoint (residual {residual:.2e})", d.label)));
    }
    let dense_max = if d.is_block_diagonal() {
        d.block_eigenvalues()?.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    } else {
        d.norm()
    };
    let cut = PSEUDO_INVERSE_TOL * dense_max;
    let sign_fn = move |v: f64| {
        if v.abs() <= cut {
            c(0.0)
        } else {
            c(v.signum())
        }
    };
    let mut sign = d.hermitian_function("sign(D)", sign_fn)?;
    if let Some(s) = &d.symbol {
        sign = sign.with_symbol(s.clone(), 0);
    }
    let plus = d.hermitian_function("P+", move |v| if v > cut { c(1.0) } else { c(0.0) })?;
    let minus = d.hermitian_function("P-", move |v| if v < -cut { c(1.0) } else { c(0.0) })?;
    let abs = d.hermitian_function("|D|", |v| c(v.abs()))?;
    let kernel = d.hermitian_function("ker D", move |v| if v.abs() <= cut { c(1.0) } else { c(0.0) })?;
    let kernel_dim = kernel.trace().re.round() as usize;
    Ok(SignDecomposition {
        sign,
        plus,
        minus,
        abs,
        kernel,
        kernel_dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::spectral::ModeLabel;

    #[test]
    fn zero_mode_block_vanishes_and_sign_is_gamma_one() {
        let (space, d) = build_dirac(&ManifoldModel::flat_torus(2).unwrap(), 2).unwrap();
        let zero = space.basis.mode_index(&ModeLabel::Fourier(vec![0, 0])).unwrap();
        assert!(d.block(zero, zero).is_none());
        let s = sign_and_halves(&d).unwrap();
        assert_eq!(s.kernel_dim, 2);
        let k = space.basis.mode_index(&ModeLabel::Fourier(vec![1, 0])).unwrap();
        let gamma1 = build_clifford(2).unwrap().gammas[0].clone();
        assert!(max_abs(&(s.sign.block(k, k).unwrap() - gamma1)) < 1e-12);
    }

    #[test]
    fn sphere_dirac_is_unsupported() {
        assert!(matches!(build_dirac(&ManifoldModel::round_sphere(), 2), Err(Error::Capability(_))));
    }
}
