//! Exterior derivative, codifferential, Hodge star and the Hodge projections.
//!
//! Torus: `e^{ik·x} dx^I` with `d = iξ∧`. Sphere: `Y`, `(E, B)` with
//! `E = dY/ν`, `B = ⋆E`, and `V = ⋆Y`, where `ν = √(l(l+1))`; then
//! `dY = νE`, `dE = 0`, `dB = −νV`, and `⋆` sends `Y ↔ V`, `E → B`, `B → −E`.

use std::sync::Arc;

use num_complex::Complex64;

use super::operator::{OperatorMatrix, SymbolField};
use super::{build_basis, build_laplacian, Basis, Bundle};
use crate::combinatorics::{complement, sort_sign, subset_index, subsets, wedge_left};
use crate::error::{Error, Result};
use crate::geometry::ManifoldModel;
use crate::linalg::{c, CMatrix, I};

fn forms_basis(model: &ManifoldModel, p: usize, cutoff: usize) -> Result<Arc<Basis>> {
    Ok(Arc::new(build_basis(model, Bundle::Forms(p), cutoff)?))
}

/// Mode-diagonal operator between two form bases with blocks `block(mode, rows, cols)`.
fn per_mode(
    rows: &Arc<Basis>,
    cols: &Arc<Basis>,
    label: &str,
    block: impl Fn(&super::Mode, usize, usize) -> CMatrix,
) -> OperatorMatrix {
    let mut op = OperatorMatrix::zeros(rows.clone(), cols.clone(), label);
    for (j, mode) in cols.modes.iter().enumerate() {
        if let Some(i) = rows.mode_index(&mode.label) {
            op.set_block(i, j, block(mode, rows.modes[i].fiber_dim, mode.fiber_dim));
        }
    }
    op
}

fn sphere_nu(mode: &super::Mode) -> f64 {
    mode.eigenvalue.sqrt()
}

fn check_supported(model: &ManifoldModel, p: usize) -> Result<()> {
    match model {
        ManifoldModel::FlatTorus { .. } => Ok(()),
        ManifoldModel::RoundSphere2 if p <= 2 => Ok(()),
        _ => Err(Error::Capability(format!("{p}-forms on {} are not available", model.name()))),
    }
}

/// `d : Ωᵖ → Ωᵖ⁺¹`.
pub fn exterior_d(model: &ManifoldModel, p: usize, cutoff: usize) -> Result<OperatorMatrix> {
    check_supported(model, p)?;
    let cols = forms_basis(model, p, cutoff)?;
    let rows = forms_basis(model, p + 1, cutoff)?;
    let op = match model {
        ManifoldModel::FlatTorus { periods } => {
            let n = periods.len();
            let source = subsets(n, p);
            per_mode(&rows, &cols, "d", |mode, r, c_| {
                let mut b = CMatrix::zeros(r, c_);
                for (a, set) in source.iter().enumerate() {
                    for j in complement(n, set) {
                        let (target, sign) = wedge_left(j, set).expect("j is not in the subset");
                        b[(subset_index(n, &target), a)] += I * mode.xi[j] * sign;
                    }
                }
                b
            })
        }
        _ => per_mode(&rows, &cols, "d", |mode, r, c_| {
            let nu = sphere_nu(mode);
            let mut b = CMatrix::zeros(r, c_);
            match p {
                0 => b[(0, 0)] = c(nu),
                1 => b[(0, 1)] = c(-nu),
                _ => {}
            }
            b
        }),
    };
    Ok(op.with_label(format!("d{p}")))
}

/// `δ : Ωᵖ → Ωᵖ⁻¹`, the adjoint of `d`. On functions it is the zero map.
pub fn codifferential(model: &ManifoldModel, p: usize, cutoff: usize) -> Result<OperatorMatrix> {
    check_supported(model, p)?;
    if p == 0 {
        let b = forms_basis(model, 0, cutoff)?;
        return Ok(OperatorMatrix::zeros(b.clone(), b, "δ0"));
    }
    Ok(exterior_d(model, p - 1, cutoff)?.adjoint().with_label(format!("δ{p}")))
}

/// `⋆ : Ωᵖ → Ωⁿ⁻ᵖ` for the standard orientation.
pub fn hodge_star(model: &ManifoldModel, p: usize, cutoff: usize) -> Result<OperatorMatrix> {
    check_supported(model, p)?;
    let n = model.dim();
    if p > n {
        return Err(Error::InvalidInput(format!("no {p}-forms in dimension {n}")));
    }
    let cols = forms_basis(model, p, cutoff)?;
    let rows = forms_basis(model, n - p, cutoff)?;
    let op = match model {
        ManifoldModel::FlatTorus { .. } => {
            let source = subsets(n, p);
            per_mode(&rows, &cols, "⋆", |_, r, c_| {
                let mut b = CMatrix::zeros(r, c_);
                for (a, set) in source.iter().enumerate() {
                    let rest = complement(n, set);
                    let mut joined = set.clone();
                    joined.extend(&rest);
                    b[(subset_index(n, &rest), a)] = c(sort_sign(&joined));
                }
                b
            })
        }
        _ => per_mode(&rows, &cols, "⋆", |_, r, c_| {
            let mut b = CMatrix::zeros(r, c_);
            if p == 1 {
                b[(1, 0)] = c(1.0);
                b[(0, 1)] = c(-1.0);
            } else {
                b[(0, 0)] = c(1.0);
            }
            b
        }),
    };
    Ok(op.with_label(format!("⋆{p}")))
}

/// Spectral projections onto co-exact (`P = Δ⁺δd`), exact (`Q = Δ⁺dδ`) and
/// harmonic (`H`, the kernel of `Δ`) forms, with the Laplacian they refer to.
#[derive(Debug, Clone)]
pub struct HodgeProjections {
    pub p: OperatorMatrix,
    pub q: OperatorMatrix,
    pub h: OperatorMatrix,
    pub laplacian: OperatorMatrix,
    /// `δd + dδ`, assembled from the factors.
    pub assembled_laplacian: OperatorMatrix,
}

pub fn hodge_projections(model: &ManifoldModel, p: usize, cutoff: usize) -> Result<HodgeProjections> {
    check_supported(model, p)?;
    let (_, laplacian) = build_laplacian(model, Bundle::Forms(p), cutoff, 0.0, 0.0)?;
    let d = exterior_d(model, p, cutoff)?;
    let dd = d.adjoint().mul(&d)?;
    let low = if p == 0 {
        OperatorMatrix::zeros(laplacian.rows.clone(), laplacian.cols.clone(), "dδ")
    } else {
        exterior_d(model, p - 1, cutoff)?.mul(&codifferential(model, p, cutoff)?)?
    };
    let inv = laplacian.pseudo_inverse_with("Δ⁺", |v| 1.0 / v)?;
    let lmax = laplacian.block_eigenvalues()?.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = super::PSEUDO_INVERSE_TOL * lmax;
    let h = laplacian.hermitian_function("H", |v| if v.abs() <= cut { c(1.0) } else { c(0.0) })?;
    Ok(HodgeProjections {
        p: inv.mul(&dd)?.with_label("P"),
        q: inv.mul(&low)?.with_label("Q"),
        h,
        assembled_laplacian: dd.add(&low)?.with_label("δd+dδ"),
        laplacian,
    })
}

/// Helicity `R = |Δ|^{-1/2} ⋆d` on one-forms over `T³`, with symbol `i[ω]×`.
pub fn helicity_r(model: &ManifoldModel, cutoff: usize) -> Result<OperatorMatrix> {
    match model {
        ManifoldModel::FlatTorus { periods } if periods.len() == 3 => {}
        _ => return Err(Error::Capability(format!("helicity is defined for one-forms on T³, not {}", model.name()))),
    }
    let (_, lap) = build_laplacian(model, Bundle::Forms(1), cutoff, 0.0, 0.0)?;
    let inv_sqrt = lap.pseudo_inverse_with("|Δ|^-1/2", |v| 1.0 / v.abs().sqrt())?;
    let star_d = hodge_star(model, 2, cutoff)?.mul(&exterior_d(model, 1, cutoff)?)?;
    let symbol = SymbolField::new("i[ω]×", 3, |_, w| {
        let m = [[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]];
        CMatrix::from_fn(3, 3, |r, c_| Complex64::new(0.0, m[r][c_]))
    });
    Ok(inv_sqrt.mul(&star_d)?.with_label("R").with_symbol(symbol, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ModeLabel;

    #[test]
    fn star_star_is_the_involution_sign() {
        let m = ManifoldModel::flat_torus(2).unwrap();
        for p in 0..=2 {
            let ss = hodge_star(&m, 2 - p, 2).unwrap().mul(&hodge_star(&m, p, 2).unwrap()).unwrap();
            let sign = if (p * (2 - p)) % 2 == 0 { 1.0 } else { -1.0 };
            let id = OperatorMatrix::identity(&ss.rows).scale(c(sign));
            assert_eq!(ss.sub(&id).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn d_on_a_plane_wave_in_three_dimensions() {
        let m = ManifoldModel::flat_torus(3).unwrap();
        let d = exterior_d(&m, 1, 2).unwrap();
        let label = ModeLabel::Fourier(vec![1, -2, 0]);
        let (i, j) = (d.rows.mode_index(&label).unwrap(), d.cols.mode_index(&label).unwrap());
        let b = d.block(i, j).unwrap();
        // d(e^{ik·x} dx1) = i k2 dx2∧dx1 + i k3 dx3∧dx1 = −i k2 dx1∧dx2 − i k3 dx1∧dx3
        assert_eq!(b[(0, 0)], Complex64::new(0.0, 2.0));
        assert_eq!(b[(1, 0)], Complex64::new(0.0, 0.0));
        // d(e^{ik·x} dx2) = i k1 dx1∧dx2 + i k3 dx3∧dx2
        assert_eq!(b[(0, 1)], Complex64::new(0.0, 1.0));
    }

    #[test]
    fn functions_have_no_codifferential() {
        let m = ManifoldModel::round_sphere();
        assert_eq!(codifferential(&m, 0, 3).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn helicity_needs_three_torus() {
        assert!(matches!(helicity_r(&ManifoldModel::flat_torus(2).unwrap(), 2), Err(Error::Capability(_))));
    }
}
