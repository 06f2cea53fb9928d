use std::sync::Arc;

use super::operator::{OperatorMatrix, SymbolField};
use super::{build_basis, Bundle, ModeLabel, SpectralModel};
use crate::error::{Error, Result};
use crate::geometry::ManifoldModel;
use crate::linalg::{c, CMatrix};

/// Laplace-type operator `Δ + V` on the requested bundle, diagonal in the
/// canonical basis, with principal symbol `g(ξ, ξ)·I`.
///
/// The Hodge Laplacian on forms and the spinor Laplacian `D²` are both
/// `|ξ|²` per Fourier mode on a flat torus; sphere forms use `l(l+1)`.
pub fn build_laplacian(
    model: &ManifoldModel,
    bundle: Bundle,
    cutoff: usize,
    potential: f64,
    mass: f64,
) -> Result<(SpectralModel, OperatorMatrix)> {
    if mass.is_nan() || mass < 0.0 || !potential.is_finite() {
        return Err(Error::InvalidInput(format!("mass must be ≥ 0 and V finite (mass={mass}, V={potential})")));
    }
    if potential < -mass * mass {
        return Err(Error::InvalidInput(format!("V = {potential} makes Δ + m² + V negative")));
    }
    let basis = Arc::new(build_basis(model, bundle, cutoff)?);
    let m = basis.fiber_labels.len();
    let lap = OperatorMatrix::block_diagonal(&basis, "Δ", |i| {
        let mode = &basis.modes[i];
        CMatrix::identity(mode.fiber_dim, mode.fiber_dim) * c(mode.eigenvalue + potential)
    })
    .with_symbol(SymbolField::constant(CMatrix::identity(m, m)), 2);
    let space = SpectralModel {
        model: model.clone(),
        bundle,
        cutoff,
        basis,
        potential,
        mass,
    };
    Ok((space, lap))
}

fn z_coefficient(l: i64, m: i64) -> f64 {
    // ⟨Y_{l,m}, z Y_{l−1,m}⟩
    if l <= 0 || m.abs() >= l {
        return 0.0;
    }
    (((l * l - m * m) as f64) / (((2 * l - 1) * (2 * l + 1)) as f64)).sqrt()
}

/// Multiplication by `z = cos θ` on spherical harmonics of degree `≤ L`
/// (Galerkin truncation: the `l = L → L+1` coupling is dropped).
pub fn sphere_multiply_z(space: &SpectralModel) -> Result<OperatorMatrix> {
    if !matches!(space.model, ManifoldModel::RoundSphere2) || space.bundle != Bundle::Functions {
        return Err(Error::Capability("multiplication by z is built for functions on the sphere".into()));
    }
    let basis = &space.basis;
    let mut op = OperatorMatrix::zeros(basis.clone(), basis.clone(), "z");
    for (i, mode) in basis.modes.iter().enumerate() {
        let ModeLabel::Harmonic { l, m } = mode.label else { unreachable!() };
        if let Some(j) = basis.mode_index(&ModeLabel::Harmonic { l: l + 1, m }) {
            let a = CMatrix::from_element(1, 1, c(z_coefficient(l + 1, m)));
            op.set_block(j, i, a.clone());
            op.set_block(i, j, a);
        }
    }
    Ok(op.with_symbol(SymbolField::scalar("z", |x, _| x[0].cos()), 0))
}

/// Multiplication by `z²`, exact on degrees `≤ L`: built as the square of `z`
/// on degrees `≤ L+1` and compressed.
pub fn sphere_multiply_z_squared(space: &SpectralModel) -> Result<OperatorMatrix> {
    let bigger = SpectralModel::new(&space.model, space.bundle, space.cutoff + 1)?;
    let z = sphere_multiply_z(&bigger)?;
    let z2 = z.mul(&z)?;
    Ok(z2
        .restrict_to(&space.basis, &space.basis)?
        .with_symbol(SymbolField::scalar("z^2", |x, _| x[0].cos().powi(2)), 0)
        .with_label("z^2"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    /// Normalized associated Legendre `Y_lm(θ, 0)` for `m ≥ 0` via the standard recurrence.
    fn ylm(l: i64, m: i64, theta: f64) -> f64 {
        let x = theta.cos();
        let mut pmm = 1.0;
        let s = (1.0 - x * x).sqrt();
        for i in 1..=m {
            pmm *= -((2 * i - 1) as f64) * s;
        }
        let p = if l == m {
            pmm
        } else {
            let mut pm1 = x * (2 * m + 1) as f64 * pmm;
            let mut pm0 = pmm;
            for ll in (m + 2)..=l {
                let next = ((2 * ll - 1) as f64 * x * pm1 - (ll + m - 1) as f64 * pm0) / (ll - m) as f64;
                pm0 = pm1;
                pm1 = next;
            }
            pm1
        };
        let fact: f64 = ((l - m + 1)..=(l + m)).map(|v| v as f64).product();
        ((2 * l + 1) as f64 / (4.0 * std::f64::consts::PI) / fact).sqrt() * p
    }

    #[test]
    fn z_squared_matches_quadrature_oracle() {
        let (space, _) = build_laplacian(&ManifoldModel::round_sphere(), Bundle::Functions, 4, 0.0, 0.0).unwrap();
        let z2 = sphere_multiply_z_squared(&space).unwrap();
        let (u, w) = gauss_legendre(20);
        for (l, m) in [(1, 0), (2, 1), (3, 3), (4, 2)] {
            let oracle: f64 = u
                .iter()
                .zip(&w)
                .map(|(x, wx)| wx * std::f64::consts::TAU * ylm(l, m, x.acos()).powi(2) * x * x)
                .sum();
            let i = space.basis.mode_index(&ModeLabel::Harmonic { l, m }).unwrap();
            let got = z2.block(i, i).unwrap()[(0, 0)].re;
            assert!((got - oracle).abs() < 1e-13, "l={l} m={m}: {got} vs {oracle}");
        }
        let i = space.basis.mode_index(&ModeLabel::Harmonic { l: 1, m: 0 }).unwrap();
        assert!((z2.block(i, i).unwrap()[(0, 0)].re - 0.6).abs() < 1e-15);
    }

    #[test]
    fn laplacian_spectra() {
        let (_, lap) = build_laplacian(&ManifoldModel::round_sphere(), Bundle::Functions, 2, 0.0, 0.0).unwrap();
        let d: Vec<f64> = lap.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![0.0, 2.0, 2.0, 2.0, 6.0, 6.0, 6.0, 6.0, 6.0]);
        let (_, shifted) = build_laplacian(&ManifoldModel::flat_torus(2).unwrap(), Bundle::Functions, 1, 0.5, 1.0).unwrap();
        let d: Vec<f64> = shifted.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![0.5, 1.5, 1.5, 1.5, 1.5, 2.5, 2.5, 2.5, 2.5]);
        assert!(build_laplacian(&ManifoldModel::flat_torus(2).unwrap(), Bundle::Functions, 1, -2.0, 1.0).is_err());
    }
}
