use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ManifoldModel;
use crate::spectral::{quantize, OperatorMatrix, SpectralModel, TorusSymbol};

/// One dyadic shell `√λ ∈ [Λ, 2Λ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub lambda: f64,
    pub shell_modes: usize,
    /// `‖Π_Λ A Π_Λ‖`, which bounds `|⟨φ, Aφ⟩|` for unit `φ` in the shell.
    pub shell_norm: f64,
    /// Largest diagonal element `|⟨φ_j, Aφ_j⟩|` in the shell, when tabulated.
    pub diagonal_max: Option<f64>,
    /// `shell_norm(Λ) / shell_norm(Λ/2)` for consecutive rows.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTable {
    pub observable: String,
    pub rows: Vec<DecayRow>,
}

impl DecayTable {
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.ratio).collect()
    }
}

fn shell_modes(space: &SpectralModel, lambda: f64) -> Result<Vec<usize>> {
    if 2.0 * lambda > space.basis.complete_eigenvalue.sqrt() + 1e-12 {
        return Err(Error::Truncation(format!(
            "shell [{lambda}, {}] exceeds the complete range √λ ≤ {}",
            2.0 * lambda,
            space.basis.complete_eigenvalue.sqrt()
        )));
    }
    let modes = space.basis.shell(lambda, 2.0 * lambda);
    if modes.is_empty() {
        return Err(Error::InvalidInput(format!("shell [{lambda}, {}] is empty", 2.0 * lambda)));
    }
    Ok(modes)
}

fn table(observable: String, rows: Vec<(f64, usize, f64, Option<f64>)>) -> DecayTable {
    let mut out: Vec<DecayRow> = Vec::with_capacity(rows.len());
    for (lambda, count, norm, diag) in rows {
        let ratio = out.last().filter(|p| p.shell_norm > 0.0).map(|p| norm / p.shell_norm);
        out.push(DecayRow {
            lambda,
            shell_modes: count,
            shell_norm: norm,
            diagonal_max: diag,
            ratio,
        });
    }
    DecayTable { observable, rows: out }
}

/// Shell compressions of a negative-order operator along the given `Λ`s.
pub fn negative_order_decay(space: &SpectralModel, a: &OperatorMatrix, shells: &[f64]) -> Result<DecayTable> {
    if a.rows.as_ref() != space.basis.as_ref() {
        return Err(Error::BasisMismatch(format!("{} is not built on this model", a.label)));
    }
    let diag = a.diagonal();
    let mut rows = Vec::new();
    for &lambda in shells {
        let modes = shell_modes(space, lambda)?;
        let dmax = modes
            .iter()
            .flat_map(|&m| {
                let off = space.basis.offset(m);
                (0..space.basis.modes[m].fiber_dim).map(move |f| off + f)
            })
            .map(|i| diag[i].norm())
            .fold(0.0, f64::max);
        rows.push((lambda, modes.len(), a.compress(&modes).norm(), Some(dmax)));
    }
    Ok(table(a.label.clone(), rows))
}

fn half_wave(space: &SpectralModel, t: f64) -> OperatorMatrix {
    // U(t) = e^{−it√Δ}
    OperatorMatrix::block_diagonal(&space.basis, format!("U({t})"), |i| {
        let m = &space.basis.modes[i];
        crate::linalg::CMatrix::identity(m.fiber_dim, m.fiber_dim) * Complex64::from_polar(1.0, -t * m.eigenvalue.max(0.0).sqrt())
    })
}

/// `‖Π_Λ (U(−t) Op(a) U(t) − Op(a ∘ G_t)) Π_Λ‖` on a flat torus with
/// `U(t) = e^{−it√Δ}`.
pub fn egorov_residual(space: &SpectralModel, a: &TorusSymbol, t: f64, lambda: f64) -> Result<f64> {
    if !matches!(space.model, ManifoldModel::FlatTorus { .. }) {
        return Err(Error::Capability("the half-wave group is exact only on flat tori".into()));
    }
    if t.abs() > 10.0 {
        return Err(Error::InvalidInput(format!("|t| = {} exceeds 10", t.abs())));
    }
    let modes = shell_modes(space, lambda)?;
    let op = quantize(space, a)?;
    let heisenberg = half_wave(space, -t).mul(&op)?.mul(&half_wave(space, t))?;
    let classical = quantize(space, &a.transported(t))?;
    Ok(heisenberg.sub(&classical)?.compress(&modes).norm())
}

pub fn egorov_table(space: &SpectralModel, a: &TorusSymbol, t: f64, shells: &[f64]) -> Result<DecayTable> {
    let mut rows = Vec::new();
    for &lambda in shells {
        let count = shell_modes(space, lambda)?.len();
        rows.push((lambda, count, egorov_residual(space, a, t, lambda)?, None));
    }
    Ok(table(format!("Egorov residual of {} at t={t}", a.label), rows))
}
