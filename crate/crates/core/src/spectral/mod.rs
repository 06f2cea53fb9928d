//! Truncated exact spectral models: Fourier modes on flat tori and spherical
//! harmonics on the round sphere, with the operators of Hodge theory, the
//! Dirac operator and quantized symbols as sparse per-mode block matrices.

mod dirac;
mod export;
mod forms;
mod heat;
mod laplace;
mod operator;
mod quantize;

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, subsets};
use crate::error::{Error, Result};
use crate::geometry::ManifoldModel;

pub use dirac::{build_dirac, sign_and_halves, SignDecomposition};
pub use export::{write_operator_csv, write_spectrum_csv, OperatorHeader};
pub use forms::{codifferential, exterior_d, helicity_r, hodge_projections, hodge_star, HodgeProjections};
pub use heat::{heat_state_trace, heat_truncation_bound, Estimate, HEAT_TRUNCATION_TOL};
pub use laplace::{build_laplacian, sphere_multiply_z, sphere_multiply_z_squared};
pub use operator::{OperatorMatrix, SymbolField};
pub use quantize::{quantize, SymbolTerm, TorusSymbol};

/// Eigenvalues below this fraction of the largest are treated as kernel.
pub const PSEUDO_INVERSE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bundle {
    Functions,
    Forms(usize),
    Spinors,
}

impl Bundle {
    pub fn name(&self) -> String {
        match self {
            Bundle::Functions => "functions".into(),
            Bundle::Forms(p) => format!("{p}-forms"),
            Bundle::Spinors => "spinors".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModeLabel {
    Fourier(Vec<i64>),
    Harmonic { l: i64, m: i64 },
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModeLabel::Fourier(k) => {
                let parts: Vec<String> = k.iter().map(|v| v.to_string()).collect();
                write!(f, "k=({})", parts.join(" "))
            }
            ModeLabel::Harmonic { l, m } => write!(f, "l={l} m={m}"),
        }
    }
}

/// One spatial mode with its fiber: forms carry one component per basis
/// `dx^I`, sphere one-forms carry the exact and co-exact families `(E, B)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub label: ModeLabel,
    pub eigenvalue: f64,
    pub fiber_dim: usize,
    /// Dual-lattice vector `ξ` for Fourier modes.
    pub xi: Vec<f64>,
}

/// Orthonormal truncated basis ordered by eigenvalue, then mode label.
#[derive(Debug, Clone)]
pub struct Basis {
    pub model_name: String,
    pub bundle: Bundle,
    pub cutoff: usize,
    pub modes: Vec<Mode>,
    pub fiber_labels: Vec<String>,
    offsets: Vec<usize>,
    index: HashMap<ModeLabel, usize>,
    /// Eigenvalues up to this value are not affected by the truncation.
    pub complete_eigenvalue: f64,
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.model_name == other.model_name
            && self.bundle == other.bundle
            && self.cutoff == other.cutoff
            && self.modes == other.modes
    }
}

impl Basis {
    fn from_modes(model_name: String, bundle: Bundle, cutoff: usize, mut modes: Vec<Mode>, fiber_labels: Vec<String>, complete: f64) -> Self {
        modes.retain(|m| m.fiber_dim > 0);
        modes.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue).then_with(|| a.label.cmp(&b.label)));
        let mut offsets = Vec::with_capacity(modes.len() + 1);
        let mut acc = 0;
        for m in &modes {
            offsets.push(acc);
            acc += m.fiber_dim;
        }
        offsets.push(acc);
        let index = modes.iter().enumerate().map(|(i, m)| (m.label.clone(), i)).collect();
        Self {
            model_name,
            bundle,
            cutoff,
            modes,
            fiber_labels,
            offsets,
            index,
            complete_eigenvalue: complete,
        }
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn offset(&self, mode: usize) -> usize {
        self.offsets[mode]
    }

    pub fn mode_index(&self, label: &ModeLabel) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Mode and fiber component of a flat basis index.
    pub fn locate(&self, flat: usize) -> (usize, usize) {
        let mode = self.offsets.partition_point(|&o| o <= flat) - 1;
        (mode, flat - self.offsets[mode])
    }

    /// Eigenvalue of each flat basis vector, nondecreasing.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().flat_map(|m| std::iter::repeat_n(m.eigenvalue, m.fiber_dim)).collect()
    }

    /// Flat end indices of the clusters of equal eigenvalue.
    pub fn block_ends(&self) -> Vec<usize> {
        let mut ends = Vec::new();
        for (i, m) in self.modes.iter().enumerate() {
            let next = self.modes.get(i + 1).map(|n| n.eigenvalue);
            if next.is_none_or(|v| !same_eigenvalue(v, m.eigenvalue)) {
                ends.push(self.offsets[i + 1]);
            }
        }
        ends
    }

    /// Number of basis vectors whose eigenvalue is below the completeness threshold.
    pub fn complete_dim(&self) -> usize {
        self.modes
            .iter()
            .filter(|m| m.eigenvalue <= self.complete_eigenvalue * (1.0 + 1e-12))
            .map(|m| m.fiber_dim)
            .sum()
    }

    /// Modes with `√λ ∈ [lo, hi]`.
    pub fn shell(&self, lo: f64, hi: f64) -> Vec<usize> {
        (0..self.modes.len())
            .filter(|&i| {
                let r = self.modes[i].eigenvalue.max(0.0).sqrt();
                r >= lo - 1e-12 && r <= hi + 1e-12
            })
            .collect()
    }
}

pub(crate) fn same_eigenvalue(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// A bundle over a model truncated at a cutoff, with constant potential and mass.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    pub model: ManifoldModel,
    pub bundle: Bundle,
    pub cutoff: usize,
    pub basis: Arc<Basis>,
    pub potential: f64,
    pub mass: f64,
}

impl SpectralModel {
    pub fn new(model: &ManifoldModel, bundle: Bundle, cutoff: usize) -> Result<Self> {
        Ok(Self {
            model: model.clone(),
            bundle,
            cutoff,
            basis: Arc::new(build_basis(model, bundle, cutoff)?),
            potential: 0.0,
            mass: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}

fn lattice(dim: usize, k: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-k..=k).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Builds the canonical basis; errors for unsupported `(model, bundle)` pairs.
pub fn build_basis(model: &ManifoldModel, bundle: Bundle, cutoff: usize) -> Result<Basis> {
    let unsupported = || Error::Capability(format!("{} on {} is not available", bundle.name(), model.name()));
    match model {
        ManifoldModel::FlatTorus { periods } => {
            let n = periods.len();
            let (fiber, labels) = match bundle {
                Bundle::Functions => (1, vec!["1".to_string()]),
                Bundle::Forms(p) => (
                    binomial(n, p),
                    subsets(n, p)
                        .iter()
                        .map(|s| {
                            if s.is_empty() {
                                "1".to_string()
                            } else {
                                s.iter().map(|i| format!("dx{}", i + 1)).collect::<Vec<_>>().join("^")
                            }
                        })
                        .collect(),
                ),
                Bundle::Spinors => {
                    let k = 1usize << (n / 2);
                    (k, (0..k).map(|i| format!("s{i}")).collect())
                }
            };
            let scale: Vec<f64> = periods.iter().map(|p| TAU / p).collect();
            let modes = lattice(n, cutoff as i64)
                .into_iter()
                .map(|k| {
                    let xi: Vec<f64> = k.iter().zip(&scale).map(|(a, s)| *a as f64 * s).collect();
                    Mode {
                        eigenvalue: xi.iter().map(|x| x * x).sum(),
                        label: ModeLabel::Fourier(k),
                        fiber_dim: fiber,
                        xi,
                    }
                })
                .collect();
            let smallest = scale.iter().cloned().fold(f64::INFINITY, f64::min);
            let complete = (cutoff as f64 * smallest).powi(2);
            Ok(Basis::from_modes(model.name(), bundle, cutoff, modes, labels, complete))
        }
        ManifoldModel::RoundSphere2 => {
            let (labels, fiber): (Vec<String>, fn(i64) -> usize) = match bundle {
                Bundle::Functions | Bundle::Forms(0) => (vec!["Y".into()], |_| 1),
                Bundle::Forms(1) => (vec!["E".into(), "B".into()], |l| if l == 0 { 0 } else { 2 }),
                Bundle::Forms(2) => (vec!["V".into()], |_| 1),
                // forms above the top degree vanish
                Bundle::Forms(_) => (Vec::new(), |_| 0),
                Bundle::Spinors => return Err(unsupported()),
            };
            let l_max = cutoff as i64;
            let modes = (0..=l_max)
                .flat_map(|l| (-l..=l).map(move |m| (l, m)))
                .map(|(l, m)| Mode {
                    label: ModeLabel::Harmonic { l, m },
                    eigenvalue: (l * (l + 1)) as f64,
                    fiber_dim: fiber(l),
                    xi: Vec::new(),
                })
                .collect();
            let complete = (l_max * (l_max + 1)) as f64;
            Ok(Basis::from_modes(model.name(), bundle, cutoff, modes, labels, complete))
        }
        ManifoldModel::HyperbolicOctagon(_) => Err(unsupported()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_basis_is_ordered() {
        let b = build_basis(&ManifoldModel::flat_torus(2).unwrap(), Bundle::Functions, 1).unwrap();
        assert_eq!(b.eigenvalues(), vec![0.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0]);
        assert_eq!(b.block_ends(), vec![1, 5, 9]);
        assert_eq!(b.complete_dim(), 5);
    }

    #[test]
    fn sphere_one_forms_skip_the_constant() {
        let b = build_basis(&ManifoldModel::round_sphere(), Bundle::Forms(1), 2).unwrap();
        assert_eq!(b.dim(), 2 * 8);
        assert_eq!(b.locate(3), (1, 1));
    }

    #[test]
    fn unsupported_pairs_are_capability_errors() {
        let err = build_basis(&ManifoldModel::hyperbolic_octagon(), Bundle::Functions, 2).unwrap_err();
        assert!(matches!(err, Error::Capability(_)));
        let err = build_basis(&ManifoldModel::round_sphere(), Bundle::Spinors, 2).unwrap_err();
        assert!(matches!(err, Error::Capability(_)));
    }
}
