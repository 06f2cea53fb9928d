//! Finite representation tables: sampled group elements with their
//! representing unitaries and Haar quadrature weights.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::group::{haar_quadrature, GroupSample};
use crate::combinatorics::subsets;
use crate::error::{Error, Result};
use crate::linalg::{c, max_abs, CMatrix};

pub type RepFn = dyn Fn(&DMatrix<f64>) -> CMatrix + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupLabel {
    /// `SO(n)` acting on `ℝⁿ`.
    SpecialOrthogonal(usize),
    /// The copy of `SO(n−1)` in `SO(n)` fixing the first basis vector.
    Stabilizer(usize),
}

impl GroupLabel {
    pub fn ambient_dim(&self) -> usize {
        match *self {
            Self::SpecialOrthogonal(n) | Self::Stabilizer(n) => n,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RepSample {
    /// Group element as an `n×n` rotation (block-diag(1, h) for stabilizers).
    pub element: DMatrix<f64>,
    pub matrix: CMatrix,
    pub weight: f64,
}

#[derive(Clone)]
pub struct RepresentationTable {
    pub group: GroupLabel,
    pub degree: usize,
    pub samples: Vec<RepSample>,
    /// Representing matrices are only defined up to a phase.
    pub projective: bool,
    /// Whether the quadrature is exact on the matrix coefficients involved.
    pub exact_quadrature: bool,
    pub label: String,
    evaluator: Arc<RepFn>,
}

impl fmt::Debug for RepresentationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RepresentationTable")
            .field("label", &self.label)
            .field("group", &self.group)
            .field("degree", &self.degree)
            .field("samples", &self.samples.len())
            .field("projective", &self.projective)
            .finish()
    }
}

impl RepresentationTable {
    /// Tabulates `evaluator` on the Haar quadrature of `group`.
    pub fn tabulate(
        group: GroupLabel,
        degree: usize,
        projective: bool,
        label: impl Into<String>,
        evaluator: Arc<RepFn>,
    ) -> Self {
        let (elements, exact) = match group {
            GroupLabel::SpecialOrthogonal(n) => haar_quadrature(n),
            GroupLabel::Stabilizer(n) => {
                let (sub, exact) = haar_quadrature(n - 1);
                (sub.into_iter().map(|s| embed_stabilizer(n, s)).collect(), exact)
            }
        };
        let samples = elements
            .into_iter()
            .map(|s| RepSample {
                matrix: evaluator(&s.element),
                element: s.element,
                weight: s.weight,
            })
            .collect();
        Self {
            group,
            degree,
            samples,
            projective,
            exact_quadrature: exact,
            label: label.into(),
            evaluator,
        }
    }

    /// Representing matrix of an arbitrary group element.
    pub fn evaluate(&self, element: &DMatrix<f64>) -> CMatrix {
        (self.evaluator)(element)
    }

    pub fn weight_sum(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }

    /// `max ‖ρ(g)*ρ(g) − I‖` over samples.
    pub fn unitarity_residual(&self) -> f64 {
        let id = CMatrix::identity(self.degree, self.degree);
        self.samples
            .iter()
            .map(|s| max_abs(&(s.matrix.adjoint() * &s.matrix - &id)))
            .fold(0.0, f64::max)
    }

    /// Deviation from `ρ(g)ρ(h) = c·ρ(gh)` on sampled pairs, with `c = 1`
    /// unless the table is projective; also returns the worst `| |c| − 1 |`.
    pub fn homomorphism_residual(&self, stride: usize) -> (f64, f64) {
        let mut worst: f64 = 0.0;
        let mut phase_dev: f64 = 0.0;
        let k = self.degree as f64;
        for a in self.samples.iter().step_by(stride.max(1)) {
            for b in self.samples.iter().step_by(stride.max(1) * 3 + 1) {
                let prod = &a.matrix * &b.matrix;
                let direct = self.evaluate(&(&a.element * &b.element));
                let phase = if self.projective {
                    (direct.adjoint() * &prod).trace() / c(k)
                } else {
                    c(1.0)
                };
                phase_dev = phase_dev.max((phase.norm() - 1.0).abs());
                worst = worst.max(max_abs(&(prod - direct * phase)));
            }
        }
        (worst, phase_dev)
    }

    /// Haar average `Σ w ρ(g) X ρ(g)*`.
    pub fn twirl(&self, x: &CMatrix) -> CMatrix {
        self.samples.iter().fold(CMatrix::zeros(self.degree, self.degree), |acc, s| {
            acc + (&s.matrix * x * s.matrix.adjoint()) * c(s.weight)
        })
    }

    /// Character `tr(P ρ(g))` of the subrepresentation on the range of `P`.
    pub fn character(&self, projector: &CMatrix) -> Vec<Complex64> {
        self.samples.iter().map(|s| (projector * &s.matrix).trace()).collect()
    }
}

fn embed_stabilizer(n: usize, s: GroupSample) -> GroupSample {
    let mut g = DMatrix::identity(n, n);
    g.view_mut((1, 1), (n - 1, n - 1)).copy_from(&s.element);
    GroupSample {
        element: g,
        weight: s.weight,
    }
}

/// `Λᵖ(g)` on the basis `e_I`, `I` running over `p`-subsets in lexicographic order.
pub fn exterior_power(g: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
    let n = g.nrows();
    let idx = subsets(n, p);
    let k = idx.len();
    DMatrix::from_fn(k, k, |r, col| {
        if p == 0 {
            return 1.0;
        }
        let minor = DMatrix::from_fn(p, p, |a, b| g[(idx[r][a], idx[col][b])]);
        minor.determinant()
    })
}

/// `SO(n)` acting on `Λᵖℂⁿ`.
pub fn exterior_rep(n: usize, p: usize) -> Result<RepresentationTable> {
    if !(1..=6).contains(&n) {
        return Err(Error::InvalidInput(format!("exterior representations need 1 ≤ n ≤ 6, got {n}")));
    }
    if p > n {
        return Err(Error::InvalidInput(format!("form degree {p} exceeds dimension {n}")));
    }
    let degree = crate::combinatorics::binomial(n, p);
    Ok(RepresentationTable::tabulate(
        GroupLabel::SpecialOrthogonal(n),
        degree,
        false,
        format!("Lambda^{p} C^{n}"),
        Arc::new(move |g: &DMatrix<f64>| exterior_power(g, p).map(c)),
    ))
}

/// Restriction of an `SO(n)` table to the stabilizer of the first basis vector.
pub fn restrict_to_stabilizer(rep: &RepresentationTable) -> Result<RepresentationTable> {
    let n = match rep.group {
        GroupLabel::SpecialOrthogonal(n) if n >= 2 => n,
        other => {
            return Err(Error::InvalidInput(format!("cannot restrict a table over {other:?}")));
        }
    };
    Ok(RepresentationTable::tabulate(
        GroupLabel::Stabilizer(n),
        rep.degree,
        rep.projective,
        format!("{} restricted to SO({})", rep.label, n - 1),
        rep.evaluator.clone(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extreme_degrees_are_trivial() {
        let t0 = exterior_rep(3, 0).unwrap();
        assert_eq!(t0.degree, 1);
        let tn = exterior_rep(3, 3).unwrap();
        assert_eq!(tn.degree, 1);
        for s in tn.samples.iter().step_by(101) {
            assert!((s.matrix[(0, 0)] - c(1.0)).norm() < 1e-12);
        }
        assert!(exterior_rep(3, 4).is_err());
    }

    #[test]
    fn defining_rep_is_the_rotation() {
        let t = exterior_rep(3, 1).unwrap();
        for s in t.samples.iter().step_by(37) {
            assert!(max_abs(&(s.element.map(c) - &s.matrix)) < 1e-15);
        }
        assert!((t.weight_sum() - 1.0).abs() < 1e-12);
        assert!(t.unitarity_residual() < 1e-12);
        assert!(t.homomorphism_residual(401).0 < 1e-12);
    }

    #[test]
    fn restriction_fixes_first_vector() {
        let t = restrict_to_stabilizer(&exterior_rep(4, 1).unwrap()).unwrap();
        assert_eq!(t.group, GroupLabel::Stabilizer(4));
        for s in t.samples.iter().step_by(53) {
            assert_eq!(s.element[(0, 0)], 1.0);
            assert_eq!(s.matrix[(0, 0)], c(1.0));
        }
        let t0 = restrict_to_stabilizer(&exterior_rep(4, 0).unwrap()).unwrap();
        assert!(t0.samples.iter().all(|s| s.matrix[(0, 0)] == c(1.0)));
    }
}
