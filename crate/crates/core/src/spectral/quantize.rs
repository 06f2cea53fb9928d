//! Left (Kohn–Nirenberg) quantization of trigonometric symbols on flat tori:
//! `⟨e_{k'}, Op(a) e_k⟩ = â(k' − k, k/|k|)`, with the zero mode removed.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{OperatorMatrix, SymbolField};
use super::{ModeLabel, SpectralModel};
use crate::error::{Error, Result};
use crate::geometry::ManifoldModel;
use crate::linalg::{c, CMatrix};

/// `coefficient · ω^exponents · e^{i q·x}` with `q` in the dual lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolTerm {
    pub frequency: Vec<i64>,
    pub exponents: Vec<u32>,
    pub coefficient: CMatrix,
}

/// Finite trigonometric polynomial in `x` times polynomial in `ω = ξ/|ξ|`,
/// composed with the geodesic flow for time `transport`:
/// `a_s(x, ω) = a(x + sω, ω)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusSymbol {
    pub periods: Vec<f64>,
    pub fiber_dim: usize,
    pub terms: Vec<SymbolTerm>,
    pub transport: f64,
    pub label: String,
}

impl TorusSymbol {
    pub fn zero(dim: usize, fiber_dim: usize) -> Self {
        Self {
            periods: vec![TAU; dim],
            fiber_dim,
            terms: Vec::new(),
            transport: 0.0,
            label: "0".into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn add_term(mut self, frequency: Vec<i64>, exponents: Vec<u32>, coefficient: CMatrix) -> Self {
        self.terms.push(SymbolTerm {
            frequency,
            exponents,
            coefficient,
        });
        self
    }

    fn scalar_term(self, frequency: Vec<i64>, exponents: Vec<u32>, value: Complex64) -> Self {
        let m = self.fiber_dim;
        self.add_term(frequency, exponents, CMatrix::identity(m, m) * value)
    }

    /// `value · I`.
    pub fn constant(dim: usize, fiber_dim: usize, value: f64) -> Self {
        Self::zero(dim, fiber_dim)
            .scalar_term(vec![0; dim], vec![0; dim], c(value))
            .with_label(format!("{value}"))
    }

    /// `cos(q·x) · I`.
    pub fn cosine(dim: usize, fiber_dim: usize, q: &[i64]) -> Self {
        let neg: Vec<i64> = q.iter().map(|v| -v).collect();
        Self::zero(dim, fiber_dim)
            .scalar_term(q.to_vec(), vec![0; dim], c(0.5))
            .scalar_term(neg, vec![0; dim], c(0.5))
            .with_label(format!("cos({q:?}·x)"))
    }

    /// `ω^exponents · I`.
    pub fn direction_monomial(dim: usize, fiber_dim: usize, exponents: &[u32]) -> Self {
        Self::zero(dim, fiber_dim)
            .scalar_term(vec![0; dim], exponents.to_vec(), c(1.0))
            .with_label(format!("ω^{exponents:?}"))
    }

    pub fn product(&self, other: &TorusSymbol) -> Result<TorusSymbol> {
        if self.periods != other.periods || self.fiber_dim != other.fiber_dim || self.transport != other.transport {
            return Err(Error::InvalidInput("symbols live on different spaces".into()));
        }
        let mut out = TorusSymbol::zero(self.dim(), self.fiber_dim);
        out.periods = self.periods.clone();
        out.transport = self.transport;
        for a in &self.terms {
            for b in &other.terms {
                out.terms.push(SymbolTerm {
                    frequency: a.frequency.iter().zip(&b.frequency).map(|(x, y)| x + y).collect(),
                    exponents: a.exponents.iter().zip(&b.exponents).map(|(x, y)| x + y).collect(),
                    coefficient: &a.coefficient * &b.coefficient,
                });
            }
        }
        Ok(out.with_label(format!("({})·({})", self.label, other.label)))
    }

    /// Pointwise adjoint `a*`.
    pub fn adjoint(&self) -> TorusSymbol {
        let mut out = self.clone();
        for t in out.terms.iter_mut() {
            t.frequency = t.frequency.iter().map(|v| -v).collect();
            t.coefficient = t.coefficient.adjoint();
        }
        out.label = format!("({})*", self.label);
        out
    }

    /// `a ∘ G_s`: the symbol transported along the geodesic flow.
    pub fn transported(&self, s: f64) -> TorusSymbol {
        let mut out = self.clone();
        out.transport += s;
        out.label = format!("{}∘G_{s}", self.label);
        out
    }

    fn dual(&self, q: &[i64]) -> Vec<f64> {
        q.iter().zip(&self.periods).map(|(v, p)| *v as f64 * TAU / p).collect()
    }

    /// `a(x + sω, ω)` with `ω` a unit vector.
    pub fn evaluate(&self, x: &[f64], omega: &[f64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.fiber_dim, self.fiber_dim);
        for t in &self.terms {
            let xi = self.dual(&t.frequency);
            let phase: f64 = xi.iter().zip(x.iter().zip(omega)).map(|(q, (xx, w))| q * (xx + self.transport * w)).sum();
            out += &t.coefficient * (monomial(omega, &t.exponents) * Complex64::from_polar(1.0, phase));
        }
        out
    }

    pub fn to_symbol_field(&self) -> SymbolField {
        let me = self.clone();
        SymbolField::new(self.label.clone(), self.fiber_dim, move |x, w| me.evaluate(x, w))
    }

    /// Admissibility: matching dimensions and finite coefficients.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        for t in &self.terms {
            if t.frequency.len() != n || t.exponents.len() != n {
                return Err(Error::InvalidInput(format!("symbol term has the wrong dimension (expected {n})")));
            }
            if t.coefficient.shape() != (self.fiber_dim, self.fiber_dim) {
                return Err(Error::InvalidInput("symbol coefficient has the wrong fiber dimension".into()));
            }
            if t.coefficient.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidInput("symbol coefficient is not finite".into()));
            }
        }
        if !self.transport.is_finite() {
            return Err(Error::InvalidInput("transport time is not finite".into()));
        }
        Ok(())
    }
}

fn monomial(omega: &[f64], e: &[u32]) -> f64 {
    omega.iter().zip(e).map(|(w, k)| w.powi(*k as i32)).product()
}

/// `Op(a)` on the truncated Fourier basis of `space`.
pub fn quantize(space: &SpectralModel, a: &TorusSymbol) -> Result<OperatorMatrix> {
    let ManifoldModel::FlatTorus { periods } = &space.model else {
        return Err(Error::Capability(format!("quantization is implemented on flat tori, not {}", space.model.name())));
    };
    a.validate()?;
    if *periods != a.periods {
        return Err(Error::InvalidInput("symbol periods differ from the torus".into()));
    }
    let basis = &space.basis;
    if basis.fiber_labels.len() != a.fiber_dim {
        return Err(Error::InvalidInput(format!(
            "symbol fiber {} does not match bundle fiber {}",
            a.fiber_dim,
            basis.fiber_labels.len()
        )));
    }
    let mut by_freq: BTreeMap<Vec<i64>, Vec<&SymbolTerm>> = BTreeMap::new();
    for t in &a.terms {
        by_freq.entry(t.frequency.clone()).or_default().push(t);
    }
    let mut op = OperatorMatrix::zeros(basis.clone(), basis.clone(), format!("Op({})", a.label));
    let m = a.fiber_dim;
    for (j, mode) in basis.modes.iter().enumerate() {
        let ModeLabel::Fourier(k) = &mode.label else { unreachable!() };
        if mode.eigenvalue == 0.0 {
            continue;
        }
        let len = mode.eigenvalue.sqrt();
        let omega: Vec<f64> = mode.xi.iter().map(|v| v / len).collect();
        for (q, terms) in &by_freq {
            let target: Vec<i64> = k.iter().zip(q).map(|(x, y)| x + y).collect();
            let Some(i) = basis.mode_index(&ModeLabel::Fourier(target)) else { continue };
            if basis.modes[i].eigenvalue == 0.0 {
                continue;
            }
            let xi = a.dual(q);
            let phase: f64 = xi.iter().zip(&omega).map(|(x, w)| x * w).sum::<f64>() * a.transport;
            let mut block = CMatrix::zeros(m, m);
            for t in terms {
                block += &t.coefficient * c(monomial(&omega, &t.exponents));
            }
            if phase != 0.0 {
                block *= Complex64::from_polar(1.0, phase);
            }
            op.add_to_block(i, j, block);
        }
    }
    Ok(op.with_symbol(a.to_symbol_field(), 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Bundle;

    fn space(k: usize) -> SpectralModel {
        SpectralModel::new(&ManifoldModel::flat_torus(2).unwrap(), Bundle::Functions, k).unwrap()
    }

    #[test]
    fn one_is_identity_off_the_zero_mode() {
        let s = space(3);
        let op = quantize(&s, &TorusSymbol::constant(2, 1, 1.0)).unwrap();
        let d = op.diagonal();
        assert_eq!(d[0], c(0.0));
        assert!(d[1..].iter().all(|z| *z == c(1.0)));
        assert!(op.is_block_diagonal());
    }

    #[test]
    fn cosine_is_half_shifts() {
        let s = space(3);
        let op = quantize(&s, &TorusSymbol::cosine(2, 1, &[1, 0])).unwrap();
        let b = &s.basis;
        let from = b.mode_index(&ModeLabel::Fourier(vec![1, 2])).unwrap();
        let up = b.mode_index(&ModeLabel::Fourier(vec![2, 2])).unwrap();
        let down = b.mode_index(&ModeLabel::Fourier(vec![0, 2])).unwrap();
        assert_eq!(op.block(up, from).unwrap()[(0, 0)], c(0.5));
        assert_eq!(op.block(down, from).unwrap()[(0, 0)], c(0.5));
        assert!(op.diagonal().iter().all(|z| *z == c(0.0)));
    }

    #[test]
    fn direction_multiplier_is_diagonal() {
        let s = space(2);
        let op = quantize(&s, &TorusSymbol::direction_monomial(2, 1, &[1, 0])).unwrap();
        for (i, m) in s.basis.modes.iter().enumerate().skip(1) {
            let expect = m.xi[0] / m.eigenvalue.sqrt();
            assert!((op.block(i, i).map_or(c(0.0), |b| b[(0, 0)]) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn transport_shifts_the_argument() {
        let a = TorusSymbol::cosine(2, 1, &[1, 0]).transported(0.7);
        let w = [0.6, 0.8];
        let v = a.evaluate(&[0.3, 1.0], &w)[(0, 0)];
        assert!((v - c((0.3 + 0.7 * 0.6f64).cos())).norm() < 1e-14);
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let bad = TorusSymbol::cosine(3, 1, &[1, 0, 0]);
        assert!(quantize(&space(2), &bad).is_err());
    }
}
