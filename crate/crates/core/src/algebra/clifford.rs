//! Complex Clifford modules `ℂ^{2^⌊n/2⌋}` for `Cl(ℝⁿ)`.

use crate::error::{Error, Result};
use crate::linalg::{c, kron, max_abs, CMatrix, I};

#[derive(Debug, Clone, PartialEq)]
pub struct CliffordModel {
    pub n: usize,
    pub gammas: Vec<CMatrix>,
}

fn pauli() -> [CMatrix; 3] {
    let o = c(0.0);
    let l = c(1.0);
    [
        CMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        CMatrix::from_row_slice(2, 2, &[o, -I, I, o]),
        CMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    ]
}

fn tensor(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, f| kron(&acc, f))
}

/// Jordan–Wigner style construction: Hermitian generators with entries in
/// `{0, ±1, ±i}` satisfying `γᵢγⱼ + γⱼγᵢ = 2δᵢⱼ`.
pub fn build_clifford(n: usize) -> Result<CliffordModel> {
    if !(2..=6).contains(&n) {
        return Err(Error::InvalidInput(format!("Clifford dimension must be in 2..=6, got {n}")));
    }
    let [s1, s2, s3] = pauli();
    let id = CMatrix::identity(2, 2);
    let m = n / 2;
    let mut gammas = Vec::with_capacity(n);
    for j in 0..m {
        for s in [&s1, &s2] {
            let mut factors = vec![s3.clone(); j];
            factors.push(s.clone());
            factors.extend(std::iter::repeat_n(id.clone(), m - j - 1));
            gammas.push(tensor(&factors));
        }
    }
    if n % 2 == 1 {
        gammas.push(tensor(&vec![s3.clone(); m]));
    }
    Ok(CliffordModel { n, gammas })
}

impl CliffordModel {
    /// Dimension `2^⌊n/2⌋` of the spinor module.
    pub fn module_dim(&self) -> usize {
        1 << (self.n / 2)
    }

    /// Clifford multiplication `γ_ξ = Σ ξᵢ γᵢ`.
    pub fn clifford_mult(&self, xi: &[f64]) -> Result<CMatrix> {
        if xi.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "covector has {} components, Clifford model has {}",
                xi.len(),
                self.n
            )));
        }
        let k = self.module_dim();
        Ok(self
            .gammas
            .iter()
            .zip(xi)
            .fold(CMatrix::zeros(k, k), |acc, (g, x)| acc + g * c(*x)))
    }

    /// `max |γᵢγⱼ + γⱼγᵢ − 2δᵢⱼ|` over all pairs.
    pub fn anticommutator_residual(&self) -> f64 {
        let k = self.module_dim();
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let mut ac = &self.gammas[i] * &self.gammas[j] + &self.gammas[j] * &self.gammas[i];
                if i == j {
                    ac -= CMatrix::identity(k, k) * c(2.0);
                }
                worst = worst.max(max_abs(&ac));
            }
        }
        worst
    }

    /// Product `γᵢγⱼ`.
    pub fn bivector(&self, i: usize, j: usize) -> CMatrix {
        &self.gammas[i] * &self.gammas[j]
    }
}

#[cfg(test)]
fn is_unit_entry(z: num_complex::Complex64) -> bool {
    [c(0.0), c(1.0), c(-1.0), I, -I].contains(&z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_residual;

    #[test]
    fn generators_are_exact_and_hermitian() {
        for n in 2..=6 {
            let cl = build_clifford(n).unwrap();
            assert_eq!(cl.gammas.len(), n);
            assert_eq!(cl.module_dim(), 1 << (n / 2));
            assert_eq!(cl.anticommutator_residual(), 0.0);
            for g in &cl.gammas {
                assert_eq!(hermitian_residual(g), 0.0);
                assert!(g.iter().all(|z| is_unit_entry(*z)));
            }
        }
        assert!(build_clifford(7).is_err());
        assert!(build_clifford(1).is_err());
    }

    #[test]
    fn pauli_pair_in_two_dimensions() {
        let cl = build_clifford(2).unwrap();
        let [s1, s2, _] = pauli();
        assert_eq!(cl.gammas[0], s1);
        assert_eq!(cl.gammas[1], s2);
        assert_eq!(cl.clifford_mult(&[1.0, 0.0]).unwrap(), s1);
        assert_eq!(cl.clifford_mult(&[0.0, 0.0]).unwrap(), CMatrix::zeros(2, 2));
        assert!(cl.clifford_mult(&[1.0]).is_err());
    }
}
