//! Invariant subspaces of sampled representations and the branching of
//! `Λᵖℂⁿ` under `SO(n−1)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rep::{exterior_rep, restrict_to_stabilizer, RepresentationTable};
use crate::combinatorics::{binomial, subsets};
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, max_abs, CMatrix};

/// Relative eigenvalue gap separating clusters of the twirled seed.
pub const CLUSTER_GAP: f64 = 1e-6;
pub const PROJECTION_TOL: f64 = 1e-10;
const SEED: u64 = 0x150_7091c;

#[derive(Debug, Clone, PartialEq)]
pub struct IsotypicProjection {
    pub projector: CMatrix,
    pub dimension: usize,
    pub label: usize,
}

fn random_hermitian(k: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMatrix::from_fn(k, k, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        num_complex::Complex64::new(re, im)
    });
    (&g + g.adjoint()) * c(0.5)
}

/// Worst commutator `‖[P, ρ(g)]‖` over the sampled group elements.
pub fn commutant_residual(rep: &RepresentationTable, projector: &CMatrix) -> f64 {
    rep.samples
        .iter()
        .map(|s| max_abs(&(projector * &s.matrix - &s.matrix * projector)))
        .fold(0.0, f64::max)
}

/// Decomposes the representation space into invariant subspaces by
/// diagonalizing the Haar twirl of a generic Hermitian matrix.
///
/// Over ℂ the eigenspaces of a generic commutant element are irreducible.
pub fn isotypic_projections(rep: &RepresentationTable) -> Result<Vec<IsotypicProjection>> {
    let k = rep.degree;
    let twirled = rep.twirl(&random_hermitian(k, SEED));
    let (values, vectors) = hermitian_eigen(&twirled);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(cl) if v - values[*cl.last().unwrap()] <= CLUSTER_GAP * scale => cl.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    let mut out = Vec::with_capacity(clusters.len());
    let mut total = CMatrix::zeros(k, k);
    for (label, cluster) in clusters.iter().enumerate() {
        let cols = vectors.select_columns(cluster);
        let projector = &cols * cols.adjoint();
        let residual = commutant_residual(rep, &projector);
        if residual > PROJECTION_TOL {
            return Err(Error::Resolution(format!(
                "component {label} of {} fails to commute with the samples (residual {residual:.3e}); \
                 quadrature is not exact for this representation",
                rep.label
            )));
        }
        total += &projector;
        out.push(IsotypicProjection {
            projector,
            dimension: cluster.len(),
            label,
        });
    }
    let sum_residual = max_abs(&(total - CMatrix::identity(k, k)));
    if sum_residual > PROJECTION_TOL {
        return Err(Error::Resolution(format!("projections do not sum to the identity ({sum_residual:.3e})")));
    }
    Ok(out)
}

/// Groups components into isomorphism classes via the character inner
/// product `Σ_g w χᵢ(g) conj χⱼ(g)`. Returns a class index per component.
pub fn isomorphism_classes(rep: &RepresentationTable, comps: &[IsotypicProjection]) -> Vec<usize> {
    let chars: Vec<_> = comps.iter().map(|p| rep.character(&p.projector)).collect();
    let mut class = vec![usize::MAX; comps.len()];
    let mut next = 0;
    for i in 0..comps.len() {
        if class[i] != usize::MAX {
            continue;
        }
        class[i] = next;
        for j in i + 1..comps.len() {
            if class[j] != usize::MAX || comps[i].dimension != comps[j].dimension {
                continue;
            }
            let ip: num_complex::Complex64 = rep
                .samples
                .iter()
                .zip(chars[i].iter().zip(&chars[j]))
                .map(|(s, (a, b))| a * b.conj() * s.weight)
                .sum();
            if ip.norm() > 0.5 {
                class[j] = next;
            }
        }
        next += 1;
    }
    class
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchComponent {
    pub label: usize,
    pub rank: usize,
    pub class: usize,
    pub commutant_residual: f64,
}

/// Ranks of one isomorphism class inside the two invariant summands
/// `Λᵖℂⁿ⁻¹` (forms without `e₁`) and `e₁ ∧ Λᵖ⁻¹ℂⁿ⁻¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSplit {
    pub class: usize,
    pub total_rank: usize,
    pub rank_without_e1: f64,
    pub rank_with_e1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchingReport {
    pub n: usize,
    pub p: usize,
    pub degree: usize,
    pub components: Vec<BranchComponent>,
    pub classes: Vec<ClassSplit>,
    pub sum_residual: f64,
    pub expected_without_e1: usize,
    pub expected_with_e1: usize,
    /// Worst distance of a class split from an integer, and of the summed
    /// splits from the expected binomial coefficients.
    pub split_residual: f64,
}

impl BranchingReport {
    pub fn ranks(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.components.iter().map(|c| c.rank).collect();
        r.sort_unstable();
        r
    }

    pub fn split_matches(&self, tol: f64) -> bool {
        self.split_residual <= tol && self.sum_residual <= tol
    }
}

/// Restricts `Λᵖℂⁿ` to `SO(n−1)` and checks the splitting
/// `Λᵖℂⁿ = Λᵖℂⁿ⁻¹ ⊕ Λᵖ⁻¹ℂⁿ⁻¹` after merging isomorphic components.
pub fn branching_report(n: usize, p: usize) -> Result<BranchingReport> {
    let rep = restrict_to_stabilizer(&exterior_rep(n, p)?)?;
    let comps = isotypic_projections(&rep)?;
    let classes = isomorphism_classes(&rep, &comps);
    let degree = rep.degree;
    let idx = subsets(n, p);
    let with_e1 = CMatrix::from_fn(degree, degree, |i, j| {
        if i == j && idx[i].contains(&0) {
            c(1.0)
        } else {
            c(0.0)
        }
    });
    let total = comps.iter().fold(CMatrix::zeros(degree, degree), |acc, p| acc + &p.projector);
    let sum_residual = max_abs(&(total - CMatrix::identity(degree, degree)));
    let n_classes = classes.iter().max().map_or(0, |m| m + 1);
    let mut splits = Vec::with_capacity(n_classes);
    let mut split_residual: f64 = 0.0;
    let (mut sum_without, mut sum_with) = (0.0, 0.0);
    for class in 0..n_classes {
        let members: Vec<&IsotypicProjection> =
            comps.iter().zip(&classes).filter(|(_, cl)| **cl == class).map(|(p, _)| p).collect();
        let proj = members.iter().fold(CMatrix::zeros(degree, degree), |acc, p| acc + &p.projector);
        let total_rank = members.iter().map(|p| p.dimension).sum::<usize>();
        let in_e1 = (&proj * &with_e1).trace().re;
        let in_free = total_rank as f64 - in_e1;
        split_residual = split_residual.max((in_e1 - in_e1.round()).abs());
        sum_without += in_free;
        sum_with += in_e1;
        splits.push(ClassSplit {
            class,
            total_rank,
            rank_without_e1: in_free,
            rank_with_e1: in_e1,
        });
    }
    let expected_without_e1 = binomial(n - 1, p);
    let expected_with_e1 = if p == 0 { 0 } else { binomial(n - 1, p - 1) };
    split_residual = split_residual
        .max((sum_without - expected_without_e1 as f64).abs())
        .max((sum_with - expected_with_e1 as f64).abs());
    let components = comps
        .iter()
        .zip(&classes)
        .map(|(pr, cl)| BranchComponent {
            label: pr.label,
            rank: pr.dimension,
            class: *cl,
            commutant_residual: commutant_residual(&rep, &pr.projector),
        })
        .collect();
    Ok(BranchingReport {
        n,
        p,
        degree,
        components,
        classes: splits,
        sum_residual,
        expected_without_e1,
        expected_with_e1,
        split_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::group::plane_rotation;
    use crate::algebra::rep::RepSample;

    #[test]
    fn trivial_rep_has_one_projection() {
        let rep = restrict_to_stabilizer(&exterior_rep(3, 0).unwrap()).unwrap();
        let comps = isotypic_projections(&rep).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].dimension, 1);
        assert!(max_abs(&(&comps[0].projector - CMatrix::identity(1, 1))) < 1e-12);
    }

    #[test]
    fn so2_weights_split_the_defining_rep_over_c() {
        let rep = restrict_to_stabilizer(&exterior_rep(3, 1).unwrap()).unwrap();
        let comps = isotypic_projections(&rep).unwrap();
        let mut ranks: Vec<usize> = comps.iter().map(|p| p.dimension).collect();
        ranks.sort_unstable();
        assert_eq!(ranks, vec![1, 1, 1]);
        for pr in &comps {
            assert!(max_abs(&(&pr.projector * &pr.projector - &pr.projector)) < 1e-10);
            assert!(max_abs(&(&pr.projector - pr.projector.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn inexact_quadrature_is_detected() {
        // three unrelated angles do not form a group, so the twirl cannot commute
        let mut rep = restrict_to_stabilizer(&exterior_rep(3, 1).unwrap()).unwrap();
        rep.samples = [0.0, 0.4, 1.1]
            .iter()
            .map(|a| {
                let element = plane_rotation(3, 1, 2, *a);
                let matrix = rep.evaluate(&element);
                RepSample { element, matrix, weight: 1.0 / 3.0 }
            })
            .collect();
        assert!(matches!(isotypic_projections(&rep), Err(Error::Resolution(_))));
    }

    #[test]
    fn branching_ranks_for_two_forms_in_four_dimensions() {
        let report = branching_report(4, 2).unwrap();
        assert_eq!(report.ranks(), vec![3, 3]);
        assert!(report.split_matches(1e-9));
    }
}
