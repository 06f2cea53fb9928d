use frameflow_core::algebra::spin::{apply_conjugation, conjugation_matrix};
use frameflow_core::algebra::{branching_report, build_clifford, conjugation_rep, spin_lift, spin_rep};
use frameflow_core::algebra::group::random_rotation;
use frameflow_core::linalg::max_abs;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn branching_ranks_match_known_decompositions() {
    for (n, p, ranks) in [(3, 1, vec![1, 1, 1]), (4, 1, vec![1, 3]), (4, 2, vec![3, 3]), (5, 2, vec![3, 3, 4])] {
        let r = branching_report(n, p).unwrap();
        assert_eq!(r.ranks(), ranks, "n={n} p={p}");
        assert!(r.split_matches(1e-9), "n={n} p={p}: {}", r.split_residual);
        assert!(r.components.iter().all(|c| c.commutant_residual <= 1e-10));
    }
}

#[test]
fn spin_table_is_projectively_multiplicative() {
    for n in 2..=4 {
        let rep = spin_rep(&build_clifford(n).unwrap());
        let (res, phase) = rep.homomorphism_residual(37);
        assert!(res < 1e-10, "n={n} residual {res}");
        assert!(phase < 1e-10, "n={n} phase {phase}");
        assert!(rep.unitarity_residual() < 1e-12);
    }
}

#[test]
fn conjugation_table_is_unitary() {
    let rep = conjugation_rep(&build_clifford(3).unwrap());
    assert!(rep.unitarity_residual() < 1e-12);
    assert_eq!(rep.degree, 4);
}

fn embed(h: &DMatrix<f64>) -> DMatrix<f64> {
    let m = h.nrows() + 1;
    let mut g = DMatrix::identity(m, m);
    g.view_mut((1, 1), (m - 1, m - 1)).copy_from(h);
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conjugation_is_a_right_action(seed in any::<u64>(), n in 3usize..=6) {
        let cl = build_clifford(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = embed(&random_rotation(n - 1, &mut rng));
        let h = embed(&random_rotation(n - 1, &mut rng));
        let t = |x: &DMatrix<f64>| conjugation_matrix(&spin_lift(&cl, x).unwrap());
        let lhs = t(&(&g * &h));
        let rhs = t(&h) * t(&g);
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-10);
    }

    #[test]
    fn spin_covariance(seed in any::<u64>(), n in 2usize..=6, xi in proptest::collection::vec(-3.0f64..3.0, 6)) {
        let cl = build_clifford(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = random_rotation(n, &mut rng);
        let s = spin_lift(&cl, &r).unwrap();
        let v = &xi[..n];
        let gamma = cl.clifford_mult(v).unwrap();
        // S⁻¹ γ(ξ) S = γ(R⁻¹ ξ)
        let rinv_xi: Vec<f64> = (r.transpose() * nalgebra::DVector::from_column_slice(v)).iter().cloned().collect();
        let lhs = apply_conjugation(&conjugation_matrix(&s), &gamma);
        prop_assert!(max_abs(&(lhs - cl.clifford_mult(&rinv_xi).unwrap())) < 1e-10);
    }

    #[test]
    fn clifford_relation(n in 2usize..=6) {
        prop_assert_eq!(build_clifford(n).unwrap().anticommutator_residual(), 0.0);
    }
}
