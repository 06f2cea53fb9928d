use std::time::Instant;

use frameflow_core::algebra::build_clifford;
use frameflow_core::combinatorics::binomial;
use frameflow_core::geometry::ManifoldModel;
use frameflow_core::linalg::{c, hermitian_eigen, max_abs};
use frameflow_core::spectral::{
    build_dirac, build_laplacian, exterior_d, helicity_r, hodge_projections, hodge_star, quantize, sign_and_halves,
    sphere_multiply_z_squared, Bundle, ModeLabel, OperatorMatrix, SpectralModel, TorusSymbol,
};
use proptest::prelude::*;

fn cases() -> Vec<(ManifoldModel, usize)> {
    vec![
        (ManifoldModel::flat_torus(2).unwrap(), 8),
        (ManifoldModel::flat_torus(3).unwrap(), 4),
        (ManifoldModel::round_sphere(), 16),
    ]
}

#[test]
fn structural_identities() {
    let start = Instant::now();
    for (m, k) in cases() {
        let n = m.dim();
        for p in 0..=n {
            let d = exterior_d(&m, p, k).unwrap();
            if p < n {
                let dd = exterior_d(&m, p + 1, k).unwrap().mul(&d).unwrap();
                assert!(dd.max_abs() <= 1e-12, "{} p={p}", m.name());
            }
            let h = hodge_projections(&m, p, k).unwrap();
            let id = OperatorMatrix::identity(&h.laplacian.rows);
            let checks = [
                ("Δ = dδ+δd", h.assembled_laplacian.sub(&h.laplacian).unwrap().max_abs()),
                ("P+Q+H = I", h.p.add(&h.q).unwrap().add(&h.h).unwrap().sub(&id).unwrap().max_abs()),
                ("P² = P", h.p.mul(&h.p).unwrap().sub(&h.p).unwrap().max_abs()),
                ("Q² = Q", h.q.mul(&h.q).unwrap().sub(&h.q).unwrap().max_abs()),
                ("PQ = 0", h.p.mul(&h.q).unwrap().max_abs()),
                ("QP = 0", h.q.mul(&h.p).unwrap().max_abs()),
                ("[P, Δ] = 0", h.p.commutator(&h.laplacian).unwrap().max_abs()),
                ("[Q, Δ] = 0", h.q.commutator(&h.laplacian).unwrap().max_abs()),
            ];
            for (name, r) in checks {
                assert!(r <= 1e-10, "{} p={p}: {name} residual {r}", m.name());
            }
        }
    }
    assert!(start.elapsed().as_secs_f64() < 30.0);
}

#[test]
fn hodge_ranks() {
    let t2 = ManifoldModel::flat_torus(2).unwrap();
    let h = hodge_projections(&t2, 1, 3).unwrap();
    assert_eq!(h.h.trace().re.round() as usize, 2);
    let h0 = hodge_projections(&t2, 0, 3).unwrap();
    assert_eq!(h0.q.max_abs(), 0.0);
    assert_eq!(h0.h.trace().re.round() as usize, 1);
    let t3 = ManifoldModel::flat_torus(3).unwrap();
    let h = hodge_projections(&t3, 1, 1).unwrap();
    let nonzero = 26.0;
    assert!((h.p.trace().re - 2.0 * nonzero).abs() < 1e-10);
    assert!((h.q.trace().re - nonzero).abs() < 1e-10);
    let s2 = hodge_projections(&ManifoldModel::round_sphere(), 1, 5).unwrap();
    assert_eq!(s2.h.max_abs(), 0.0);
}

#[test]
fn star_star_sign_on_three_torus() {
    let m = ManifoldModel::flat_torus(3).unwrap();
    for p in 0..=3 {
        let ss = hodge_star(&m, 3 - p, 2).unwrap().mul(&hodge_star(&m, p, 2).unwrap()).unwrap();
        let id = OperatorMatrix::identity(&ss.rows);
        assert_eq!(ss.sub(&id).unwrap().max_abs(), 0.0);
    }
}

#[test]
fn helicity_properties() {
    let m = ManifoldModel::flat_torus(3).unwrap();
    let r = helicity_r(&m, 4).unwrap();
    let h = hodge_projections(&m, 1, 4).unwrap();
    let rr_p = r.mul(&r).unwrap().mul(&h.p).unwrap().sub(&h.p).unwrap().max_abs();
    assert!(rr_p <= 1e-10);
    assert!(r.commutator(&h.p).unwrap().max_abs() <= 1e-10);
    assert!(r.commutator(&h.laplacian).unwrap().max_abs() <= 1e-10);
    assert!(r.mul(&h.h).unwrap().max_abs() == 0.0);
    // every nonzero shell: eigenvalues {−1, 0, +1}
    for (i, mode) in r.rows.modes.iter().enumerate() {
        if mode.eigenvalue == 0.0 {
            continue;
        }
        let (ev, _) = hermitian_eigen(r.block(i, i).unwrap());
        for (got, want) in ev.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - want).abs() <= 1e-12, "{:?}", mode.label);
        }
    }
}

#[test]
fn helicity_flips_under_reflection() {
    let m = ManifoldModel::flat_torus(3).unwrap();
    let r = helicity_r(&m, 2).unwrap();
    let b = &r.rows;
    let refl = frameflow_core::linalg::to_complex(&nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0, 1.0])));
    for (i, mode) in b.modes.iter().enumerate() {
        let ModeLabel::Fourier(k) = &mode.label else { unreachable!() };
        let mirrored = ModeLabel::Fourier(vec![-k[0], k[1], k[2]]);
        let j = b.mode_index(&mirrored).unwrap();
        let (Some(a), Some(bm)) = (r.block(i, i), r.block(j, j)) else { continue };
        // pulling back by x₁ → −x₁ maps dx₁ → −dx₁ and k → (−k₁, k₂, k₃)
        assert!(max_abs(&(&refl * a * &refl + bm)) < 1e-12);
    }
}

#[test]
fn dirac_properties() {
    for (n, k) in [(2usize, 8usize), (3, 4)] {
        let m = ManifoldModel::flat_torus(n).unwrap();
        let (space, d) = build_dirac(&m, k).unwrap();
        let cl = build_clifford(n).unwrap();
        let s = sign_and_halves(&d).unwrap();
        let (_, lap) = build_laplacian(&m, Bundle::Spinors, k, 0.0, 0.0).unwrap();
        assert!(d.mul(&d).unwrap().sub(&lap).unwrap().max_abs() <= 1e-12);
        assert!(d.hermitian_residual() == 0.0);
        assert!(s.plus.commutator(&s.abs).unwrap().max_abs() <= 1e-12);
        assert!(s.minus.commutator(&s.abs).unwrap().max_abs() <= 1e-12);
        let ss = s.sign.mul(&s.sign).unwrap().add(&s.kernel).unwrap();
        assert!(ss.sub(&OperatorMatrix::identity(&space.basis)).unwrap().max_abs() <= 1e-12);
        for (i, mode) in space.basis.modes.iter().enumerate() {
            if mode.eigenvalue == 0.0 {
                assert!(s.sign.block(i, i).is_none());
                continue;
            }
            let len = mode.eigenvalue.sqrt();
            let omega: Vec<f64> = mode.xi.iter().map(|v| v / len).collect();
            let expected = cl.clifford_mult(&omega).unwrap();
            assert!(max_abs(&(s.sign.block(i, i).unwrap() - expected)) <= 1e-12);
            let (tp, tm) = (s.plus.block(i, i).unwrap().trace().re, s.minus.block(i, i).unwrap().trace().re);
            assert!((tp - tm).abs() <= 1e-12);
            // eigenvalues of D square to those of D²
            let (ev, _) = hermitian_eigen(d.block(i, i).unwrap());
            assert!(ev.iter().all(|v| (v * v - mode.eigenvalue).abs() <= 1e-12));
        }
    }
}

#[test]
fn laplacian_examples() {
    let (_, lap) = build_laplacian(&ManifoldModel::flat_torus(3).unwrap(), Bundle::Forms(2), 1, 0.0, 0.0).unwrap();
    let diag: Vec<f64> = lap.diagonal().iter().map(|z| z.re).collect();
    assert_eq!(diag.len(), 27 * binomial(3, 2));
    assert_eq!(&diag[..3], &[0.0, 0.0, 0.0]);
    assert!(matches!(
        build_laplacian(&ManifoldModel::hyperbolic_octagon(), Bundle::Functions, 2, 0.0, 0.0),
        Err(frameflow_core::Error::Capability(_))
    ));
}

#[test]
fn order_zero_norms_are_stable_across_cutoffs() {
    let m = ManifoldModel::flat_torus(2).unwrap();
    let a = TorusSymbol::cosine(2, 1, &[1, 0]).product(&TorusSymbol::direction_monomial(2, 1, &[2, 0])).unwrap();
    let norms: Vec<f64> = [8usize, 16]
        .iter()
        .map(|&k| quantize(&SpectralModel::new(&m, Bundle::Functions, k).unwrap(), &a).unwrap().norm())
        .collect();
    assert!(norms[0] <= 1.0 + 1e-12 && norms[1] <= 1.0 + 1e-12);
    assert!((norms[1] - norms[0]).abs() * 8.0 <= 2.0, "{norms:?}");
}

#[test]
fn adjoint_defect_has_order_minus_one() {
    // Op(a)* − Op(ā) on the shell |k| ∈ [Λ, 2Λ] decays like 1/Λ
    let m = ManifoldModel::flat_torus(2).unwrap();
    let space = SpectralModel::new(&m, Bundle::Functions, 40).unwrap();
    let a = TorusSymbol::cosine(2, 1, &[1, 0]).product(&TorusSymbol::direction_monomial(2, 1, &[1, 0])).unwrap();
    let defect = quantize(&space, &a).unwrap().adjoint().sub(&quantize(&space, &a.adjoint()).unwrap()).unwrap();
    let shell = |l: f64| defect.compress(&space.basis.shell(l, 2.0 * l)).norm();
    let (n5, n10, n20) = (shell(5.0), shell(10.0), shell(20.0));
    assert!(n10 / n5 < 0.7 && n20 / n10 < 0.7, "{n5} {n10} {n20}");
}

#[test]
fn sphere_z_squared_is_hermitian_and_bounded() {
    let space = SpectralModel::new(&ManifoldModel::round_sphere(), Bundle::Functions, 12).unwrap();
    let z2 = sphere_multiply_z_squared(&space).unwrap();
    assert!(z2.hermitian_residual() == 0.0);
    assert!(z2.norm() <= 1.0 + 1e-12);
    assert!((z2.trace().re / space.dim() as f64 - 1.0 / 3.0).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn quantization_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, q0 in -2i64..=2, q1 in -2i64..=2) {
        let m = ManifoldModel::flat_torus(2).unwrap();
        let space = SpectralModel::new(&m, Bundle::Functions, 4).unwrap();
        let s1 = TorusSymbol::cosine(2, 1, &[q0, q1]);
        let s2 = TorusSymbol::direction_monomial(2, 1, &[1, 1]);
        let mut sum = s1.clone();
        sum.terms = s1.terms.iter().map(|t| { let mut t = t.clone(); t.coefficient *= c(a); t }).collect();
        sum.terms.extend(s2.terms.iter().map(|t| { let mut t = t.clone(); t.coefficient *= c(b); t }));
        let lhs = quantize(&space, &sum).unwrap();
        let rhs = quantize(&space, &s1).unwrap().scale(c(a)).add(&quantize(&space, &s2).unwrap().scale(c(b))).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn d_squared_vanishes_for_any_cutoff(k in 1usize..4, p in 0usize..3) {
        let m = ManifoldModel::flat_torus(3).unwrap();
        let dd = exterior_d(&m, p + 1, k).unwrap().mul(&exterior_d(&m, p, k).unwrap()).unwrap();
        prop_assert_eq!(dd.max_abs(), 0.0);
    }
}
