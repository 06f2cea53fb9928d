use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::RepresentationTable;
use crate::error::{Error, Result};
use crate::flows::{frame_flow, liouville_nodes, FlowObservable};
use crate::geometry::{FramePoint, ManifoldModel};
use crate::linalg::{c, max_abs, CMatrix};
use crate::spectral::{Estimate, SymbolField};

type Nodes = Arc<Vec<(FramePoint, f64)>>;

/// Rounding allowance added to quadrature error estimates.
pub const INVARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InvarianceCheck {
    pub t: f64,
    pub residual: f64,
    pub tolerance: f64,
}

impl InvarianceCheck {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

fn direction(fp: &FramePoint) -> Vec<f64> {
    fp.frame.column(0).iter().cloned().collect()
}

/// `ω(σ) = (1/k) ∫ tr σ dμ_L` by the Liouville product rule; the error
/// estimate is the difference from a rule of half the resolution.
#[derive(Debug, Clone)]
pub struct TracialState {
    pub model: ManifoldModel,
    pub resolution: usize,
    pub fiber_dim: usize,
    nodes: Nodes,
    coarse: Nodes,
}

impl TracialState {
    pub fn new(model: &ManifoldModel, resolution: usize, fiber_dim: usize) -> Result<Self> {
        if fiber_dim == 0 {
            return Err(Error::InvalidInput("fiber dimension must be positive".into()));
        }
        Ok(Self {
            model: model.clone(),
            resolution,
            fiber_dim,
            nodes: Arc::new(liouville_nodes(model, resolution)?),
            coarse: Arc::new(liouville_nodes(model, (resolution / 2).max(4))?),
        })
    }

    fn integrate(&self, nodes: &[(FramePoint, f64)], value: impl Fn(&FramePoint) -> Result<Complex64>) -> Result<Complex64> {
        let mut acc = c(0.0);
        for (fp, w) in nodes {
            acc += value(fp)? * *w;
        }
        Ok(acc / c(self.fiber_dim as f64))
    }

    fn check(&self, sigma: &SymbolField) -> Result<()> {
        if sigma.fiber_dim != self.fiber_dim {
            return Err(Error::InvalidInput(format!(
                "symbol {} has fiber {} but the state has fiber {}",
                sigma.label, sigma.fiber_dim, self.fiber_dim
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, sigma: &SymbolField) -> Result<Estimate> {
        self.check(sigma)?;
        let value = |fp: &FramePoint| Ok(sigma.evaluate(&fp.point, &direction(fp)).trace());
        let fine = self.integrate(&self.nodes, value)?;
        let coarse = self.integrate(&self.coarse, value)?;
        Ok(Estimate {
            value: fine,
            error: (fine - coarse).norm(),
            reliable: true,
        })
    }

    /// `|ω(σ ∘ G_t) − ω(σ)|`, where `G_t` moves each node along the frame flow,
    /// against the quadrature error estimates of both integrands. The trace is
    /// insensitive to fiber transport, so this is the `β_t`-invariance defect.
    pub fn flow_invariance(&self, sigma: &SymbolField, t: f64) -> Result<InvarianceCheck> {
        self.check(sigma)?;
        let base = self.evaluate(sigma)?;
        let moved = |fp: &FramePoint| {
            let g = frame_flow(&self.model, fp, t)?;
            Ok(sigma.evaluate(&g.point, &direction(&g)).trace())
        };
        let fine = self.integrate(&self.nodes, moved)?;
        let coarse = self.integrate(&self.coarse, moved)?;
        Ok(InvarianceCheck {
            t,
            residual: (fine - base.value).norm(),
            tolerance: base.error + (fine - coarse).norm() + INVARIANCE_FLOOR,
        })
    }

    /// Worst `|Σ pᵢ − I|` over the quadrature nodes.
    pub fn partition_residual(&self, projections: &[SymbolField]) -> f64 {
        let k = self.fiber_dim;
        self.nodes
            .iter()
            .map(|(fp, _)| {
                let w = direction(fp);
                let sum = projections.iter().fold(CMatrix::zeros(k, k), |acc, p| acc + p.evaluate(&fp.point, &w));
                max_abs(&(sum - CMatrix::identity(k, k)))
            })
            .fold(0.0, f64::max)
    }
}

/// `σ` read as a function on the frame bundle through the first frame vector.
pub fn symbol_observable(sigma: &SymbolField) -> FlowObservable {
    let s = sigma.clone();
    FlowObservable::new(sigma.label.clone(), sigma.fiber_dim, move |fp| Ok(s.evaluate(&fp.point, &direction(fp))))
}

/// A rotation whose first column is the unit vector `w`.
pub fn frame_completing(w: &[f64]) -> DMatrix<f64> {
    let n = w.len();
    let mut cols: Vec<nalgebra::DVector<f64>> = vec![nalgebra::DVector::from_column_slice(w).normalize()];
    for i in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = nalgebra::DVector::zeros(n);
        v[i] = 1.0;
        for u in &cols {
            v -= u * u.dot(&v);
        }
        if v.norm() > 1e-6 {
            cols.push(v.normalize());
        }
    }
    let mut f = DMatrix::from_columns(&cols);
    if f.determinant() < 0.0 {
        let last = -f.column(n - 1);
        f.set_column(n - 1, &last);
    }
    f
}

/// Fiber projection field `ω ↦ ρ(F_ω) P ρ(F_ω)*`, where `F_ω` is any rotation
/// sending `e₁` to `ω`. The field is well defined when `P` commutes with the
/// stabilizer of `e₁`, which holds for isotypic projections of a restriction.
pub fn projection_field(rep: &RepresentationTable, projector: &CMatrix, label: impl Into<String>) -> Result<SymbolField> {
    let n = rep.group.ambient_dim();
    if projector.shape() != (rep.degree, rep.degree) {
        return Err(Error::InvalidInput(format!("projector shape {:?} does not match degree {}", projector.shape(), rep.degree)));
    }
    let rep = rep.clone();
    let p = projector.clone();
    Ok(SymbolField::new(label, rep.degree, move |_, w| {
        assert_eq!(w.len(), n, "direction dimension");
        let u = rep.evaluate(&frame_completing(w));
        &u * &p * u.adjoint()
    }))
}

/// `ωᵢ(σ) = ω(pᵢσ) / ω(pᵢ)`, weighted by `ω(pᵢ)`.
#[derive(Debug, Clone)]
pub struct ErgodicComponent {
    pub projection: SymbolField,
    pub weight: f64,
    state: TracialState,
}

impl ErgodicComponent {
    pub fn evaluate(&self, sigma: &SymbolField) -> Result<Estimate> {
        let e = self.state.evaluate(&self.projection.product(sigma))?;
        Ok(Estimate {
            value: e.value / c(self.weight),
            error: e.error / self.weight,
            reliable: e.reliable,
        })
    }

    /// `|ωᵢ(σ ∘ G_t) − ωᵢ(σ)|` on a flat model, where fiber transport is trivial.
    pub fn flow_invariance_residual(&self, sigma: &SymbolField, t: f64) -> Result<f64> {
        if !matches!(self.state.model, ManifoldModel::FlatTorus { .. }) {
            return Err(Error::Capability("component invariance is checked on flat models only".into()));
        }
        let base = self.evaluate(sigma)?.value;
        let moved = self.state.integrate(&self.state.nodes, |fp| {
            let g = frame_flow(&self.state.model, fp, t)?;
            let w = direction(fp);
            let p = self.projection.evaluate(&fp.point, &w);
            Ok((p * sigma.evaluate(&g.point, &direction(&g))).trace())
        })?;
        Ok((moved / c(self.weight) - base).norm())
    }
}

/// Splits the tracial state along projection fields summing to the identity.
pub fn ergodic_decomposition(state: &TracialState, projections: &[SymbolField]) -> Result<Vec<ErgodicComponent>> {
    let residual = state.partition_residual(projections);
    if residual > 1e-10 {
        return Err(Error::InvalidInput(format!("projections do not sum to the identity (residual {residual:.2e})")));
    }
    projections
        .iter()
        .map(|p| {
            let weight = state.evaluate(p)?.value.re;
            if weight <= 0.0 {
                return Err(Error::InvalidInput(format!("projection {} has zero tracial weight", p.label)));
            }
            Ok(ErgodicComponent {
                projection: p.clone(),
                weight,
                state: state.clone(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_weight_one() {
        let st = TracialState::new(&ManifoldModel::round_sphere(), 8, 2).unwrap();
        let one = SymbolField::constant(CMatrix::identity(2, 2));
        assert!((st.evaluate(&one).unwrap().value - c(1.0)).norm() < 1e-12);
        let comps = ergodic_decomposition(&st, std::slice::from_ref(&one)).unwrap();
        assert!((comps[0].weight - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_projection_weights_rank_over_k() {
        let st = TracialState::new(&ManifoldModel::flat_torus(2).unwrap(), 4, 3).unwrap();
        let mut p = CMatrix::zeros(3, 3);
        p[(0, 0)] = c(1.0);
        let e = st.evaluate(&SymbolField::constant(p)).unwrap();
        assert!((e.value.re - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn incomplete_partitions_are_rejected() {
        let st = TracialState::new(&ManifoldModel::flat_torus(2).unwrap(), 4, 1).unwrap();
        let half = SymbolField::constant(CMatrix::from_element(1, 1, c(0.5)));
        assert!(ergodic_decomposition(&st, &[half]).is_err());
    }

    #[test]
    fn completed_frames_are_rotations() {
        for w in [vec![1.0, 0.0, 0.0], vec![0.0, 0.6, -0.8], vec![-1.0, 0.0]] {
            let f = frame_completing(&w);
            assert!((f.determinant() - 1.0).abs() < 1e-12);
            assert!((f.transpose() * &f - DMatrix::identity(w.len(), w.len())).amax() < 1e-12);
            assert!(f.column(0).iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-15));
        }
    }
}
