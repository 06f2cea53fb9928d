use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::{same_eigenvalue, Basis};
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, max_abs, spectral_norm, CMatrix};

pub type SymbolFn = dyn Fn(&[f64], &[f64]) -> CMatrix + Send + Sync;

/// Matrix-valued function on the unit (co)tangent bundle. The direction is a
/// unit tangent vector in chart components, identified with a covector by the
/// metric.
#[derive(Clone)]
pub struct SymbolField {
    eval: Arc<SymbolFn>,
    pub fiber_dim: usize,
    pub label: String,
}

impl fmt::Debug for SymbolField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymbolField({}, m={})", self.label, self.fiber_dim)
    }
}

impl SymbolField {
    pub fn new(label: impl Into<String>, fiber_dim: usize, eval: impl Fn(&[f64], &[f64]) -> CMatrix + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            fiber_dim,
            label: label.into(),
        }
    }

    pub fn scalar(label: impl Into<String>, f: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(label, 1, move |x, w| CMatrix::from_element(1, 1, c(f(x, w))))
    }

    pub fn constant(value: CMatrix) -> Self {
        let m = value.nrows();
        Self::new("constant", m, move |_, _| value.clone())
    }

    pub fn evaluate(&self, point: &[f64], direction: &[f64]) -> CMatrix {
        (self.eval)(point, direction)
    }

    pub fn product(&self, other: &SymbolField) -> SymbolField {
        let (a, b) = (self.clone(), other.clone());
        SymbolField::new(format!("({})·({})", self.label, other.label), self.fiber_dim, move |x, w| {
            a.evaluate(x, w) * b.evaluate(x, w)
        })
    }

    pub fn adjoint(&self) -> SymbolField {
        let a = self.clone();
        SymbolField::new(format!("({})*", self.label), self.fiber_dim, move |x, w| a.evaluate(x, w).adjoint())
    }

    /// Worst `|σ − σ*|` on the given samples.
    pub fn hermitian_residual(&self, samples: &[(Vec<f64>, Vec<f64>)]) -> f64 {
        samples
            .iter()
            .map(|(x, w)| {
                let v = self.evaluate(x, w);
                max_abs(&(&v - v.adjoint()))
            })
            .fold(0.0, f64::max)
    }
}

/// Sparse operator between truncated bases, stored as dense blocks indexed by
/// `(row mode, column mode)`.
#[derive(Clone)]
pub struct OperatorMatrix {
    pub rows: Arc<Basis>,
    pub cols: Arc<Basis>,
    blocks: BTreeMap<(usize, usize), CMatrix>,
    pub symbol: Option<SymbolField>,
    pub order: i32,
    pub label: String,
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorMatrix")
            .field("label", &self.label)
            .field("shape", &(self.rows.dim(), self.cols.dim()))
            .field("blocks", &self.blocks.len())
            .field("order", &self.order)
            .finish()
    }
}

fn same_basis(a: &Arc<Basis>, b: &Arc<Basis>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl OperatorMatrix {
    pub fn zeros(rows: Arc<Basis>, cols: Arc<Basis>, label: impl Into<String>) -> Self {
        Self {
            rows,
            cols,
            blocks: BTreeMap::new(),
            symbol: None,
            order: 0,
            label: label.into(),
        }
    }

    /// Block-diagonal operator with block `f(mode)` on each mode.
    pub fn block_diagonal(basis: &Arc<Basis>, label: impl Into<String>, f: impl Fn(usize) -> CMatrix) -> Self {
        let mut out = Self::zeros(basis.clone(), basis.clone(), label);
        for (i, m) in basis.modes.iter().enumerate() {
            let b = f(i);
            debug_assert_eq!(b.shape(), (m.fiber_dim, m.fiber_dim));
            out.set_block(i, i, b);
        }
        out
    }

    pub fn identity(basis: &Arc<Basis>) -> Self {
        let mut out = Self::block_diagonal(basis, "I", |i| {
            let d = basis.modes[i].fiber_dim;
            CMatrix::identity(d, d)
        });
        out.symbol = Some(SymbolField::constant(CMatrix::identity(basis.fiber_labels.len(), basis.fiber_labels.len())));
        out
    }

    pub fn with_symbol(mut self, symbol: SymbolField, order: i32) -> Self {
        self.symbol = Some(symbol);
        self.order = order;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Stores a block, dropping it if it is exactly zero.
    pub fn set_block(&mut self, r: usize, c: usize, block: CMatrix) {
        if block.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            self.blocks.remove(&(r, c));
        } else {
            self.blocks.insert((r, c), block);
        }
    }

    pub fn add_to_block(&mut self, r: usize, c: usize, block: CMatrix) {
        let sum = match self.blocks.remove(&(r, c)) {
            Some(b) => b + block,
            None => block,
        };
        self.set_block(r, c, sum);
    }

    pub fn block(&self, r: usize, c: usize) -> Option<&CMatrix> {
        self.blocks.get(&(r, c))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &CMatrix)> {
        self.blocks.iter()
    }

    pub fn is_block_diagonal(&self) -> bool {
        self.blocks.keys().all(|(r, c)| r == c)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.dim(), self.cols.dim())
    }

    fn check_same(&self, other: &OperatorMatrix) -> Result<()> {
        if !same_basis(&self.rows, &other.rows) || !same_basis(&self.cols, &other.cols) {
            return Err(Error::BasisMismatch(format!("{} and {} act between different bases", self.label, other.label)));
        }
        Ok(())
    }

    /// `self · other`.
    pub fn mul(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if !same_basis(&self.cols, &other.rows) {
            return Err(Error::BasisMismatch(format!(
                "cannot compose {} ({} cutoff {}) with {} ({} cutoff {})",
                self.label, self.cols.bundle.name(), self.cols.cutoff, other.label, other.rows.bundle.name(), other.rows.cutoff
            )));
        }
        let mut out = Self::zeros(self.rows.clone(), other.cols.clone(), format!("{}·{}", self.label, other.label));
        let mut acc: BTreeMap<(usize, usize), CMatrix> = BTreeMap::new();
        for (&(i, k), a) in &self.blocks {
            for (&(_, j), b) in other.blocks.range((k, 0)..(k + 1, 0)) {
                let p = a * b;
                acc.entry((i, j)).and_modify(|x| *x += &p).or_insert(p);
            }
        }
        for ((i, j), b) in acc {
            out.set_block(i, j, b);
        }
        out.order = self.order + other.order;
        if let (Some(s), Some(t)) = (&self.symbol, &other.symbol) {
            if s.fiber_dim == t.fiber_dim {
                out.symbol = Some(s.product(t));
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.check_same(other)?;
        let mut out = self.clone();
        out.symbol = None;
        out.label = format!("{}+{}", self.label, other.label);
        for (&(r, c), b) in &other.blocks {
            out.add_to_block(r, c, b.clone());
        }
        out.order = self.order.max(other.order);
        Ok(out)
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.add(&other.scale(c(-1.0)))
    }

    pub fn scale(&self, s: Complex64) -> OperatorMatrix {
        let mut out = Self::zeros(self.rows.clone(), self.cols.clone(), self.label.clone());
        for (&(r, col), b) in &self.blocks {
            out.set_block(r, col, b * s);
        }
        out.order = self.order;
        out
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        let mut out = Self::zeros(self.cols.clone(), self.rows.clone(), format!("({})*", self.label));
        for (&(r, c), b) in &self.blocks {
            out.set_block(c, r, b.adjoint());
        }
        out.order = self.order;
        out.symbol = self.symbol.as_ref().map(|s| s.adjoint());
        out
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.rows.dim(), self.cols.dim());
        for (&(r, c), b) in &self.blocks {
            let (r0, c0) = (self.rows.offset(r), self.cols.offset(c));
            m.view_mut((r0, c0), b.shape()).copy_from(b);
        }
        m
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.blocks.values().map(max_abs).fold(0.0, f64::max)
    }

    /// Keeps only blocks whose row and column modes are both in `modes`.
    pub fn compress(&self, modes: &[usize]) -> OperatorMatrix {
        let keep: std::collections::BTreeSet<usize> = modes.iter().copied().collect();
        let mut out = Self::zeros(self.rows.clone(), self.cols.clone(), format!("Π{}Π", self.label));
        for (&(r, c), b) in &self.blocks {
            if keep.contains(&r) && keep.contains(&c) {
                out.set_block(r, c, b.clone());
            }
        }
        out.order = self.order;
        out
    }

    /// Spectral norm, computed exactly on each connected component of the
    /// block sparsity graph.
    pub fn norm(&self) -> f64 {
        let nr = self.rows.modes.len();
        let mut parent: Vec<usize> = (0..nr + self.cols.modes.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(r, c) in self.blocks.keys() {
            let (a, b) = (find(&mut parent, r), find(&mut parent, nr + c));
            if a != b {
                parent[a] = b;
            }
        }
        let mut comps: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for &(r, c) in self.blocks.keys() {
            let root = find(&mut parent, r);
            let e = comps.entry(root).or_default();
            e.0.push(r);
            e.1.push(c);
        }
        let mut worst: f64 = 0.0;
        for (_, (mut rs, mut cs)) in comps {
            rs.sort_unstable();
            rs.dedup();
            cs.sort_unstable();
            cs.dedup();
            let roff = offsets(&self.rows, &rs);
            let coff = offsets(&self.cols, &cs);
            let mut m = CMatrix::zeros(*roff.last().unwrap(), *coff.last().unwrap());
            for (ri, &r) in rs.iter().enumerate() {
                for (ci, &c) in cs.iter().enumerate() {
                    if let Some(b) = self.blocks.get(&(r, c)) {
                        m.view_mut((roff[ri], coff[ci]), b.shape()).copy_from(b);
                    }
                }
            }
            worst = worst.max(spectral_norm(&m));
        }
        worst
    }

    /// Diagonal entries in the flat basis order.
    pub fn diagonal(&self) -> Vec<Complex64> {
        let mut out = vec![c(0.0); self.rows.dim().min(self.cols.dim())];
        for (i, m) in self.rows.modes.iter().enumerate() {
            if let Some(b) = self.blocks.get(&(i, i)) {
                for f in 0..m.fiber_dim {
                    out[self.rows.offset(i) + f] = b[(f, f)];
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        self.diagonal().iter().sum()
    }

    /// `‖A − A*‖` as the largest entry modulus.
    pub fn hermitian_residual(&self) -> f64 {
        match self.sub(&self.adjoint()) {
            Ok(d) => d.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    /// `f(A)` for Hermitian `A`: blockwise when `A` is block diagonal, densely
    /// otherwise.
    pub fn hermitian_function(&self, label: impl Into<String>, f: impl Fn(f64) -> Complex64) -> Result<OperatorMatrix> {
        self.check_square()?;
        let mut out = Self::zeros(self.rows.clone(), self.cols.clone(), label);
        if self.is_block_diagonal() {
            for i in 0..self.rows.modes.len() {
                let d = self.rows.modes[i].fiber_dim;
                let b = self.blocks.get(&(i, i)).cloned().unwrap_or_else(|| CMatrix::zeros(d, d));
                out.set_block(i, i, crate::linalg::hermitian_function(&b, &f));
            }
            return Ok(out);
        }
        let dense = crate::linalg::hermitian_function(&self.to_dense(), f);
        out.fill_from_dense(&dense);
        Ok(out)
    }

    fn check_square(&self) -> Result<()> {
        if !same_basis(&self.rows, &self.cols) {
            return Err(Error::BasisMismatch(format!("{} is not an endomorphism", self.label)));
        }
        Ok(())
    }

    pub(crate) fn fill_from_dense(&mut self, dense: &CMatrix) {
        self.blocks.clear();
        for (i, mi) in self.rows.modes.iter().enumerate() {
            for (j, mj) in self.cols.modes.iter().enumerate() {
                let b = dense.view((self.rows.offset(i), self.cols.offset(j)), (mi.fiber_dim, mj.fiber_dim)).into_owned();
                if max_abs(&b) > 0.0 {
                    self.blocks.insert((i, j), b);
                }
            }
        }
    }

    /// Eigenvalues of a Hermitian block-diagonal operator, grouped by mode.
    pub fn block_eigenvalues(&self) -> Result<Vec<Vec<f64>>> {
        if !self.is_block_diagonal() {
            return Err(Error::InvalidInput(format!("{} is not block diagonal", self.label)));
        }
        Ok((0..self.rows.modes.len())
            .map(|i| {
                let d = self.rows.modes[i].fiber_dim;
                let b = self.blocks.get(&(i, i)).cloned().unwrap_or_else(|| CMatrix::zeros(d, d));
                hermitian_eigen(&b).0
            })
            .collect())
    }

    /// Moore–Penrose inverse of a Hermitian block-diagonal operator, with the
    /// kernel cut at `PSEUDO_INVERSE_TOL · λ_max`.
    pub fn pseudo_inverse_with(&self, label: impl Into<String>, f: impl Fn(f64) -> f64) -> Result<OperatorMatrix> {
        let lmax = self.block_eigenvalues()?.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let cut = super::PSEUDO_INVERSE_TOL * lmax;
        self.hermitian_function(label, |v| if v.abs() <= cut { c(0.0) } else { c(f(v)) })
    }

    /// Re-expresses the operator on another basis by matching mode labels;
    /// blocks whose modes are missing from the target are dropped.
    pub fn restrict_to(&self, rows: &Arc<Basis>, cols: &Arc<Basis>) -> Result<OperatorMatrix> {
        let mut out = Self::zeros(rows.clone(), cols.clone(), self.label.clone());
        for (&(r, c), b) in &self.blocks {
            let (Some(nr), Some(nc)) = (rows.mode_index(&self.rows.modes[r].label), cols.mode_index(&self.cols.modes[c].label)) else {
                continue;
            };
            if rows.modes[nr].fiber_dim != b.nrows() || cols.modes[nc].fiber_dim != b.ncols() {
                return Err(Error::BasisMismatch("fiber dimensions differ between bases".into()));
            }
            out.set_block(nr, nc, b.clone());
        }
        out.symbol = self.symbol.clone();
        out.order = self.order;
        Ok(out)
    }

    /// Degeneracy clusters of the row basis as lists of mode indices.
    pub fn clusters(basis: &Basis) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (i, m) in basis.modes.iter().enumerate() {
            match out.last_mut() {
                Some(cl) if same_eigenvalue(basis.modes[cl[0]].eigenvalue, m.eigenvalue) => cl.push(i),
                _ => out.push(vec![i]),
            }
        }
        out
    }
}

fn offsets(basis: &Basis, modes: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(modes.len() + 1);
    let mut acc = 0;
    for &m in modes {
        out.push(acc);
        acc += basis.modes[m].fiber_dim;
    }
    out.push(acc);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ManifoldModel;
    use crate::spectral::{build_basis, Bundle};

    fn basis() -> Arc<Basis> {
        Arc::new(build_basis(&ManifoldModel::flat_torus(2).unwrap(), Bundle::Forms(1), 2).unwrap())
    }

    #[test]
    fn product_and_dense_agree() {
        let b = basis();
        let n = b.modes.len();
        let mut a = OperatorMatrix::zeros(b.clone(), b.clone(), "a");
        let mut m = OperatorMatrix::zeros(b.clone(), b.clone(), "m");
        for i in 0..n {
            a.set_block(i, (i * 7 + 3) % n, CMatrix::from_fn(2, 2, |r, c| Complex64::new((r + i) as f64, c as f64)));
            m.set_block((i * 5) % n, i, CMatrix::from_fn(2, 2, |r, c| Complex64::new(1.0, (r * c + i) as f64)));
        }
        let p = a.mul(&m).unwrap();
        assert!(max_abs(&(p.to_dense() - a.to_dense() * m.to_dense())) < 1e-12);
        assert!((a.norm() - spectral_norm(&a.to_dense())).abs() < 1e-10);
        assert!(max_abs(&(a.adjoint().to_dense() - a.to_dense().adjoint())) == 0.0);
    }

    #[test]
    fn mismatched_bases_are_rejected() {
        let b = basis();
        let other = Arc::new(build_basis(&ManifoldModel::flat_torus(2).unwrap(), Bundle::Forms(1), 3).unwrap());
        let a = OperatorMatrix::identity(&b);
        let o = OperatorMatrix::identity(&other);
        assert!(matches!(a.mul(&o), Err(Error::BasisMismatch(_))));
    }
}
