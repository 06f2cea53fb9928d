use std::io::Write;

use serde::{Deserialize, Serialize};

use super::operator::OperatorMatrix;
use super::Basis;
use crate::error::{Error, Result};

/// JSON header written alongside an operator payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorHeader {
    pub label: String,
    pub model: String,
    pub bundle: String,
    pub cutoff: usize,
    pub rows: usize,
    pub cols: usize,
    pub order: i32,
    pub ordering: String,
    pub nonzero_blocks: usize,
}

impl OperatorHeader {
    pub fn of(op: &OperatorMatrix) -> Self {
        Self {
            label: op.label.clone(),
            model: op.rows.model_name.clone(),
            bundle: op.rows.bundle.name(),
            cutoff: op.rows.cutoff,
            rows: op.rows.dim(),
            cols: op.cols.dim(),
            order: op.order,
            ordering: "ascending eigenvalue, then mode label".into(),
            nonzero_blocks: op.blocks().count(),
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv output failed: {e}"))
}

/// Nonzero entries as CSV rows `row, col, re, im`.
pub fn write_operator_csv<W: Write>(op: &OperatorMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row", "col", "re", "im"]).map_err(csv_err)?;
    for (&(r, c), b) in op.blocks() {
        let (r0, c0) = (op.rows.offset(r), op.cols.offset(c));
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                let z = b[(i, j)];
                if z.norm() > 0.0 {
                    w.write_record([(r0 + i).to_string(), (c0 + j).to_string(), format!("{:.17e}", z.re), format!("{:.17e}", z.im)])
                        .map_err(csv_err)?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Spectrum as CSV rows `index, eigenvalue, mode, component`.
pub fn write_spectrum_csv<W: Write>(basis: &Basis, eigenvalues: &[f64], out: W) -> Result<()> {
    if eigenvalues.len() != basis.dim() {
        return Err(Error::InvalidInput("one eigenvalue per basis vector is required".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "eigenvalue", "mode", "component"]).map_err(csv_err)?;
    for (idx, ev) in eigenvalues.iter().enumerate() {
        let (mode, comp) = basis.locate(idx);
        let label = basis.modes[mode].label.to_string();
        let comp_label = basis.fiber_labels.get(comp).cloned().unwrap_or_else(|| comp.to_string());
        w.write_record([idx.to_string(), format!("{ev:.17e}"), label, comp_label]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(e.to_string()))
}
