use std::fs::File;
use std::io::BufWriter;
use std::time::Instant;

use frameflow_core::algebra::build_clifford;
use frameflow_core::geometry::ManifoldModel;
use frameflow_core::limits::TracialState;
use frameflow_core::linalg::{hermitian_eigen, max_abs};
use frameflow_core::spectral::{
    build_dirac, build_laplacian, exterior_d, helicity_r, hodge_projections, sign_and_halves, write_operator_csv,
    write_spectrum_csv, Bundle, OperatorMatrix,
};
use serde::Serialize;

use crate::config::Params;
use crate::error::{CliError, CliResult};
use crate::manifest::Run;

pub const STRUCTURE_TOL: f64 = 1e-10;
pub const EXACT_TOL: f64 = 1e-12;
pub const STRUCTURE_SECONDS: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Functions,
    Forms,
    Spinors,
}

#[derive(Debug, Clone)]
pub struct Settings {
    model: ManifoldModel,
    kind: Kind,
    degrees: Vec<usize>,
    cutoff: usize,
    resolution: usize,
    write_operator: bool,
}

pub fn parse(p: &Params) -> CliResult<Settings> {
    let model = p.model("model", "torus2", &["torus2", "torus3", "sphere"])?;
    let kind = match p.choice("bundle", "forms", &["functions", "forms", "spinors"])?.as_str() {
        "functions" => Kind::Functions,
        "forms" => Kind::Forms,
        _ => Kind::Spinors,
    };
    let n = model.dim();
    let degrees = match p.choice("degree", "all", &["all", "0", "1", "2", "3"])?.as_str() {
        "all" => (0..=n).collect(),
        d => {
            let d: usize = d.parse().expect("checked digit");
            if d > n {
                return Err(CliError::usage(format!("degree: {d} exceeds the dimension {n}")));
            }
            vec![d]
        }
    };
    let max_cutoff = match model {
        ManifoldModel::FlatTorus { ref periods } if periods.len() == 3 => 12,
        _ => 64,
    };
    Ok(Settings {
        model,
        kind,
        degrees,
        cutoff: p.count("cutoff", 8, 1, max_cutoff)?,
        resolution: p.count("resolution", 6, 4, 24)?,
        write_operator: p.choice("write_operator", "false", &["true", "false"])? == "true",
    })
}

#[derive(Serialize)]
struct Summary {
    model: String,
    bundle: String,
    cutoff: usize,
    dimension: usize,
    blocks: usize,
}

fn spectrum(run: &mut Run, name: &str, lap: &OperatorMatrix) -> CliResult<Summary> {
    let values: Vec<f64> = lap.block_eigenvalues()?.into_iter().flatten().collect();
    let file = File::create(run.path(name))?;
    write_spectrum_csv(&lap.rows, &values, BufWriter::new(file))?;
    Ok(Summary {
        model: lap.rows.model_name.clone(),
        bundle: lap.rows.bundle.name(),
        cutoff: lap.rows.cutoff,
        dimension: lap.rows.dim(),
        blocks: lap.rows.block_ends().len(),
    })
}

fn operator(run: &mut Run, s: &Settings, name: &str, op: &OperatorMatrix) -> CliResult<()> {
    if s.write_operator {
        let file = File::create(run.path(name))?;
        write_operator_csv(op, BufWriter::new(file))?;
    }
    Ok(())
}

fn laplacian_oracle(run: &mut Run, lap: &OperatorMatrix) -> CliResult<()> {
    let mut worst: f64 = 0.0;
    for (mode, values) in lap.rows.modes.iter().zip(lap.block_eigenvalues()?) {
        for v in values {
            worst = worst.max((v - mode.eigenvalue).abs());
        }
    }
    run.at_most("Laplacian eigenvalues against the closed-form spectrum", worst, EXACT_TOL);
    run.at_most("Laplacian hermitian residual", lap.hermitian_residual(), EXACT_TOL);
    Ok(())
}

fn forms(s: &Settings, run: &mut Run) -> CliResult<Vec<Summary>> {
    let m = &s.model;
    let n = m.dim();
    let start = Instant::now();
    let mut summaries = Vec::new();
    for &p in &s.degrees {
        let h = hodge_projections(m, p, s.cutoff)?;
        if p < n {
            let d = exterior_d(m, p, s.cutoff)?;
            let dd = exterior_d(m, p + 1, s.cutoff)?.mul(&d)?;
            run.at_most(format!("p={p}: d squared"), dd.max_abs(), STRUCTURE_TOL);
        }
        let id = OperatorMatrix::identity(&h.laplacian.rows);
        let checks = [
            ("Laplacian minus d delta + delta d", h.assembled_laplacian.sub(&h.laplacian)?.max_abs()),
            ("P + Q + H minus identity", h.p.add(&h.q)?.add(&h.h)?.sub(&id)?.max_abs()),
            ("P squared minus P", h.p.mul(&h.p)?.sub(&h.p)?.max_abs()),
            ("Q squared minus Q", h.q.mul(&h.q)?.sub(&h.q)?.max_abs()),
            ("PQ", h.p.mul(&h.q)?.max_abs()),
            ("QP", h.q.mul(&h.p)?.max_abs()),
            ("[P, Laplacian]", h.p.commutator(&h.laplacian)?.max_abs()),
            ("[Q, Laplacian]", h.q.commutator(&h.laplacian)?.max_abs()),
        ];
        for (name, r) in checks {
            run.at_most(format!("p={p}: {name}"), r, STRUCTURE_TOL);
        }
        laplacian_oracle(run, &h.laplacian)?;
        summaries.push(spectrum(run, &format!("spectrum_p{p}.csv"), &h.laplacian)?);
        operator(run, s, &format!("laplacian_p{p}.csv"), &h.laplacian)?;
        if p == 1 && matches!(m, ManifoldModel::FlatTorus { periods } if periods.len() == 3) {
            helicity(s, run, &h.p, &h.laplacian)?;
        }
    }
    run.at_most("structural identities wall time (s)", start.elapsed().as_secs_f64(), STRUCTURE_SECONDS);
    Ok(summaries)
}

fn helicity(s: &Settings, run: &mut Run, p: &OperatorMatrix, lap: &OperatorMatrix) -> CliResult<()> {
    let r = helicity_r(&s.model, s.cutoff)?;
    run.at_most("R squared minus identity on range(P)", r.mul(&r)?.mul(p)?.sub(p)?.max_abs(), STRUCTURE_TOL);
    run.at_most("[R, P]", r.commutator(p)?.max_abs(), STRUCTURE_TOL);
    run.at_most("[R, Laplacian]", r.commutator(lap)?.max_abs(), STRUCTURE_TOL);
    let mut worst: f64 = 0.0;
    for (i, mode) in r.rows.modes.iter().enumerate() {
        if mode.eigenvalue == 0.0 {
            continue;
        }
        let block = r.block(i, i).cloned().unwrap_or_else(|| frameflow_core::linalg::CMatrix::zeros(3, 3));
        let (ev, _) = hermitian_eigen(&block);
        for (got, want) in ev.iter().zip([-1.0, 0.0, 1.0]) {
            worst = worst.max((got - want).abs());
        }
    }
    run.at_most("helicity eigenvalues against {-1, 0, 1} per shell", worst, EXACT_TOL);
    let symbol = r.symbol.clone().expect("R carries its symbol");
    let tracial = TracialState::new(&s.model, s.resolution, 3)?.evaluate(&symbol)?;
    run.at_most("tracial value of the helicity symbol", tracial.value.norm(), STRUCTURE_TOL);
    operator(run, s, "helicity.csv", &r)
}

fn spinors(s: &Settings, run: &mut Run) -> CliResult<Summary> {
    let m = &s.model;
    let (space, d) = build_dirac(m, s.cutoff)?;
    let cl = build_clifford(m.dim())?;
    let sd = sign_and_halves(&d)?;
    let (_, lap) = build_laplacian(m, Bundle::Spinors, s.cutoff, 0.0, 0.0)?;
    run.at_most("D squared minus Laplacian", d.mul(&d)?.sub(&lap)?.max_abs(), EXACT_TOL);
    run.at_most("[P+, |D|]", sd.plus.commutator(&sd.abs)?.max_abs(), EXACT_TOL);
    run.at_most("[P-, |D|]", sd.minus.commutator(&sd.abs)?.max_abs(), EXACT_TOL);
    let (mut sign_dev, mut trace_dev): (f64, f64) = (0.0, 0.0);
    for (i, mode) in space.basis.modes.iter().enumerate() {
        if mode.eigenvalue == 0.0 {
            continue;
        }
        let len = mode.eigenvalue.sqrt();
        let omega: Vec<f64> = mode.xi.iter().map(|v| v / len).collect();
        let expected = cl.clifford_mult(&omega)?;
        let got = sd.sign.block(i, i).cloned().unwrap_or_else(|| expected.map(|_| Default::default()));
        sign_dev = sign_dev.max(max_abs(&(got - expected)));
        let tr = |op: &OperatorMatrix| op.block(i, i).map_or(0.0, |b| b.trace().re);
        trace_dev = trace_dev.max((tr(&sd.plus) - tr(&sd.minus)).abs());
    }
    run.at_most("sign(D) block minus Clifford multiplication by k/|k|", sign_dev, EXACT_TOL);
    run.at_most("tr P+ minus tr P- per shell", trace_dev, EXACT_TOL);
    operator(run, s, "dirac.csv", &d)?;
    spectrum(run, "spectrum.csv", &lap)
}

pub fn execute(s: &Settings, run: &mut Run) -> CliResult<()> {
    let summaries = match s.kind {
        Kind::Functions => {
            let (_, lap) = build_laplacian(&s.model, Bundle::Functions, s.cutoff, 0.0, 0.0)?;
            laplacian_oracle(run, &lap)?;
            operator(run, s, "laplacian.csv", &lap)?;
            vec![spectrum(run, "spectrum.csv", &lap)?]
        }
        Kind::Forms => forms(s, run)?,
        Kind::Spinors => vec![spinors(s, run)?],
    };
    run.write_json("spectrum.json", &summaries)
}
