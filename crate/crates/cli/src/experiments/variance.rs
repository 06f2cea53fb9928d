use frameflow_core::geometry::ManifoldModel;
use frameflow_core::limits::{quantum_variance, VarianceReport};
use frameflow_core::linalg::c;
use frameflow_core::spectral::{
    build_laplacian, helicity_r, hodge_projections, quantize, Bundle, OperatorMatrix, SpectralModel, TorusSymbol,
};
use serde::Serialize;

use crate::config::Params;
use crate::error::CliResult;
use crate::manifest::Run;

/// Lower bound on `S(N)` for the flat-torus non-ergodicity witness.
pub const NON_ERGODIC_FLOOR: f64 = 0.1;
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Settings {
    case: String,
    cutoff: usize,
    counts: Vec<usize>,
}

pub fn parse(p: &Params) -> CliResult<Settings> {
    let case = p.choice("case", "torus", &["torus", "helicity"])?;
    let (cutoff, counts) = if case == "torus" {
        (p.count("cutoff", 32, 4, 64)?, p.count_list("counts", &[200, 800, 3000], 1, 100_000)?)
    } else {
        (p.count("cutoff", 4, 2, 8)?, p.count_list("counts", &[50, 100], 1, 100_000)?)
    };
    Ok(Settings { case, cutoff, counts })
}

#[derive(Serialize)]
struct Deviation {
    subspace: String,
    limit_re: f64,
    n: usize,
    index: usize,
    re: f64,
    im: f64,
}

fn deviations(reports: &[VarianceReport]) -> Vec<Deviation> {
    let mut out = Vec::new();
    for r in reports {
        for (index, d) in r.deviations.iter().enumerate() {
            out.push(Deviation {
                subspace: r.label.clone(),
                limit_re: r.limit_value.re,
                n: r.n,
                index,
                re: d.re,
                im: d.im,
            });
        }
    }
    out
}

pub fn execute(s: &Settings, run: &mut Run) -> CliResult<()> {
    let mut reports = Vec::new();
    if s.case == "torus" {
        let model = ManifoldModel::flat_torus(2)?;
        let (space, lap) = build_laplacian(&model, Bundle::Functions, s.cutoff, 0.0, 0.0)?;
        let a = quantize(&space, &TorusSymbol::direction_monomial(2, 1, &[2, 0]))?;
        let id = OperatorMatrix::identity(&space.basis).with_label("I");
        for &n in &s.counts {
            let r = quantum_variance(&space, &lap, &a, &id, n, c(0.5))?;
            run.at_least(format!("non-ergodic variance S({n})"), r.variance, NON_ERGODIC_FLOOR);
            run.at_most(format!("S({n}) recomputed from deviations"), (r.recompute() - r.variance).abs(), 0.0);
            reports.push(r);
        }
        let constant = id.scale(c(2.0));
        let r = quantum_variance(&space, &lap, &constant, &id, s.counts[0], c(2.0))?;
        run.at_most("variance of a multiple of the identity", r.variance, 0.0);
    } else {
        let model = ManifoldModel::flat_torus(3)?;
        let h = hodge_projections(&model, 1, s.cutoff)?;
        let r = helicity_r(&model, s.cutoff)?;
        let space = SpectralModel::new(&model, Bundle::Forms(1), s.cutoff)?;
        let id = OperatorMatrix::identity(&space.basis);
        for (sign, label) in [(1.0, "P+ helicity"), (-1.0, "P- helicity")] {
            let proj = id.add(&r.scale(c(sign)))?.mul(&h.p)?.scale(c(0.5)).with_label(label);
            for &n in &s.counts {
                let own = quantum_variance(&space, &h.laplacian, &r, &proj, n, c(sign))?;
                run.at_most(format!("{label}: S({n}) against its component value {sign}"), own.variance, EXACT_TOL);
                let tr = quantum_variance(&space, &h.laplacian, &r, &proj, n, c(0.0))?;
                run.within(format!("{label}: S({n}) against the tracial value 0"), tr.variance, 1.0 - EXACT_TOL, 1.0 + EXACT_TOL);
                reports.push(own);
                reports.push(tr);
            }
        }
    }
    run.write_csv("deviations.csv", &deviations(&reports))?;
    #[derive(Serialize)]
    struct Summary<'a> {
        label: &'a str,
        n: usize,
        variance: f64,
        limit_re: f64,
        limit_im: f64,
    }
    let summary: Vec<Summary> = reports
        .iter()
        .map(|r| Summary {
            label: &r.label,
            n: r.n,
            variance: r.variance,
            limit_re: r.limit_value.re,
            limit_im: r.limit_value.im,
        })
        .collect();
    run.write_json("variance.json", &summary)
}
