use frameflow_core::algebra::branching_report;

use crate::config::Params;
use crate::error::CliResult;
use crate::manifest::Run;

pub const PROJECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Settings {
    n: usize,
    p: usize,
}

pub fn parse(p: &Params) -> CliResult<Settings> {
    let n = p.count("n", 4, 2, 6)?;
    Ok(Settings { n, p: p.count("p", 2, 0, n)? })
}

pub fn execute(s: &Settings, run: &mut Run) -> CliResult<()> {
    let report = branching_report(s.n, s.p)?;
    run.at_most("sum of isotypic projections minus identity", report.sum_residual, PROJECTION_TOL);
    let commutant = report.components.iter().map(|c| c.commutant_residual).fold(0.0, f64::max);
    run.at_most("projection commutant residual", commutant, PROJECTION_TOL);
    run.at_most("rank split against C(n-1,p) + C(n-1,p-1)", report.split_residual, PROJECTION_TOL);
    let total: usize = report.ranks().iter().sum();
    run.within("total rank minus degree", total as f64 - report.degree as f64, 0.0, 0.0);
    run.write_json("branching.json", &report)
}
