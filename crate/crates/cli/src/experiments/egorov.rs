use frameflow_core::geometry::ManifoldModel;
use frameflow_core::limits::{egorov_residual, egorov_table, negative_order_decay, DecayTable};
use frameflow_core::linalg::c;
use frameflow_core::spectral::{build_laplacian, quantize, Bundle, TorusSymbol};
use serde::Serialize;

use crate::config::Params;
use crate::error::{CliError, CliResult};
use crate::manifest::Run;

pub const RATIO_LOW: f64 = 0.3;
pub const RATIO_HIGH: f64 = 0.7;
pub const ORACLE_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct Settings {
    cutoff: usize,
    t: f64,
    frequency: Vec<i64>,
    shells: Vec<f64>,
    decay_shells: Vec<f64>,
}

pub fn parse(p: &Params) -> CliResult<Settings> {
    p.choice("model", "torus2", &["torus2"])?;
    let cutoff = p.count("cutoff", 64, 4, 128)?;
    let max_shell = cutoff as f64 / 2.0;
    let shells = p.real_list("shells", &[8.0, 16.0, 32.0], 1.0, max_shell)?;
    let decay_shells = p.real_list("decay_shells", &[4.0, 8.0, 16.0, 32.0], 1.0, max_shell)?;
    let q = p.count_list("frequency", &[1, 0], 0, 8)?;
    if q.len() != 2 || q.iter().all(|&v| v == 0) {
        return Err(CliError::usage("frequency: need two entries, not both zero"));
    }
    Ok(Settings {
        cutoff,
        t: p.real("t", 1.0, -10.0, 10.0)?,
        frequency: q.into_iter().map(|v| v as i64).collect(),
        shells,
        decay_shells,
    })
}

#[derive(Serialize)]
struct Row {
    table: &'static str,
    lambda: f64,
    shell_modes: usize,
    shell_norm: f64,
    diagonal_max: Option<f64>,
    ratio: Option<f64>,
}

fn rows(label: &'static str, t: &DecayTable) -> Vec<Row> {
    t.rows
        .iter()
        .map(|r| Row {
            table: label,
            lambda: r.lambda,
            shell_modes: r.shell_modes,
            shell_norm: r.shell_norm,
            diagonal_max: r.diagonal_max,
            ratio: r.ratio,
        })
        .collect()
}

#[derive(Serialize)]
struct Report {
    symbol: String,
    t: f64,
    egorov: DecayTable,
    egorov_at_zero: Vec<f64>,
    negative_order: DecayTable,
    resolvent: DecayTable,
}

fn ratio_checks(run: &mut Run, what: &str, table: &DecayTable, min_lambda: f64) {
    for r in &table.rows {
        if let Some(ratio) = r.ratio {
            if r.lambda / 2.0 >= min_lambda {
                run.within(format!("{what} ratio at {} / {}", r.lambda, r.lambda / 2.0), ratio, RATIO_LOW, RATIO_HIGH);
            }
        }
    }
}

pub fn execute(s: &Settings, run: &mut Run) -> CliResult<()> {
    let model = ManifoldModel::flat_torus(2)?;
    let (space, lap) = build_laplacian(&model, Bundle::Functions, s.cutoff, 0.0, 0.0)?;
    let a = TorusSymbol::cosine(2, 1, &s.frequency);

    let at_zero: Vec<f64> = s.shells.iter().map(|&l| egorov_residual(&space, &a, 0.0, l)).collect::<Result<_, _>>()?;
    run.at_most("Egorov residual at t = 0", at_zero.iter().cloned().fold(0.0, f64::max), 0.0);
    let egorov = egorov_table(&space, &a, s.t, &s.shells)?;
    ratio_checks(run, "Egorov", &egorov, 4.0);

    let resolvent = lap.hermitian_function("(Laplacian+1)^-1/2", |v| c(1.0 / (v + 1.0).sqrt()))?;
    let res_table = negative_order_decay(&space, &resolvent, &s.decay_shells)?;
    let mut oracle: f64 = 0.0;
    for r in &res_table.rows {
        // the smallest eigenvalue in the shell is the smallest lattice norm ≥ Λ
        let lam2 = (r.lambda * r.lambda).ceil();
        let smallest = (lam2 as usize..)
            .find(|&v| (0..=v.isqrt()).any(|x| (v - x * x).isqrt().pow(2) == v - x * x))
            .expect("every interval contains a sum of two squares eventually") as f64;
        oracle = oracle.max((r.diagonal_max.expect("negative-order rows carry diagonals") - 1.0 / (smallest + 1.0).sqrt()).abs());
    }
    run.at_most("resolvent shell maxima against (lambda + 1)^-1/2", oracle, ORACLE_TOL);

    let op = quantize(&space, &a)?.mul(&resolvent)?;
    let decay = negative_order_decay(&space, &op, &s.decay_shells)?;
    ratio_checks(run, "negative-order", &decay, 4.0);

    let mut all = rows("egorov", &egorov);
    all.extend(rows("negative_order", &decay));
    all.extend(rows("resolvent", &res_table));
    run.write_csv("shells.csv", &all)?;
    run.write_json(
        "egorov.json",
        &Report {
            symbol: a.label.clone(),
            t: s.t,
            egorov,
            egorov_at_zero: at_zero,
            negative_order: decay,
            resolvent: res_table,
        },
    )
}
