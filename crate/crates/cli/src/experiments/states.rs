use frameflow_core::geometry::ManifoldModel;
use frameflow_core::limits::{
    cesaro_state, compare_states, eigen_state, heat_state, ComparisonReport, TracialState, MONOTONE_FLOOR,
};
use frameflow_core::linalg::{c, CMatrix};
use frameflow_core::num_complex::Complex64;
use frameflow_core::spectral::{
    build_laplacian, quantize, sphere_multiply_z, sphere_multiply_z_squared, Bundle, OperatorMatrix, SpectralModel,
    SymbolField, TorusSymbol,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Params;
use crate::error::{CliError, CliResult};
use crate::manifest::Run;

pub const NORMALIZATION_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;
pub const FINAL_GAP: f64 = 2e-2;
pub const HEAT_CESARO_GAP: f64 = 2e-2;
pub const DOUBLING_RATIO: f64 = 0.7;
pub const SYMMETRY_TOL: f64 = 1e-12;
const POSITIVITY_SAMPLES: usize = 50;

#[derive(Debug, Clone)]
pub struct Settings {
    model: ManifoldModel,
    observable: String,
    cutoff: usize,
    ladder: Vec<usize>,
    t_ladder: Vec<f64>,
    resolution: usize,
}

pub fn parse(p: &Params) -> CliResult<Settings> {
    let model = p.model("model", "sphere", &["sphere", "torus2"])?;
    let observable = match model {
        ManifoldModel::RoundSphere2 => p.choice("observable", "z2", &["z2"])?,
        _ => p.choice("observable", "direction", &["direction", "cos"])?,
    };
    let cutoff = p.count("cutoff", 32, 2, 64)?;
    let ladder = p.count_list("ladder", &[8, 16, 32], 1, 64)?;
    if ladder.windows(2).any(|w| w[1] <= w[0]) || ladder.iter().any(|&l| l > cutoff) {
        return Err(CliError::usage("ladder: must increase and stay at or below the cutoff"));
    }
    let t_ladder = p.real_list("t_ladder", &[0.2, 0.1, 0.05], 1e-4, 100.0)?;
    if t_ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::usage("t_ladder: must decrease"));
    }
    Ok(Settings {
        model,
        observable,
        cutoff,
        ladder,
        t_ladder,
        resolution: p.count("resolution", 12, 4, 48)?,
    })
}

/// Number of basis vectors with `√λ ≤ r` (with `l ≤ r` on the sphere).
fn ladder_size(space: &SpectralModel, r: usize) -> usize {
    let limit = match space.model {
        ManifoldModel::RoundSphere2 => (r * (r + 1)) as f64,
        _ => (r * r) as f64,
    };
    space.basis.modes.iter().filter(|m| m.eigenvalue <= limit * (1.0 + 1e-12)).map(|m| m.fiber_dim).sum()
}

fn random_observables(space: &SpectralModel, seed: u64) -> CliResult<Vec<OperatorMatrix>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = |rng: &mut ChaCha8Rng| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let mut out = Vec::with_capacity(POSITIVITY_SAMPLES);
    match space.model {
        ManifoldModel::RoundSphere2 => {
            let id = OperatorMatrix::identity(&space.basis);
            let zz = sphere_multiply_z(space)?;
            let z2 = sphere_multiply_z_squared(space)?;
            for _ in 0..POSITIVITY_SAMPLES {
                out.push(id.scale(z(&mut rng)).add(&zz.scale(z(&mut rng)))?.add(&z2.scale(z(&mut rng)))?);
            }
        }
        _ => {
            for _ in 0..POSITIVITY_SAMPLES {
                let mut a = TorusSymbol::zero(space.model.dim(), 1);
                for _ in 0..4 {
                    let q = (0..space.model.dim()).map(|_| rng.random_range(-2..=2)).collect();
                    let e = (0..space.model.dim()).map(|_| rng.random_range(0..=2)).collect();
                    a = a.add_term(q, e, CMatrix::from_element(1, 1, z(&mut rng)));
                }
                out.push(quantize(space, &a)?);
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct LadderCsv {
    state: &'static str,
    parameter: f64,
    value_re: f64,
    value_im: f64,
    error: f64,
    reliable: bool,
    gap_to_tracial: f64,
}

#[derive(Serialize)]
struct StatesReport<'a> {
    model: String,
    cutoff: usize,
    ladder: &'a [usize],
    comparison: &'a ComparisonReport,
    limit: f64,
    truncated_product_errors: Vec<f64>,
}

pub fn execute(s: &Settings, run: &mut Run) -> CliResult<()> {
    let (space, lap) = build_laplacian(&s.model, Bundle::Functions, s.cutoff, 0.0, 0.0)?;
    let (a, limit) = match s.observable.as_str() {
        "z2" => (sphere_multiply_z_squared(&space)?, 1.0 / 3.0),
        "direction" => (quantize(&space, &TorusSymbol::direction_monomial(2, 1, &[2, 0]))?, 0.5),
        _ => (quantize(&space, &TorusSymbol::cosine(2, 1, &[1, 0]))?, 0.0),
    };
    let tracial = TracialState::new(&s.model, s.resolution, 1)?;

    let id = OperatorMatrix::identity(&space.basis);
    let one = tracial.evaluate(&SymbolField::constant(CMatrix::identity(1, 1)))?.value;
    let mut states = vec![eigen_state(&space, space.dim() / 2)?, cesaro_state(&space, space.dim() / 3)?];
    for &t in &s.t_ladder {
        states.push(heat_state(&space, &lap, t)?);
    }
    let mut norm_dev = (one - c(1.0)).norm();
    let mut positivity = f64::INFINITY;
    let samples = random_observables(&space, run.seed)?;
    for st in &states {
        norm_dev = norm_dev.max((st.evaluate(&id)?.value - c(1.0)).norm());
        positivity = positivity.min(st.positivity_minimum(&samples)?);
    }
    run.at_most("state normalization |omega(I) - 1|", norm_dev, NORMALIZATION_TOL);
    run.at_least("positivity min omega(A*A)", positivity, -POSITIVITY_TOL);

    let sizes: Vec<usize> = s.ladder.iter().map(|&r| ladder_size(&space, r)).collect();
    let rep = compare_states(&space, &lap, &a, &tracial, &sizes, &s.t_ladder)?;
    run.at_most("tracial value against the closed form", (rep.tracial.value - c(limit)).norm(), 1e-10);
    let errors: Vec<f64> = rep.cesaro.iter().map(|r| (r.value - c(limit)).norm()).collect();
    let last = *errors.last().expect("nonempty ladder");
    if s.observable == "cos" {
        let worst = rep.cesaro.iter().chain(&rep.heat).map(|r| r.value.norm()).fold(rep.tracial.value.norm(), f64::max);
        run.at_most("all states vanish on cos x1", worst, SYMMETRY_TOL);
    } else {
        for (i, w) in errors.windows(2).enumerate() {
            let ratio = if w[1] <= MONOTONE_FLOOR { 0.0 } else { w[1] / w[0] };
            run.at_most(format!("Cesaro error ratio {} -> {} (0 at the floor)", s.ladder[i], s.ladder[i + 1]), ratio, DOUBLING_RATIO);
        }
        run.at_most("final Cesaro error", last, FINAL_GAP);
    }
    let unreliable = rep.heat.iter().filter(|r| !r.reliable).count();
    run.report("heat rows flagged as truncation dominated", unreliable as f64, None, Some(0.0));
    run.at_most("heat against Cesaro on the valid t range", rep.cesaro_heat_gap, HEAT_CESARO_GAP);
    run.at_most("Cesaro gaps shrink (0 = yes)", if rep.cesaro_monotone { 0.0 } else { 1.0 }, 0.0);
    run.at_most("heat gaps shrink (0 = yes)", if rep.heat_monotone { 0.0 } else { 1.0 }, 0.0);

    // z computed without the l = L + 1 shell loses mass on the top shell
    let mut truncated = Vec::new();
    if s.observable == "z2" {
        for &l in &s.ladder {
            let (sp, _) = build_laplacian(&s.model, Bundle::Functions, l, 0.0, 0.0)?;
            let z = sphere_multiply_z(&sp)?;
            let zz = z.mul(&z)?;
            truncated.push((cesaro_state(&sp, sp.dim())?.evaluate(&zz)?.value - c(limit)).norm());
        }
        for (i, w) in truncated.windows(2).enumerate() {
            run.report(
                format!("truncated z_L z_L error ratio {} -> {}", s.ladder[i], s.ladder[i + 1]),
                w[1] / w[0],
                None,
                Some(DOUBLING_RATIO),
            );
        }
    }

    let mut rows = Vec::new();
    for (label, ladder) in [("cesaro", &rep.cesaro), ("heat", &rep.heat)] {
        for r in ladder {
            rows.push(LadderCsv {
                state: label,
                parameter: r.parameter,
                value_re: r.value.re,
                value_im: r.value.im,
                error: r.error,
                reliable: r.reliable,
                gap_to_tracial: r.gap_to_tracial,
            });
        }
    }
    run.write_csv("ladder.csv", &rows)?;
    run.write_json(
        "states.json",
        &StatesReport {
            model: s.model.name(),
            cutoff: s.cutoff,
            ladder: &s.ladder,
            comparison: &rep,
            limit,
            truncated_product_errors: truncated,
        },
    )
}
