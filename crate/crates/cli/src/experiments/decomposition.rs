use frameflow_core::algebra::{exterior_rep, isotypic_projections, restrict_to_stabilizer};
use frameflow_core::geometry::ManifoldModel;
use frameflow_core::limits::{ergodic_decomposition, projection_field, TracialState};
use frameflow_core::linalg::{c, CMatrix};
use frameflow_core::num_complex::Complex64;
use frameflow_core::spectral::{build_dirac, helicity_r, SymbolField, TorusSymbol};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Params;
use crate::error::CliResult;
use crate::manifest::Run;

pub const DECOMPOSITION_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Settings {
    case: String,
    dim: usize,
    resolution: usize,
    samples: usize,
    times: Vec<f64>,
}

pub fn parse(p: &Params) -> CliResult<Settings> {
    let case = p.choice("case", "forms", &["forms", "dirac"])?;
    let dim = if case == "forms" { 3 } else { p.count("dim", 2, 2, 3)? };
    Ok(Settings {
        case,
        dim,
        resolution: p.count("resolution", 4, 4, 12)?,
        samples: p.count("samples", 10, 1, 200)?,
        times: p.real_list("times", &[0.1, 1.0, 5.0], -100.0, 100.0)?,
    })
}

#[derive(Serialize)]
struct Component {
    label: String,
    weight: f64,
    expected_weight: f64,
    value_on_identity: f64,
    value_on_probe: Option<f64>,
}

#[derive(Serialize)]
struct Report {
    case: String,
    model: String,
    fiber_dim: usize,
    probe: Option<String>,
    components: Vec<Component>,
}

fn random_symbol(dim: usize, k: usize, rng: &mut ChaCha8Rng) -> SymbolField {
    let mut a = TorusSymbol::zero(dim, k);
    for _ in 0..3 {
        let q = (0..dim).map(|_| rng.random_range(-1..=1)).collect();
        let e = (0..dim).map(|i| if i < 2 { rng.random_range(0..=2) } else { 0 }).collect();
        let m = CMatrix::from_fn(k, k, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        a = a.add_term(q, e, m);
    }
    a.to_symbol_field()
}

pub fn execute(s: &Settings, run: &mut Run) -> CliResult<()> {
    let model = ManifoldModel::flat_torus(s.dim)?;
    let (projections, probe, expected): (Vec<SymbolField>, Option<SymbolField>, Vec<f64>) = if s.case == "forms" {
        let rep = restrict_to_stabilizer(&exterior_rep(3, 1)?)?;
        let comps = isotypic_projections(&rep)?;
        let fields = comps
            .iter()
            .map(|p| projection_field(&rep, &p.projector, format!("weight line {}", p.label)))
            .collect::<Result<Vec<_>, _>>()?;
        let expected = comps.iter().map(|p| p.dimension as f64 / 3.0).collect();
        (fields, helicity_r(&model, 1)?.symbol, expected)
    } else {
        let (_, d) = build_dirac(&model, 1)?;
        let gamma = d.symbol.clone().expect("D carries its symbol");
        let k = gamma.fiber_dim;
        let half = |sign: f64, label: &str| {
            let g = gamma.clone();
            SymbolField::new(label, k, move |x, w| (CMatrix::identity(k, k) + g.evaluate(x, w) * c(sign)) * c(0.5))
        };
        (vec![half(1.0, "p+"), half(-1.0, "p-")], Some(gamma), vec![0.5, 0.5])
    };
    let probe_values: Vec<f64> = if s.case == "forms" { vec![-1.0, 0.0, 1.0] } else { vec![-1.0, 1.0] };
    let k = projections[0].fiber_dim;
    let state = TracialState::new(&model, s.resolution, k)?;
    run.at_most("sum of projections minus identity", state.partition_residual(&projections), DECOMPOSITION_TOL);
    let comps = ergodic_decomposition(&state, &projections)?;
    let one = SymbolField::constant(CMatrix::identity(k, k));
    let mut components = Vec::new();
    for (cmp, want) in comps.iter().zip(&expected) {
        run.at_most(format!("{}: weight minus rank/k", cmp.projection.label), (cmp.weight - want).abs(), DECOMPOSITION_TOL);
        let on_one = cmp.evaluate(&one)?.value;
        run.at_most(format!("{}: |omega_i(I) - 1|", cmp.projection.label), (on_one - c(1.0)).norm(), DECOMPOSITION_TOL);
        components.push(Component {
            label: cmp.projection.label.clone(),
            weight: cmp.weight,
            expected_weight: *want,
            value_on_identity: on_one.re,
            value_on_probe: probe.as_ref().map(|p| cmp.evaluate(p).map(|e| e.value.re)).transpose()?,
        });
    }
    if let Some(p) = &probe {
        run.at_most(format!("tracial value of {}", p.label), state.evaluate(p)?.value.norm(), DECOMPOSITION_TOL);
        let mut values: Vec<f64> = components.iter().filter_map(|c| c.value_on_probe).collect();
        values.sort_by(f64::total_cmp);
        let dev = values.iter().zip(&probe_values).map(|(v, w)| (v - w).abs()).fold(0.0, f64::max);
        run.at_most(format!("component values of {} against {probe_values:?}", p.label), dev, DECOMPOSITION_TOL);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let (mut consistency, mut invariance): (f64, f64) = (0.0, 0.0);
    for _ in 0..s.samples {
        let sigma = random_symbol(s.dim, k, &mut rng);
        let total = state.evaluate(&sigma)?.value;
        let mut recombined = c(0.0);
        for cmp in &comps {
            recombined += cmp.evaluate(&sigma)?.value * cmp.weight;
            for &t in &s.times {
                invariance = invariance.max(cmp.flow_invariance_residual(&sigma, t)?);
            }
        }
        consistency = consistency.max((total - recombined).norm());
    }
    run.at_most("sum of weighted components minus the tracial state", consistency, DECOMPOSITION_TOL);
    run.at_most("component invariance under the flow", invariance, DECOMPOSITION_TOL);

    run.write_json(
        "decomposition.json",
        &Report {
            case: s.case.clone(),
            model: model.name(),
            fiber_dim: k,
            probe: probe.map(|p| p.label),
            components,
        },
    )
}
