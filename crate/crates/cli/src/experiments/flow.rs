use frameflow_core::algebra::group::random_rotation;
use frameflow_core::flows::{
    birkhoff_average, birkhoff_average_many, frame_flow, random_frame_points, right_action, trajectory,
    write_trajectory_csv, FlowObservable,
};
use frameflow_core::geometry::hyperbolic::disk_distance;
use frameflow_core::geometry::{FramePoint, ManifoldModel};
use frameflow_core::nalgebra::DMatrix;
use frameflow_core::num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Params;
use crate::error::CliResult;
use crate::manifest::Run;

pub const DRIFT_PER_UNIT_TIME: f64 = 1e-10;
pub const EQUIVARIANCE_TOL: f64 = 1e-9;
pub const OCTAGON_RELATIVE_GAP: f64 = 0.05;
pub const WITNESS_GAP: f64 = 0.1;
const EQUIVARIANCE_SAMPLES: usize = 100;

#[derive(Debug, Clone)]
pub struct Settings {
    model: ManifoldModel,
    horizon: f64,
    dt: f64,
    trajectories: usize,
    resolution: usize,
    drift_horizon: f64,
    trajectory_horizon: f64,
    sample_every: usize,
    bump_radius: f64,
}

pub fn parse(p: &Params) -> CliResult<Settings> {
    Ok(Settings {
        model: p.model("model", "octagon", &["torus2", "torus3", "sphere", "octagon"])?,
        horizon: p.real("horizon", 1e4, 1.0, 1e6)?,
        dt: p.real("dt", 0.01, 1e-4, 0.1)?,
        trajectories: p.count("trajectories", 10, 1, 1000)?,
        resolution: p.count("resolution", 48, 4, 96)?,
        drift_horizon: p.real("drift_horizon", 1e3, 1.0, 1e5)?,
        trajectory_horizon: p.real("trajectory_horizon", 100.0, 0.1, 1e4)?,
        sample_every: p.count("sample_every", 10, 1, 1_000_000)?,
        bump_radius: p.real("bump_radius", 1.2, 0.1, 1.5)?,
    })
}

/// The observable whose time and space averages are compared.
fn observable(s: &Settings) -> FlowObservable {
    match &s.model {
        ManifoldModel::HyperbolicOctagon(_) => {
            let r0 = s.bump_radius;
            FlowObservable::scalar(format!("bump(r0={r0})"), move |x| {
                let d = disk_distance(Complex64::new(0.0, 0.0), Complex64::new(x.point[0], x.point[1])) / r0;
                if d < 1.0 {
                    (-1.0 / (1.0 - d * d)).exp()
                } else {
                    0.0
                }
            })
        }
        ManifoldModel::RoundSphere2 => FlowObservable::scalar("cos^2 theta", |x| x.point[0].cos().powi(2)),
        ManifoldModel::FlatTorus { periods } => {
            let last = periods.len() - 1;
            FlowObservable::scalar(format!("cos x{}", last + 1), move |x| x.point[last].cos())
        }
    }
}

fn frame_distance(a: &FramePoint, b: &FramePoint) -> f64 {
    let p = a.point.iter().zip(&b.point).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    p.max((&a.frame - &b.frame).amax())
}

#[derive(Serialize)]
struct BirkhoffSummary {
    model: String,
    observable: String,
    horizon: f64,
    dt: f64,
    trajectories: usize,
    resolution: usize,
    time_average: f64,
    space_average: f64,
    gap: f64,
    relative_gap: f64,
    witness: Option<Witness>,
}

#[derive(Serialize)]
struct Witness {
    start: Vec<f64>,
    direction: Vec<f64>,
    time_average: f64,
    space_average: f64,
    gap: f64,
}

pub fn execute(s: &Settings, run: &mut Run) -> CliResult<()> {
    let m = &s.model;
    let f = observable(s);
    let starts = random_frame_points(m, s.trajectories, run.seed)?;

    // frame drift along the first trajectory
    let steps = (s.drift_horizon / s.dt).round() as usize;
    let mut x = starts[0].clone();
    let mut drift: f64 = 0.0;
    for _ in 0..steps {
        x = frame_flow(m, &x, s.dt)?;
        drift = drift.max(x.orthonormality_residual(m)?);
    }
    run.at_most("frame orthonormality drift per unit time", drift / s.drift_horizon, DRIFT_PER_UNIT_TIME);

    let mut rng = ChaCha8Rng::seed_from_u64(run.seed.wrapping_add(1));
    let samples = random_frame_points(m, EQUIVARIANCE_SAMPLES, run.seed.wrapping_add(2))?;
    let (mut equiv, mut group): (f64, f64) = (0.0, 0.0);
    for fp in &samples {
        let g: DMatrix<f64> = random_rotation(m.dim() - 1, &mut rng);
        let a = frame_flow(m, &right_action(fp, &g)?, 1.0)?;
        let b = right_action(&frame_flow(m, fp, 1.0)?, &g)?;
        equiv = equiv.max(frame_distance(&a, &b));
        let two = frame_flow(m, &frame_flow(m, fp, 0.7)?, 0.6)?;
        group = group.max(frame_distance(&two, &frame_flow(m, fp, 1.3)?));
    }
    run.at_most("flow commutes with the right action", equiv, EQUIVARIANCE_TOL);
    run.at_most("flow group law", group, EQUIVARIANCE_TOL);

    let est = birkhoff_average_many(m, &f, &starts, s.horizon, s.dt, s.resolution)?;
    let (ta, sa) = (est.time_average[(0, 0)].re, est.space_average[(0, 0)].re);
    let relative = est.relative_gap(1e-12);
    match m {
        ManifoldModel::HyperbolicOctagon(_) => {
            run.at_most("octagon Birkhoff relative gap", relative, OCTAGON_RELATIVE_GAP);
        }
        _ => {
            run.report("pooled Birkhoff gap", est.gap(), None, None);
        }
    }

    let witness = match m {
        ManifoldModel::FlatTorus { periods } => {
            let n = periods.len();
            let mut point = vec![0.0; n];
            point[n - 1] = 0.5;
            let fp = FramePoint::new(point.clone(), DMatrix::identity(n, n));
            let w = birkhoff_average(m, &f, &fp, s.horizon, s.dt)?;
            let gap = w.gap();
            run.at_least("rational-direction witness gap", gap, WITNESS_GAP);
            let mut direction = vec![0.0; n];
            direction[0] = 1.0;
            Some(Witness {
                start: point,
                direction,
                time_average: w.time_average[(0, 0)].re,
                space_average: w.space_average[(0, 0)].re,
                gap,
            })
        }
        _ => None,
    };

    run.write_json(
        "birkhoff.json",
        &BirkhoffSummary {
            model: m.name(),
            observable: f.label.clone(),
            horizon: s.horizon,
            dt: s.dt,
            trajectories: s.trajectories,
            resolution: s.resolution,
            time_average: ta,
            space_average: sa,
            gap: est.gap(),
            relative_gap: relative,
            witness,
        },
    )?;

    let rows = trajectory(m, &f, &starts[0], s.trajectory_horizon, s.dt)?;
    let kept: Vec<_> = rows.into_iter().step_by(s.sample_every).collect();
    let file = std::fs::File::create(run.path("trajectory.csv"))?;
    write_trajectory_csv(&kept, std::io::BufWriter::new(file))?;
    Ok(())
}
