use frameflow_core::geometry::{holonomy, triangle_area, ManifoldModel};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Params;
use crate::error::CliResult;
use crate::manifest::Run;

pub const HOLONOMY_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Settings {
    model: ManifoldModel,
    triangles: usize,
    size: f64,
}

pub fn parse(p: &Params) -> CliResult<Settings> {
    Ok(Settings {
        model: p.model("model", "sphere", &["sphere", "octagon"])?,
        triangles: p.count("triangles", 20, 1, 10_000)?,
        size: p.real("size", 0.25, 0.01, 0.25)?,
    })
}

#[derive(Serialize)]
struct Row {
    index: usize,
    vertices: String,
    area: f64,
    holonomy: f64,
    curvature_times_area: f64,
    residual: f64,
}

fn unit(v: [f64; 3]) -> Vec<f64> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.iter().map(|x| x / n).collect()
}

/// A fixed triangle followed by seeded random ones, positively oriented.
fn triangles(s: &Settings, seed: u64) -> Vec<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(s.triangles);
    match s.model {
        ManifoldModel::RoundSphere2 => {
            out.push(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
            while out.len() < s.triangles {
                let (x, y) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
                let (d, e) = (rng.random_range(0.2..1.0) * s.size, rng.random_range(0.2..1.0) * s.size);
                out.push(vec![unit([x, y, 1.0]), unit([x + d, y, 1.0]), unit([x, y + e, 1.0])]);
            }
        }
        _ => {
            out.push(vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.0, 0.5]]);
            while out.len() < s.triangles {
                let (x, y) = (rng.random_range(-0.25..0.25), rng.random_range(-0.25..0.25));
                let (d, e) = (rng.random_range(0.2..1.0) * s.size, rng.random_range(0.2..1.0) * s.size);
                out.push(vec![vec![x, y], vec![x + d, y], vec![x, y + e]]);
            }
        }
    }
    out
}

pub fn execute(s: &Settings, run: &mut Run) -> CliResult<()> {
    let k = s.model.curvature();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (index, tri) in triangles(s, run.seed).into_iter().enumerate() {
        let area = triangle_area(&s.model, &tri)?;
        let h = holonomy(&s.model, &tri)?;
        let residual = (h - k * area).abs();
        worst = worst.max(residual);
        let vertices = tri
            .iter()
            .map(|v| v.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join(";");
        rows.push(Row {
            index,
            vertices,
            area,
            holonomy: h,
            curvature_times_area: k * area,
            residual,
        });
    }
    run.at_most("holonomy minus curvature times area", worst, HOLONOMY_TOL);
    run.write_csv("holonomy.csv", &rows)
}
