//! Fixtures shared by the benchmarks.

use frameflow_core::geometry::{FramePoint, ManifoldModel};
use frameflow_core::Result;

pub const FIXTURE_SEED: u64 = 0x00be_0c11;

/// Seeded starting frames on `model`.
pub fn starts(model: &ManifoldModel, count: usize) -> Result<Vec<FramePoint>> {
    frameflow_core::flows::random_frame_points(model, count, FIXTURE_SEED)
}

/// The models exercised by the flow benchmark, with a short name each.
pub fn flow_models() -> Result<Vec<(&'static str, ManifoldModel)>> {
    Ok(vec![
        ("torus3", ManifoldModel::flat_torus(3)?),
        ("sphere", ManifoldModel::round_sphere()),
        ("octagon", ManifoldModel::hyperbolic_octagon()),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_seeded() {
        for (_, m) in flow_models().unwrap() {
            assert_eq!(starts(&m, 3).unwrap(), starts(&m, 3).unwrap());
        }
    }
}
