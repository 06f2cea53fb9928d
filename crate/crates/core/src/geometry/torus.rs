//! Flat torus `ℝⁿ / ∏ Lᵢ ℤ`.

pub fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    // rem_euclid can round up to the period itself
    if r >= period {
        0.0
    } else {
        r
    }
}

pub fn advance(point: &[f64], velocity: &[f64], t: f64, periods: &[f64]) -> Vec<f64> {
    point
        .iter()
        .zip(velocity)
        .zip(periods)
        .map(|((x, v), l)| wrap(x + t * v, *l))
        .collect()
}
