//! Local cubic (4-point Lagrange) interpolation on sorted abscissae.
//! Used to move smooth samples between quadrature grids and the uniform
//! finite-difference mesh.

/// Interpolate `ys` (sampled at sorted `xs`) at position `x`.
/// Outside the abscissa range the boundary cubic is extrapolated.
pub fn cubic(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    if xs.len() < 4 {
        // linear fallback
        let i = locate(xs, x).min(xs.len() - 2);
        let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
        return ys[i] * (1.0 - t) + ys[i + 1] * t;
    }
    let i = locate(xs, x);
    let lo = i.saturating_sub(1).min(xs.len() - 4);
    let mut acc = 0.0;
    for a in lo..lo + 4 {
        let mut l = 1.0;
        for b in lo..lo + 4 {
            if a != b {
                l *= (x - xs[b]) / (xs[a] - xs[b]);
            }
        }
        acc += l * ys[a];
    }
    acc
}

/// Index i with xs[i] <= x < xs[i+1] (clamped to valid range).
fn locate(xs: &[f64], x: f64) -> usize {
    match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(xs.len() - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(xs.len() - 2),
    }
}

/// Interpolate a whole sample set onto new abscissae.
pub fn resample(xs: &[f64], ys: &[f64], new_xs: &[f64]) -> Vec<f64> {
    new_xs.iter().map(|&x| cubic(xs, ys, x)).collect()
}
