//! Fixtures shared by the benchmarks.

use degenlab_core::grid::{ScalarField, SpatialGrid};
use degenlab_core::DegenParams;

/// `p = 3`, `λ = 1` with the default `α`.
pub fn params(eps: f64) -> DegenParams {
    DegenParams::with_default_alpha(3.0, 1.0, eps).expect("valid parameters")
}

/// Gradients spread over several decades, including some inside the degeneracy disc.
pub fn gradients(n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|k| {
            let r = 10f64.powf(-3.0 + 6.0 * k as f64 / n as f64);
            let a = 2.399_963 * k as f64;
            [r * a.cos(), r * a.sin()]
        })
        .collect()
}

/// A smooth field with a kink along a circle.
pub fn bumpy_field(cells: usize) -> ScalarField {
    let grid = SpatialGrid::new(1.0, cells).expect("valid grid");
    ScalarField::from_fn(grid, |x, y| {
        let r = (x - 0.5).hypot(y - 0.5);
        (3.0 * x).sin() * (2.0 * y).cos() + (r - 0.25).abs()
    })
}
