//! Fixtures shared by the kernel benchmarks.

use crystalflow::{Grid, ScalarField};

/// `‖x‖_∞ − half`: the signed ℓ∞ distance of a centred box.
pub fn box_field(grid: Grid, half: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x| x.iter().fold(0.0f64, |m, c| m.max(c.abs())) - half)
}

/// A smooth field with features at several scales, for solver kernels.
pub fn wavy_field(grid: Grid) -> ScalarField {
    ScalarField::from_fn(grid, |x| x.iter().enumerate().map(|(k, c)| ((k + 2) as f64 * 3.1 * c).sin()).sum())
}

/// Gradient-like test vectors, `n` entries per node.
pub fn wavy_vectors(grid: Grid) -> Vec<f64> {
    let n = grid.dim();
    (0..grid.node_count() * n).map(|i| 0.02 * (i as f64 * 0.37).sin()).collect()
}
