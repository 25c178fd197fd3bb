//! Shared fixtures for the criterion benches.

use shrinkinit::{gaussian_matrix, seeded_rng, Matrix};

/// Standard-normal `rows × cols` matrix for a fixed seed.
pub fn fixture(rows: usize, cols: usize, seed: u64) -> Matrix {
    gaussian_matrix(rows, cols, 1.0, &mut seeded_rng(seed)).expect("positive dims")
}
