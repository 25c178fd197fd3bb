//! Dense matrices and the decompositions the initializers depend on.

mod matrix;
mod random;
mod svd;

pub use matrix::Matrix;
pub use random::{gaussian_matrix, seeded_rng, SeededRng};
pub use svd::{orthogonal_factor, pinv, svd_full, SvdResult, MAX_SWEEPS};

/// Free-function form of [`Matrix::matmul`].
pub fn matmul(a: &Matrix, b: &Matrix) -> crate::Result<Matrix> {
    a.matmul(b)
}
