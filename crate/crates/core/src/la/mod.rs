//! Sparse and dense linear-algebra kernels.

mod dense;
mod mmio;
mod scaling;
mod sparse;

pub use dense::{dense_lu_solve, DenseLu};
pub use mmio::{read_matrix_market, read_vector, write_matrix_market, write_vector};
pub use scaling::{block_diag_inverse_scale, BlockDiagonalScaling};
pub use sparse::CsrMatrix;

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
