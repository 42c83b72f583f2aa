use nalgebra::DMatrix;

use super::dense::DenseLu;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Left block-diagonal scaling `D⁻¹ A` where `D` holds the `b x b` diagonal
/// blocks of `A`.
#[derive(Clone, Debug)]
pub struct BlockDiagonalScaling {
    block_size: usize,
    blocks: Vec<DMatrix<f64>>,
    inverses: Vec<DMatrix<f64>>,
}

impl BlockDiagonalScaling {
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// `D⁻¹ v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.blockwise(v, &self.inverses)
    }

    /// `D v`.
    pub fn unapply(&self, v: &[f64]) -> Vec<f64> {
        self.blockwise(v, &self.blocks)
    }

    fn blockwise(&self, v: &[f64], mats: &[DMatrix<f64>]) -> Vec<f64> {
        let b = self.block_size;
        assert_eq!(v.len(), b * mats.len());
        let mut out = vec![0.0; v.len()];
        for (k, m) in mats.iter().enumerate() {
            for r in 0..b {
                out[k * b + r] = (0..b).map(|c| m[(r, c)] * v[k * b + c]).sum();
            }
        }
        out
    }

    /// Left-multiplies every block row of `a` by the given per-block matrices.
    fn left_multiply(&self, a: &CsrMatrix, mats: &[DMatrix<f64>]) -> CsrMatrix {
        let b = self.block_size;
        let mut trip = Vec::with_capacity(a.nnz() * b);
        let mut cols: Vec<usize> = Vec::new();
        for (k, m) in mats.iter().enumerate() {
            cols.clear();
            for r in 0..b {
                cols.extend_from_slice(a.row_cols(k * b + r));
            }
            cols.sort_unstable();
            cols.dedup();
            for r in 0..b {
                for &j in &cols {
                    let v: f64 = (0..b).map(|c| m[(r, c)] * a.get(k * b + c, j)).sum();
                    trip.push((k * b + r, j, v));
                }
            }
        }
        CsrMatrix::from_triplets(a.nrows(), a.ncols(), &trip)
    }

    /// Recovers `A` from `D⁻¹ A`.
    pub fn unscale(&self, scaled: &CsrMatrix) -> CsrMatrix {
        self.left_multiply(scaled, &self.blocks)
    }
}

/// Computes `D⁻¹ A` for the `b x b` block diagonal `D` of `A`.
///
/// Diagonal blocks of the result are set to the exact identity; all other
/// structural entries of `A` are kept.
pub fn block_diag_inverse_scale(
    a: &CsrMatrix,
    b: usize,
) -> Result<(CsrMatrix, BlockDiagonalScaling)> {
    if b == 0 || a.nrows() != a.ncols() || a.nrows() % b != 0 {
        return Err(Error::InvalidArgument(format!(
            "block size {b} incompatible with a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let nb = a.nrows() / b;
    let mut blocks = Vec::with_capacity(nb);
    let mut inverses = Vec::with_capacity(nb);
    for k in 0..nb {
        let d = DMatrix::from_fn(b, b, |r, c| a.get(k * b + r, k * b + c));
        let lu = DenseLu::new(d.clone()).map_err(|_| Error::SingularBlock { block: k })?;
        inverses.push(lu.solve_matrix(&DMatrix::identity(b, b)));
        blocks.push(d);
    }
    let scaling = BlockDiagonalScaling {
        block_size: b,
        blocks,
        inverses,
    };
    let mut scaled = scaling.left_multiply(a, &scaling.inverses);
    let (indptr, indices) = (scaled.indptr().to_vec(), scaled.indices().to_vec());
    let data = scaled.data_mut();
    for i in 0..a.nrows() {
        for k in indptr[i]..indptr[i + 1] {
            let j = indices[k];
            if j / b == i / b {
                data[k] = if i == j { 1.0 } else { 0.0 };
            }
        }
    }
    let scaled = scaled.drop_zeros().with_block_size(b)?;
    Ok((scaled, scaling))
}
