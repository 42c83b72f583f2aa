use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Compressed sparse row matrix with an optional uniform block partition.
///
/// Column indices are strictly increasing within each row. Explicit zeros
/// are allowed as structural entries; [`CsrMatrix::drop_zeros`] removes them.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
    block_size: Option<usize>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, validating the structure.
    pub fn new(
        nrows: usize,
        ncols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        data: Vec<f64>,
    ) -> Result<Self> {
        let m = CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            data,
            block_size: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            data: Vec::new(),
            block_size: None,
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![1.0; n],
            block_size: None,
        }
    }

    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, j, _) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        let mut next = counts.clone();
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }

        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data = Vec::with_capacity(triplets.len());
        indptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for i in 0..nrows {
            row.clear();
            row.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            // stable sort keeps the summation order deterministic
            row.sort_by_key(|&(j, _)| j);
            for &(j, v) in row.iter() {
                if indices.len() > indptr[i] && *indices.last().unwrap() == j {
                    *data.last_mut().unwrap() += v;
                } else {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            data,
            block_size: None,
        }
    }

    /// Dense to sparse, keeping entries with `|v| > 0`.
    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let mut trip = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)] != 0.0 {
                    trip.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.nrows(), a.ncols(), &trip)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                d[(i, j)] += v;
            }
        }
        d
    }

    /// Attaches a uniform block partition.
    pub fn with_block_size(mut self, b: usize) -> Result<Self> {
        if b == 0 || self.nrows % b != 0 || self.ncols % b != 0 {
            return Err(Error::InvalidArgument(format!(
                "block size {b} does not divide {}x{}",
                self.nrows, self.ncols
            )));
        }
        self.block_size = Some(b);
        Ok(self)
    }

    pub fn block_size(&self) -> Option<usize> {
        self.block_size
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()]
            .iter()
            .copied()
            .zip(self.data[r].iter().copied())
    }

    pub fn row_cols(&self, i: usize) -> &[usize] {
        &self.indices[self.indptr[i]..self.indptr[i + 1]]
    }

    pub fn row_vals(&self, i: usize) -> &[f64] {
        &self.data[self.indptr[i]..self.indptr[i + 1]]
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cols = self.row_cols(i);
        match cols.binary_search(&j) {
            Ok(k) => self.data[self.indptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// Checks the CSR structural invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.indptr.len() != self.nrows + 1 || self.indptr[0] != 0 {
            return bad("malformed row offsets".into());
        }
        if *self.indptr.last().unwrap() != self.indices.len()
            || self.indices.len() != self.data.len()
        {
            return bad("offsets disagree with storage length".into());
        }
        for i in 0..self.nrows {
            if self.indptr[i] > self.indptr[i + 1] {
                return bad(format!("row offsets decrease at row {i}"));
            }
            let cols = self.row_cols(i);
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("columns not strictly increasing in row {i}"));
            }
            if cols.last().is_some_and(|&j| j >= self.ncols) {
                return bad(format!("column out of range in row {i}"));
            }
        }
        Ok(())
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "spmv: matrix has {} columns, vector has {}",
                self.ncols,
                x.len()
            )));
        }
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x` without allocation; panics on dimension mismatch.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.indptr[i]..self.indptr[i + 1];
            *yi = self.indices[r.clone()]
                .iter()
                .zip(&self.data[r])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    }

    /// `r = b - A x`.
    pub fn residual(&self, b: &[f64], x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.nrows];
        self.spmv_into(x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        r
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut indices = vec![0; self.nnz()];
        let mut data = vec![0.0; self.nnz()];
        let mut next = counts.clone();
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                indices[next[j]] = i;
                data[next[j]] = v;
                next[j] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            indptr: counts,
            indices,
            data,
            block_size: self.block_size,
        }
    }

    /// Sparse product `A B` (Gustavson). Nothing is dropped.
    pub fn spgemm(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        self.spgemm_with_drop(other, None)
    }

    /// Sparse product with an optional relative drop tolerance: entries with
    /// `|v| < drop * max_j |row_j|` are removed row by row.
    pub fn spgemm_with_drop(&self, other: &CsrMatrix, drop: Option<f64>) -> Result<CsrMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch(format!(
                "spgemm: {}x{} times {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let n = other.ncols;
        let mut marker = vec![usize::MAX; n];
        let mut acc = vec![0.0; n];
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        let mut cols: Vec<usize> = Vec::new();
        indptr.push(0);
        for i in 0..self.nrows {
            cols.clear();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = 0.0;
                        cols.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            cols.sort_unstable();
            let cutoff = drop.map(|d| d * cols.iter().map(|&j| acc[j].abs()).fold(0.0, f64::max));
            for &j in &cols {
                if cutoff.is_some_and(|c| acc[j].abs() < c) {
                    continue;
                }
                indices.push(j);
                data.push(acc[j]);
            }
            indptr.push(indices.len());
        }
        let out = CsrMatrix {
            nrows: self.nrows,
            ncols: n,
            indptr,
            indices,
            data,
            block_size: None,
        };
        debug_assert!(out.validate().is_ok());
        Ok(out)
    }

    /// Removes stored entries that are exactly zero.
    pub fn drop_zeros(&self) -> CsrMatrix {
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::with_capacity(self.nnz());
        let mut data = Vec::with_capacity(self.nnz());
        indptr.push(0);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                if v != 0.0 {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            indices,
            data,
            block_size: self.block_size,
        }
    }

    /// Symmetric permutation `B[i, j] = A[perm[i], perm[j]]`.
    pub fn permute(&self, perm: &[usize]) -> CsrMatrix {
        assert_eq!(self.nrows, self.ncols);
        assert_eq!(perm.len(), self.nrows);
        let mut inv = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut trip = Vec::with_capacity(self.nnz());
        for (new_i, &old_i) in perm.iter().enumerate() {
            for (j, v) in self.row(old_i) {
                trip.push((new_i, inv[j], v));
            }
        }
        CsrMatrix::from_triplets(self.nrows, self.ncols, &trip)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(rng: &mut ChaCha8Rng, m: usize, n: usize, density: f64) -> CsrMatrix {
        let mut trip = Vec::new();
        for i in 0..m {
            for j in 0..n {
                if rng.gen::<f64>() < density {
                    trip.push((i, j, rng.gen_range(-1.0..1.0)));
                }
            }
        }
        CsrMatrix::from_triplets(m, n, &trip)
    }

    #[test]
    fn identity_spmv() {
        let x = vec![1.0, -2.0, 3.5];
        assert_eq!(CsrMatrix::identity(3).spmv(&x).unwrap(), x);
    }

    #[test]
    fn small_spmv() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, -1.0), (1, 1, 3.0)]);
        assert_eq!(a.spmv(&[1.0, 1.0]).unwrap(), vec![1.0, 3.0]);
    }

    #[test]
    fn spmv_dimension_mismatch() {
        let a = CsrMatrix::identity(3);
        assert!(matches!(a.spmv(&[1.0]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn spmv_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_sparse(&mut rng, 50, 50, 0.1);
        let x: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = a.spmv(&x).unwrap();
        let yd = a.to_dense() * nalgebra::DVector::from_vec(x);
        for i in 0..50 {
            assert!((y[i] - yd[i]).abs() <= 1e-13);
        }
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(1, 2, &[(0, 1, 1.0), (0, 0, 2.0), (0, 1, 0.5)]);
        assert_eq!(a.row_cols(0), &[0, 1]);
        assert_eq!(a.row_vals(0), &[2.0, 1.5]);
        a.validate().unwrap();
    }

    #[test]
    fn product_with_identity_is_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_sparse(&mut rng, 12, 9, 0.3);
        let c = a.spgemm(&CsrMatrix::identity(9)).unwrap();
        assert_eq!(c.data(), a.data());
        assert_eq!(c.indices(), a.indices());
    }

    #[test]
    fn triangular_product_stays_triangular() {
        let mut trip = Vec::new();
        for i in 0..6 {
            for j in 0..=i {
                trip.push((i, j, (i + 2 * j + 1) as f64));
            }
        }
        let l = CsrMatrix::from_triplets(6, 6, &trip);
        let p = l.spgemm(&l).unwrap();
        for i in 0..6 {
            assert!(p.row_cols(i).iter().all(|&j| j <= i));
        }
    }

    #[test]
    fn spgemm_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_sparse(&mut rng, 30, 20, 0.2);
        let b = random_sparse(&mut rng, 20, 25, 0.2);
        let c = a.spgemm(&b).unwrap().to_dense();
        let cd = a.to_dense() * b.to_dense();
        assert!((c - cd).amax() <= 1e-12);
    }

    #[test]
    fn spgemm_drop_flag() {
        let a = CsrMatrix::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, 1e-16)]);
        let c = a
            .spgemm_with_drop(&CsrMatrix::identity(2), Some(1e-14))
            .unwrap();
        assert_eq!(c.nnz(), 1);
        let c = a.spgemm(&CsrMatrix::identity(2)).unwrap();
        assert_eq!(c.nnz(), 2);
    }

    #[test]
    fn spgemm_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let a = random_sparse(&mut rng, 8, 10, 0.4);
            let b = random_sparse(&mut rng, 10, 7, 0.4);
            let c = random_sparse(&mut rng, 7, 9, 0.4);
            let l = a.spgemm(&b).unwrap().spgemm(&c).unwrap().to_dense();
            let r = a.spgemm(&b.spgemm(&c).unwrap()).unwrap().to_dense();
            assert!((l - r).amax() <= 1e-10);
        }
    }

    #[test]
    fn transpose_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_sparse(&mut rng, 9, 13, 0.3);
        let t = a.transpose();
        t.validate().unwrap();
        assert_eq!(t.transpose(), a);
        assert_eq!(t.to_dense(), a.to_dense().transpose());
    }

    #[test]
    fn rejects_unsorted_columns() {
        assert!(CsrMatrix::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
    }
}
