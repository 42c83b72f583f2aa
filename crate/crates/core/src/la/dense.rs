use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};

/// Pivots below this fraction of the largest matrix entry count as singular.
const PIVOT_TOL: f64 = 1e-14;

/// Partial-pivoted LU factorization of a dense square matrix.
#[derive(Clone, Debug)]
pub struct DenseLu {
    lu: LU<f64, Dyn, Dyn>,
    n: usize,
}

impl DenseLu {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "LU of a {}x{} matrix",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let scale = a.amax().max(f64::MIN_POSITIVE);
        let lu = a.lu();
        let u = lu.u();
        if let Some(k) = (0..n).find(|&k| u[(k, k)].abs() < PIVOT_TOL * scale) {
            return Err(Error::Singular(format!(
                "pivot {k} is {:e} (matrix scale {scale:e})",
                u[(k, k)]
            )));
        }
        Ok(DenseLu { lu, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let x = self
            .lu
            .solve(&DVector::from_column_slice(b))
            .expect("factorization was checked nonsingular");
        x.as_slice().to_vec()
    }

    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.lu
            .solve(b)
            .expect("factorization was checked nonsingular")
    }
}

/// Solves `A x = b` with partial pivoting.
pub fn dense_lu_solve(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs of length {} for a {}x{} matrix",
            b.len(),
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(DenseLu::new(a.clone())?.solve(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_solve() {
        let b = vec![3.0, -1.0, 2.0];
        assert_eq!(dense_lu_solve(&DMatrix::identity(3, 3), &b).unwrap(), b);
    }

    #[test]
    fn hilbert_four() {
        let h = DMatrix::from_fn(4, 4, |i, j| 1.0 / (i + j + 1) as f64);
        let b: Vec<f64> = (0..4).map(|i| h.row(i).sum()).collect();
        let x = dense_lu_solve(&h, &b).unwrap();
        for xi in x {
            assert!((xi - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn diagonally_dominant_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 64;
        let mut a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        for i in 0..n {
            a[(i, i)] = n as f64;
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = dense_lu_solve(&a, &b).unwrap();
        let r = &a * DVector::from_vec(x) - DVector::from_vec(b);
        assert!(r.amax() <= 1e-11);
    }

    #[test]
    fn singular_is_reported() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(
            dense_lu_solve(&a, &[1.0, 1.0]),
            Err(Error::Singular(_))
        ));
    }
}
