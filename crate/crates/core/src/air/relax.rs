//! Relaxation sweeps.

use nalgebra::DMatrix;

use super::coarsen::CfSplitting;
use super::ordering::relaxation_order;
use crate::error::{Error, Result};
use crate::la::{CsrMatrix, DenseLu};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relaxation {
    /// Unweighted pointwise Jacobi.
    Jacobi,
    /// Forward Gauss-Seidel in natural order.
    Fgs,
    /// Forward Gauss-Seidel on F-points, then on all points.
    FThenAllFgs,
    /// Forward block Gauss-Seidel in a topological block order.
    OrderedBlockGs,
}

pub const RELAXATION_NAMES: [&str; 4] = ["jacobi", "fgs", "f_then_all_fgs", "ordered_block_gs"];

impl Relaxation {
    pub fn name(self) -> &'static str {
        match self {
            Relaxation::Jacobi => "jacobi",
            Relaxation::Fgs => "fgs",
            Relaxation::FThenAllFgs => "f_then_all_fgs",
            Relaxation::OrderedBlockGs => "ordered_block_gs",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "jacobi" => Relaxation::Jacobi,
            "fgs" => Relaxation::Fgs,
            "f_then_all_fgs" => Relaxation::FThenAllFgs,
            "ordered_block_gs" => Relaxation::OrderedBlockGs,
            _ => return None,
        })
    }
}

/// Block order plus factored diagonal blocks for [`Relaxation::OrderedBlockGs`].
#[derive(Clone, Debug)]
pub struct BlockPlan {
    pub block: usize,
    pub order: Vec<usize>,
    inverses: Vec<DenseLu>,
}

impl BlockPlan {
    pub fn new(a: &CsrMatrix, block: usize, droptol: f64) -> Result<Self> {
        let order = relaxation_order(a, block, droptol)?;
        Self::with_order(a, block, order)
    }

    pub fn with_order(a: &CsrMatrix, block: usize, order: Vec<usize>) -> Result<Self> {
        let nb = a.nrows() / block;
        let inverses = (0..nb)
            .map(|k| {
                let d = DMatrix::from_fn(block, block, |r, c| a.get(k * block + r, k * block + c));
                DenseLu::new(d).map_err(|_| Error::SingularBlock { block: k })
            })
            .collect::<Result<_>>()?;
        Ok(BlockPlan {
            block,
            order,
            inverses,
        })
    }
}

fn gs_point(a: &CsrMatrix, b: &[f64], x: &mut [f64], i: usize) {
    let mut s = b[i];
    let mut diag = 0.0;
    for (j, v) in a.row(i) {
        if j == i {
            diag = v;
        } else {
            s -= v * x[j];
        }
    }
    if diag != 0.0 {
        x[i] = s / diag;
    }
}

/// One sweep of `scheme` on `A x = b`, updating `x` in place.
pub fn relax(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    scheme: Relaxation,
    cf: Option<&CfSplitting>,
    plan: Option<&BlockPlan>,
) -> Result<()> {
    let n = a.nrows();
    if b.len() != n || x.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "relaxation on {n} rows with |b| = {}, |x| = {}",
            b.len(),
            x.len()
        )));
    }
    match scheme {
        Relaxation::Jacobi => {
            let r = a.residual(b, x);
            for (i, ri) in r.iter().enumerate() {
                let d = a.get(i, i);
                if d != 0.0 {
                    x[i] += ri / d;
                }
            }
        }
        Relaxation::Fgs => (0..n).for_each(|i| gs_point(a, b, x, i)),
        Relaxation::FThenAllFgs => {
            let cf = cf.ok_or_else(|| {
                Error::MissingRelaxationData("f_then_all_fgs needs a CF-splitting".into())
            })?;
            for i in (0..n).filter(|&i| !cf.is_c(i)) {
                gs_point(a, b, x, i);
            }
            (0..n).for_each(|i| gs_point(a, b, x, i));
        }
        Relaxation::OrderedBlockGs => {
            let plan = plan.ok_or_else(|| {
                Error::MissingRelaxationData("ordered_block_gs needs a block order".into())
            })?;
            let bs = plan.block;
            let mut r = vec![0.0; bs];
            for &blk in &plan.order {
                let rows = blk * bs..(blk + 1) * bs;
                for (k, i) in rows.clone().enumerate() {
                    r[k] = b[i];
                    for (j, v) in a.row(i) {
                        if !rows.contains(&j) {
                            r[k] -= v * x[j];
                        }
                    }
                }
                let y = plan.inverses[blk].solve(&r);
                x[rows].copy_from_slice(&y);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::air::coarsen::rs_coarsen;
    use crate::air::strength::strength_graph;
    use crate::air::testutil::{random_lower_triangular, random_sparse};
    use crate::la::norm2;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jacobi_diagonal_example() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 4.0)]);
        let mut x = vec![0.0, 0.0];
        relax(&a, &[2.0, 4.0], &mut x, Relaxation::Jacobi, None, None).unwrap();
        assert_eq!(x, vec![1.0, 1.0]);
    }

    #[test]
    fn exact_solution_is_fixed_point() {
        for seed in 0..10 {
            let a = random_sparse(30, 0.15, seed);
            let xs: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
            let b = a.spmv(&xs).unwrap();
            let cf = rs_coarsen(&strength_graph(&a, 0.2).unwrap());
            let plan = BlockPlan::new(&a, 1, 0.0).unwrap();
            for scheme in [
                Relaxation::Jacobi,
                Relaxation::Fgs,
                Relaxation::FThenAllFgs,
                Relaxation::OrderedBlockGs,
            ] {
                let mut x = xs.clone();
                relax(&a, &b, &mut x, scheme, Some(&cf), Some(&plan)).unwrap();
                let d: f64 = x
                    .iter()
                    .zip(&xs)
                    .map(|(p, q)| (p - q).abs())
                    .fold(0.0, f64::max);
                assert!(d < 1e-12, "{scheme:?}: {d}");
            }
        }
    }

    #[test]
    fn ordered_gs_solves_permuted_triangular_in_one_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_lower_triangular(50, 0.2, 9);
        let mut perm: Vec<usize> = (0..50).collect();
        perm.shuffle(&mut rng);
        let pa = a.permute(&perm);
        let b: Vec<f64> = (0..50).map(|i| 1.0 + i as f64).collect();
        let plan = BlockPlan::new(&pa, 1, 0.0).unwrap();
        let mut x = vec![0.0; 50];
        relax(
            &pa,
            &b,
            &mut x,
            Relaxation::OrderedBlockGs,
            None,
            Some(&plan),
        )
        .unwrap();
        assert!(norm2(&pa.residual(&b, &x)) <= 1e-12 * norm2(&b));
    }

    #[test]
    fn missing_data_is_an_error() {
        let a = CsrMatrix::identity(2);
        let mut x = vec![0.0; 2];
        assert!(matches!(
            relax(&a, &[1.0, 1.0], &mut x, Relaxation::FThenAllFgs, None, None),
            Err(Error::MissingRelaxationData(_))
        ));
        assert!(relax(
            &a,
            &[1.0, 1.0],
            &mut x,
            Relaxation::OrderedBlockGs,
            None,
            None
        )
        .is_err());
    }

    #[test]
    fn names_roundtrip() {
        for n in RELAXATION_NAMES {
            assert_eq!(Relaxation::from_name(n).unwrap().name(), n);
        }
    }
}
