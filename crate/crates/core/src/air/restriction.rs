//! Local approximate ideal restriction (lAIR) and the dense ideal operator.

use nalgebra::{DMatrix, DVector};

use super::coarsen::CfSplitting;
use super::strength::StrengthGraph;
use crate::error::{Error, Result};
use crate::la::{CsrMatrix, DenseLu};

/// Tikhonov shift used when a local system is singular.
pub const LOCAL_REGULARIZATION: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Restriction {
    pub r: CsrMatrix,
    /// Number of local systems that needed the regularized fallback.
    pub regularized: usize,
}

/// Solves `M z = rhs`, falling back to `(MᵀM + εI) z = Mᵀ rhs`.
fn local_solve(m: DMatrix<f64>, rhs: &[f64], fallbacks: &mut usize) -> Vec<f64> {
    match DenseLu::new(m.clone()) {
        Ok(lu) => lu.solve(rhs),
        Err(_) => {
            *fallbacks += 1;
            let n = m.nrows();
            let mtm = m.transpose() * &m + DMatrix::identity(n, n) * LOCAL_REGULARIZATION;
            let mtb = m.transpose() * DVector::from_column_slice(rhs);
            mtm.lu()
                .solve(&mtb)
                .map(|v| v.as_slice().to_vec())
                .unwrap_or_else(|| vec![0.0; n])
        }
    }
}

/// lAIR with distance-one neighborhoods: for each C-point `i` let `N_i` be
/// the F-points `j` with a strength edge `i → j` in `g_r`. Row `i` of `R`
/// is `1` at `i` and `z` on `N_i`, where `z A[N_i, N_i] = −A[i, N_i]`, so
/// that `(RA)[i, N_i] = 0`.
pub fn lair_restriction(
    a: &CsrMatrix,
    cf: &CfSplitting,
    g_r: &StrengthGraph,
) -> Result<Restriction> {
    let n = a.nrows();
    if cf.len() != n || g_r.len() != n {
        return Err(Error::DimensionMismatch(
            "splitting, graph and matrix sizes differ".into(),
        ));
    }
    let mut triplets = Vec::new();
    let mut regularized = 0;
    for i in cf.c_points() {
        let ci = cf.coarse_index[i].expect("C-point has a coarse index");
        let nbh: Vec<usize> = g_r.edges[i]
            .iter()
            .copied()
            .filter(|&j| !cf.is_c(j))
            .collect();
        if !nbh.is_empty() {
            // transpose system: Mᵀ z = −A[i, N]ᵀ with M = A[N, N]
            let k = nbh.len();
            let mt = DMatrix::from_fn(k, k, |r, c| a.get(nbh[c], nbh[r]));
            let rhs: Vec<f64> = nbh.iter().map(|&j| -a.get(i, j)).collect();
            let z = local_solve(mt, &rhs, &mut regularized);
            for (&j, &zj) in nbh.iter().zip(&z) {
                triplets.push((ci, j, zj));
            }
        }
        triplets.push((ci, i, 1.0));
    }
    Ok(Restriction {
        r: CsrMatrix::from_triplets(cf.num_coarse(), n, &triplets),
        regularized,
    })
}

/// Dense ideal restriction `[−A_cf A_ff⁻¹, I]` (in original point order).
pub fn ideal_restriction_dense(a: &DMatrix<f64>, cf: &CfSplitting) -> Result<DMatrix<f64>> {
    let f = cf.f_points();
    let c = cf.c_points();
    let mut r = DMatrix::zeros(c.len(), a.nrows());
    if !f.is_empty() {
        let aff = DMatrix::from_fn(f.len(), f.len(), |i, j| a[(f[i], f[j])]);
        let acf = DMatrix::from_fn(c.len(), f.len(), |i, j| a[(c[i], f[j])]);
        // W = −A_cf A_ff⁻¹  ⇔  A_ffᵀ Wᵀ = −A_cfᵀ
        let lu = DenseLu::new(aff.transpose())?;
        let wt = lu.solve_matrix(&(-acf.transpose()));
        for ri in 0..c.len() {
            for (s, &fj) in f.iter().enumerate() {
                r[(ri, fj)] = wt[(s, ri)];
            }
        }
    }
    for (ri, &ci) in c.iter().enumerate() {
        r[(ri, ci)] = 1.0;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::air::coarsen::{rs_coarsen, Label};
    use crate::air::strength::strength_graph;
    use crate::air::testutil::random_lower_triangular;

    #[test]
    fn all_c_gives_identity() {
        let a = CsrMatrix::from_dense(&DMatrix::from_row_slice(
            3,
            3,
            &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0],
        ));
        let cf = CfSplitting::from_labels(vec![Label::C; 3]);
        let g = strength_graph(&a, 0.3).unwrap();
        let r = lair_restriction(&a, &cf, &g).unwrap();
        assert_eq!(r.r.to_dense(), DMatrix::identity(3, 3));
    }

    #[test]
    fn two_by_two_example() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let cf = CfSplitting::from_labels(vec![Label::F, Label::C]);
        let sa = CsrMatrix::from_dense(&a);
        let g = strength_graph(&sa, 0.3).unwrap();
        let r = lair_restriction(&sa, &cf, &g).unwrap();
        assert_eq!(r.r.to_dense(), DMatrix::from_row_slice(1, 2, &[0.5, 1.0]));
        let ideal = ideal_restriction_dense(&a, &cf).unwrap();
        assert_eq!(ideal, DMatrix::from_row_slice(1, 2, &[0.5, 1.0]));
    }

    #[test]
    fn exact_on_lower_triangular_neighborhoods() {
        for seed in 0..20 {
            let a = random_lower_triangular(40, 0.2, seed);
            let g_c = strength_graph(&a, 0.2).unwrap();
            let cf = rs_coarsen(&g_c);
            let g_r = strength_graph(&a, 0.3).unwrap();
            let r = lair_restriction(&a, &cf, &g_r).unwrap();
            assert_eq!(r.regularized, 0);
            let ra = r.r.spgemm(&a).unwrap();
            for i in cf.c_points() {
                let ci = cf.coarse_index[i].unwrap();
                for &j in g_r.edges[i].iter().filter(|&&j| !cf.is_c(j)) {
                    assert!(
                        ra.get(ci, j).abs() < 1e-12,
                        "seed {seed}: (RA)[{ci},{j}] = {}",
                        ra.get(ci, j)
                    );
                }
            }
        }
    }

    #[test]
    fn singular_local_system_falls_back() {
        // F-points 0 and 1 form a singular block; C-point 2 reaches both
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, -1.0, -1.0, 1.0]);
        let cf = CfSplitting::from_labels(vec![Label::F, Label::F, Label::C]);
        let sa = CsrMatrix::from_dense(&a);
        let g = strength_graph(&sa, 0.3).unwrap();
        let r = lair_restriction(&sa, &cf, &g).unwrap();
        assert_eq!(r.regularized, 1);
        assert!(r.r.data().iter().all(|v| v.is_finite()));
    }
}
