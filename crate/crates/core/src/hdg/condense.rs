//! Static condensation onto the facet unknowns and element reconstruction.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::assemble::BlockSystem;
use crate::error::{Error, Result};
use crate::la::{CsrMatrix, DenseLu};

/// Per-element data kept for back-substitution.
#[derive(Clone, Debug)]
pub struct CondensedElement {
    pub element: usize,
    /// `A_K⁻¹ B_K`, columns grouped by local facet.
    pub ainv_b: DMatrix<f64>,
    /// `A_K⁻¹ F_K`.
    pub ainv_f: DVector<f64>,
    pub facets: [Option<usize>; 3],
}

/// `S Λ = H` with `S = D − C A⁻¹ B` and `H = G − C A⁻¹ F`.
#[derive(Clone, Debug)]
pub struct CondensedSystem {
    pub s: CsrMatrix,
    pub h: Vec<f64>,
    pub elements: Vec<CondensedElement>,
    pub element_block_size: usize,
    pub facet_block_size: usize,
}

pub fn condense(bs: &BlockSystem) -> Result<CondensedSystem> {
    let nf = bs.facet_block_size;
    type Local = (CondensedElement, DMatrix<f64>, DVector<f64>);
    let locals: Vec<Local> = bs
        .elements
        .par_iter()
        .map(|eb| -> Result<Local> {
            let lu = DenseLu::new(eb.a.clone()).map_err(|_| Error::SingularElement {
                element: eb.element,
            })?;
            let ainv_b = lu.solve_matrix(&eb.b);
            let ainv_f = DVector::from_vec(lu.solve(eb.f.as_slice()));
            let schur = &eb.c * &ainv_b;
            let hloc = &eb.c * &ainv_f;
            Ok((
                CondensedElement {
                    element: eb.element,
                    ainv_b,
                    ainv_f,
                    facets: eb.facets,
                },
                schur,
                hloc,
            ))
        })
        .collect::<Result<_>>()?;

    let n = bs.num_facet_dofs();
    let mut triplets: Vec<(usize, usize, f64)> =
        Vec::with_capacity(bs.d.nnz() + locals.len() * 9 * nf * nf);
    for i in 0..n {
        triplets.extend(bs.d.row(i).map(|(j, v)| (i, j, v)));
    }
    let mut h = bs.g.clone();
    let mut elements = Vec::with_capacity(locals.len());
    for (ce, schur, hloc) in locals {
        for (l1, b1) in ce.facets.iter().enumerate() {
            let Some(b1) = b1 else { continue };
            for m in 0..nf {
                h[b1 * nf + m] -= hloc[l1 * nf + m];
                for (l2, b2) in ce.facets.iter().enumerate() {
                    let Some(b2) = b2 else { continue };
                    for q in 0..nf {
                        triplets.push((
                            b1 * nf + m,
                            b2 * nf + q,
                            -schur[(l1 * nf + m, l2 * nf + q)],
                        ));
                    }
                }
            }
        }
        elements.push(ce);
    }
    let s = CsrMatrix::from_triplets(n, n, &triplets).with_block_size(nf)?;
    Ok(CondensedSystem {
        s,
        h,
        elements,
        element_block_size: bs.element_block_size,
        facet_block_size: nf,
    })
}

/// `U_K = A_K⁻¹(F_K − B_K Λ)` for every element, in system element order.
pub fn reconstruct(cs: &CondensedSystem, lambda: &[f64]) -> Result<Vec<f64>> {
    let nf = cs.facet_block_size;
    if lambda.len() != cs.s.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "facet vector has length {}, expected {}",
            lambda.len(),
            cs.s.nrows()
        )));
    }
    let per: Vec<Vec<f64>> = cs
        .elements
        .par_iter()
        .map(|ce| {
            let mut u = ce.ainv_f.clone();
            for (l, blk) in ce.facets.iter().enumerate() {
                let Some(blk) = blk else { continue };
                for q in 0..nf {
                    let lv = lambda[blk * nf + q];
                    if lv != 0.0 {
                        u.axpy(-lv, &ce.ainv_b.column(l * nf + q), 1.0);
                    }
                }
            }
            u.as_slice().to_vec()
        })
        .collect();
    Ok(per.concat())
}
