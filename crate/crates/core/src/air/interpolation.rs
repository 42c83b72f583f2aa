//! One-point interpolation.

use super::coarsen::CfSplitting;
use super::strength::StrengthGraph;
use crate::la::CsrMatrix;

/// `P` with identity C-rows; each F-row has a single `1` at its strongest
/// C-neighbor in `g` (largest `|a_ij|`, ties to the lowest index), or is
/// empty when it has none.
pub fn one_point_interpolation(a: &CsrMatrix, cf: &CfSplitting, g: &StrengthGraph) -> CsrMatrix {
    let n = a.nrows();
    let mut triplets = Vec::with_capacity(n);
    for i in 0..n {
        if let Some(ci) = cf.coarse_index[i] {
            triplets.push((i, ci, 1.0));
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for &j in &g.edges[i] {
            if !cf.is_c(j) {
                continue;
            }
            let w = a.get(i, j).abs();
            // edges are sorted, so a strict comparison keeps the lowest index
            if best.is_none_or(|(bw, _)| w > bw) {
                best = Some((w, j));
            }
        }
        if let Some((_, j)) = best {
            triplets.push((i, cf.coarse_index[j].expect("C-point"), 1.0));
        }
    }
    CsrMatrix::from_triplets(n, cf.num_coarse(), &triplets)
}
