//! Approximate ideal restriction (AIR) algebraic multigrid.

mod coarsen;
mod hierarchy;
mod interpolation;
mod ordering;
mod relax;
mod restriction;
mod strength;

pub use coarsen::{rs_coarsen, CfSplitting, Label};
pub use hierarchy::{
    build_hierarchy, coarse_grid_correction_dense, galerkin_coarse, AirHierarchy, AirLevel,
    AirParams,
};
pub use interpolation::one_point_interpolation;
pub use ordering::{above_diagonal_ratio, relaxation_order, topological_block_order, BlockOrder};
pub use relax::{relax, BlockPlan, Relaxation, RELAXATION_NAMES};
pub use restriction::{
    ideal_restriction_dense, lair_restriction, Restriction, LOCAL_REGULARIZATION,
};
pub use strength::{strength_graph, StrengthGraph};

#[cfg(test)]
pub(crate) mod testutil {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::la::CsrMatrix;

    /// Upwind bidiagonal chain: `1` on the diagonal, `−1` below.
    pub fn upwind_chain(n: usize) -> CsrMatrix {
        let mut t = Vec::with_capacity(2 * n);
        for i in 0..n {
            t.push((i, i, 1.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    /// Random nonsymmetric matrix with a dominant diagonal.
    pub fn random_sparse(n: usize, density: f64, seed: u64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            let mut sum = 0.0;
            for j in (0..n).filter(|&j| j != i) {
                if rng.gen_bool(density) {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    sum += v.abs();
                    t.push((i, j, v));
                }
            }
            t.push((i, i, 1.0 + sum));
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    /// Random lower triangular matrix with unit-ish diagonal.
    pub fn random_lower_triangular(n: usize, density: f64, seed: u64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..i {
                if rng.gen_bool(density) {
                    t.push((i, j, rng.gen_range(-1.0..1.0)));
                }
            }
            t.push((i, i, rng.gen_range(1.0..2.0)));
        }
        CsrMatrix::from_triplets(n, n, &t)
    }
}
