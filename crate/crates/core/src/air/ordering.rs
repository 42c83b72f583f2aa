//! Topological ordering of the block dependency graph.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::la::CsrMatrix;

/// Result of [`topological_block_order`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockOrder {
    /// Block permutation: `order[k]` is the block placed `k`-th. The
    /// permuted matrix is block lower triangular.
    Acyclic(Vec<usize>),
    /// Blocks that lie on at least one directed cycle, sorted.
    Cyclic(Vec<usize>),
}

/// Dependency lists: `deps[i]` holds the blocks `j ≠ i` that block `i`
/// reads from (block `(i, j)` has an entry above `droptol · ‖block row i‖_∞`).
fn block_dependencies(a: &CsrMatrix, b: usize, droptol: f64) -> Result<Vec<Vec<usize>>> {
    if b == 0 || a.nrows() != a.ncols() || a.nrows() % b != 0 {
        return Err(Error::InvalidArgument(format!(
            "block size {b} incompatible with a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let nb = a.nrows() / b;
    let mut deps = vec![Vec::new(); nb];
    for (bi, dep) in deps.iter_mut().enumerate() {
        let rows = bi * b..(bi + 1) * b;
        let norm = rows
            .clone()
            .map(|r| a.row_vals(r).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let cut = droptol * norm;
        for r in rows {
            for (j, v) in a.row(r) {
                let bj = j / b;
                if bj != bi && v.abs() > cut {
                    dep.push(bj);
                }
            }
        }
        dep.sort_unstable();
        dep.dedup();
    }
    Ok(deps)
}

fn kahn(deps: &[Vec<usize>], break_cycles: bool) -> (Vec<usize>, Vec<bool>) {
    let nb = deps.len();
    let mut dependents = vec![Vec::new(); nb];
    let mut indeg = vec![0usize; nb];
    for (i, d) in deps.iter().enumerate() {
        indeg[i] = d.len();
        for &j in d {
            dependents[j].push(i);
        }
    }
    let mut done = vec![false; nb];
    let mut heap: BinaryHeap<Reverse<usize>> =
        (0..nb).filter(|&i| indeg[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(nb);
    while order.len() < nb {
        let next = match heap.pop() {
            Some(Reverse(i)) => i,
            None if break_cycles => {
                // force the block with the fewest unresolved dependencies
                (0..nb)
                    .filter(|&i| !done[i])
                    .min_by_key(|&i| (indeg[i], i))
                    .expect("blocks remain")
            }
            None => break,
        };
        if done[next] {
            continue;
        }
        done[next] = true;
        order.push(next);
        for &k in &dependents[next] {
            if !done[k] {
                indeg[k] -= 1;
                if indeg[k] == 0 {
                    heap.push(Reverse(k));
                }
            }
        }
    }
    (order, done)
}

/// Kahn's algorithm on the block graph (edge `j → i` when block `i` depends
/// on block `j`), smallest ready block first. Returns the order, or the
/// blocks on cycles when none exists.
pub fn topological_block_order(a: &CsrMatrix, b: usize, droptol: f64) -> Result<BlockOrder> {
    let deps = block_dependencies(a, b, droptol)?;
    let (order, done) = kahn(&deps, false);
    if order.len() == deps.len() {
        return Ok(BlockOrder::Acyclic(order));
    }
    let remaining: Vec<usize> = (0..deps.len()).filter(|&i| !done[i]).collect();
    let mut local = vec![usize::MAX; deps.len()];
    let mut g = DiGraph::<usize, ()>::new();
    for &i in &remaining {
        local[i] = g.add_node(i).index();
    }
    for &i in &remaining {
        for &j in &deps[i] {
            if local[j] != usize::MAX {
                g.add_edge((local[j] as u32).into(), (local[i] as u32).into(), ());
            }
        }
    }
    let mut on_cycle: Vec<usize> = tarjan_scc(&g)
        .into_iter()
        .filter(|scc| scc.len() > 1)
        .flatten()
        .map(|n| g[n])
        .collect();
    on_cycle.sort_unstable();
    Ok(BlockOrder::Cyclic(on_cycle))
}

/// A topological order when one exists; otherwise Kahn's order with cycles
/// broken by forcing the block with the fewest unresolved dependencies.
pub fn relaxation_order(a: &CsrMatrix, b: usize, droptol: f64) -> Result<Vec<usize>> {
    let deps = block_dependencies(a, b, droptol)?;
    Ok(kahn(&deps, true).0)
}

/// Largest `|a_ij|` with `block(j)` after `block(i)` in `order`, relative to
/// the block row norm. Zero means the permuted matrix is block lower triangular.
pub fn above_diagonal_ratio(a: &CsrMatrix, b: usize, order: &[usize]) -> f64 {
    let mut pos = vec![0; order.len()];
    for (k, &blk) in order.iter().enumerate() {
        pos[blk] = k;
    }
    let mut worst: f64 = 0.0;
    for (bi, &pi) in pos.iter().enumerate() {
        let rows = bi * b..(bi + 1) * b;
        let norm = rows
            .clone()
            .map(|r| a.row_vals(r).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if norm == 0.0 {
            continue;
        }
        for r in rows {
            for (j, v) in a.row(r) {
                if pos[j / b] > pi {
                    worst = worst.max(v.abs() / norm);
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::air::testutil::{random_lower_triangular, upwind_chain};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chain_is_identity_order() {
        let a = upwind_chain(6);
        assert_eq!(
            topological_block_order(&a, 1, 0.0).unwrap(),
            BlockOrder::Acyclic((0..6).collect())
        );
        // 3 blocks of size 2
        assert_eq!(
            topological_block_order(&a, 2, 0.0).unwrap(),
            BlockOrder::Acyclic(vec![0, 1, 2])
        );
    }

    #[test]
    fn permuted_triangular_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..10 {
            let a = random_lower_triangular(30, 0.2, seed);
            let mut perm: Vec<usize> = (0..30).collect();
            perm.shuffle(&mut rng);
            let pa = a.permute(&perm);
            match topological_block_order(&pa, 1, 0.0).unwrap() {
                BlockOrder::Acyclic(order) => assert_eq!(above_diagonal_ratio(&pa, 1, &order), 0.0),
                BlockOrder::Cyclic(c) => panic!("unexpected cycle {c:?}"),
            }
        }
    }

    #[test]
    fn symmetric_coupling_reports_cycle() {
        let t = vec![
            (0, 0, 2.0),
            (0, 1, -1.0),
            (1, 0, -1.0),
            (1, 1, 2.0),
            (2, 2, 1.0),
            (2, 1, -1.0),
        ];
        let a = CsrMatrix::from_triplets(3, 3, &t);
        assert_eq!(
            topological_block_order(&a, 1, 0.0).unwrap(),
            BlockOrder::Cyclic(vec![0, 1])
        );
        let order = relaxation_order(&a, 1, 0.0).unwrap();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2]);
    }

    #[test]
    fn droptol_ignores_weak_back_edges() {
        let t = vec![(0, 0, 1.0), (0, 1, 1e-9), (1, 0, -1.0), (1, 1, 1.0)];
        let a = CsrMatrix::from_triplets(2, 2, &t);
        assert!(matches!(
            topological_block_order(&a, 1, 0.0).unwrap(),
            BlockOrder::Cyclic(_)
        ));
        assert_eq!(
            topological_block_order(&a, 1, 1e-6).unwrap(),
            BlockOrder::Acyclic(vec![0, 1])
        );
    }
}
