//! Classical Ruge-Stüben CF-splitting.

use std::collections::BTreeSet;

use super::strength::StrengthGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Label {
    C,
    F,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfSplitting {
    pub labels: Vec<Label>,
    /// Coarse index of every C-point.
    pub coarse_index: Vec<Option<usize>>,
}

impl CfSplitting {
    pub fn from_labels(labels: Vec<Label>) -> Self {
        let mut next = 0;
        let coarse_index = labels
            .iter()
            .map(|l| {
                (*l == Label::C).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        CfSplitting {
            labels,
            coarse_index,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_coarse(&self) -> usize {
        self.labels.iter().filter(|&&l| l == Label::C).count()
    }

    pub fn is_c(&self, i: usize) -> bool {
        self.labels[i] == Label::C
    }

    pub fn c_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_c(i)).collect()
    }

    pub fn f_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.is_c(i)).collect()
    }

    /// Every F-point either has a strong C-neighbor in `g` or no strong
    /// connections at all.
    pub fn satisfies_strong_c_rule(&self, g: &StrengthGraph) -> bool {
        (0..self.len()).all(|i| {
            self.is_c(i) || g.edges[i].is_empty() || g.edges[i].iter().any(|&j| self.is_c(j))
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Undecided,
    C,
    F,
}

/// First-pass Ruge-Stüben with measure = number of points depending on `i`,
/// largest measure first and ties to the lowest index, followed by a second
/// pass that promotes any F-point without a strong C-neighbor. Points left
/// undecided once every measure is zero become F.
pub fn rs_coarsen(g: &StrengthGraph) -> CfSplitting {
    let n = g.len();
    let depends_on_me = g.transpose();
    let mut measure: Vec<i64> = depends_on_me.iter().map(|v| v.len() as i64).collect();
    let mut state = vec![State::Undecided; n];
    // ordered by (−measure, index): first() is the next C candidate
    let mut queue: BTreeSet<(i64, usize)> = (0..n).map(|i| (-measure[i], i)).collect();

    let bump = |queue: &mut BTreeSet<(i64, usize)>, measure: &mut [i64], k: usize, delta: i64| {
        queue.remove(&(-measure[k], k));
        measure[k] += delta;
        queue.insert((-measure[k], k));
    };

    while let Some(&(neg, i)) = queue.first() {
        if neg >= 0 {
            break; // nobody left depends on an undecided point
        }
        queue.remove(&(neg, i));
        state[i] = State::C;
        for &j in &depends_on_me[i] {
            if state[j] != State::Undecided {
                continue;
            }
            state[j] = State::F;
            queue.remove(&(-measure[j], j));
            for &k in &g.edges[j] {
                if state[k] == State::Undecided {
                    bump(&mut queue, &mut measure, k, 1);
                }
            }
        }
        for &j in &g.edges[i] {
            if state[j] == State::Undecided {
                bump(&mut queue, &mut measure, j, -1);
            }
        }
    }

    // Leftovers influence nobody and become F. Isolated points are left to
    // relaxation too, unless the graph has no edges at all.
    let leftover = if g.num_edges() == 0 {
        Label::C
    } else {
        Label::F
    };
    let mut labels: Vec<Label> = state
        .iter()
        .map(|s| match s {
            State::C => Label::C,
            State::F => Label::F,
            State::Undecided => leftover,
        })
        .collect();
    for i in 0..n {
        if labels[i] == Label::F
            && !g.edges[i].is_empty()
            && !g.edges[i].iter().any(|&j| labels[j] == Label::C)
        {
            labels[i] = Label::C;
        }
    }
    CfSplitting::from_labels(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::air::strength::strength_graph;
    use crate::air::testutil::{random_sparse, upwind_chain};
    use proptest::prelude::*;

    #[test]
    fn empty_graph_is_all_c() {
        let g = StrengthGraph {
            edges: vec![Vec::new(); 5],
        };
        let cf = rs_coarsen(&g);
        assert_eq!(cf.num_coarse(), 5);
    }

    #[test]
    fn isolated_points_are_f_when_others_couple() {
        let mut edges = vec![Vec::new(); 4];
        edges[1] = vec![0];
        let cf = rs_coarsen(&StrengthGraph { edges });
        assert_eq!(cf.labels, vec![Label::C, Label::F, Label::F, Label::F]);
        assert!(cf.satisfies_strong_c_rule(&StrengthGraph {
            edges: vec![vec![], vec![0], vec![], vec![]]
        }));
    }

    #[test]
    fn upwind_chain_alternates() {
        let g = strength_graph(&upwind_chain(8), 0.25).unwrap();
        let cf = rs_coarsen(&g);
        assert!(cf.satisfies_strong_c_rule(&g));
        for i in 0..8 {
            let expect = if i % 2 == 0 { Label::C } else { Label::F };
            assert_eq!(cf.labels[i], expect, "point {i}");
        }
        // each F has its upwind neighbor as C
        for i in cf.f_points() {
            assert!(cf.is_c(i - 1));
        }
    }

    #[test]
    fn coarse_index_is_dense() {
        let cf = CfSplitting::from_labels(vec![Label::F, Label::C, Label::C, Label::F, Label::C]);
        assert_eq!(cf.coarse_index, vec![None, Some(0), Some(1), None, Some(2)]);
        assert_eq!(cf.c_points(), vec![1, 2, 4]);
    }

    proptest! {
        #[test]
        fn splitting_is_valid_on_random_graphs(seed in 0u64..500, n in 2usize..60) {
            let a = random_sparse(n, 0.15, seed);
            let g = strength_graph(&a, 0.25).unwrap();
            let cf = rs_coarsen(&g);
            prop_assert_eq!(cf.len(), n);
            prop_assert!(cf.satisfies_strong_c_rule(&g));
            prop_assert!(cf.num_coarse() >= 1);
            // deterministic
            prop_assert_eq!(rs_coarsen(&g), cf);
        }
    }
}
