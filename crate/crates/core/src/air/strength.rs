//! Magnitude-based strength of connection.

use crate::error::{Error, Result};
use crate::la::CsrMatrix;

/// Directed strength graph: `edges[i]` lists the points `j` that strongly
/// influence `i` (edge `i → j`), in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrengthGraph {
    pub edges: Vec<Vec<usize>>,
}

impl StrengthGraph {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// `transpose()[j]` lists the points that depend strongly on `j`.
    pub fn transpose(&self) -> Vec<Vec<usize>> {
        let mut t = vec![Vec::new(); self.len()];
        for (i, row) in self.edges.iter().enumerate() {
            for &j in row {
                t[j].push(i);
            }
        }
        t
    }
}

/// Edge `i → j` iff `|a_ij| ≥ θ · max_{k≠i} |a_ik|` and `a_ij ≠ 0`.
pub fn strength_graph(a: &CsrMatrix, theta: f64) -> Result<StrengthGraph> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "strength threshold {theta} not in (0, 1)"
        )));
    }
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "strength graph of a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let edges = (0..a.nrows())
        .map(|i| {
            let max = a
                .row(i)
                .filter(|&(j, _)| j != i)
                .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
            if max == 0.0 {
                return Vec::new();
            }
            a.row(i)
                .filter(|&(j, v)| j != i && v != 0.0 && v.abs() >= theta * max)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    Ok(StrengthGraph { edges })
}
