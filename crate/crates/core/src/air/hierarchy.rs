//! AIR hierarchy setup and V(0,1) cycles.

use nalgebra::{DMatrix, DVector};

use super::coarsen::{rs_coarsen, CfSplitting};
use super::interpolation::one_point_interpolation;
use super::relax::{relax, BlockPlan, Relaxation};
use super::restriction::lair_restriction;
use super::strength::strength_graph;
use crate::error::{Error, Result};
use crate::la::{CsrMatrix, DenseLu};

#[derive(Clone, Debug, PartialEq)]
pub struct AirParams {
    /// Strength threshold for CF-splitting and interpolation.
    pub theta_c: f64,
    /// Strength threshold for restriction neighborhoods.
    pub theta_r: f64,
    pub max_coarse: usize,
    pub max_levels: usize,
    pub relaxation: Relaxation,
    /// Block size used by ordered block Gauss-Seidel on the finest level.
    pub block_size: usize,
    /// Relative threshold for edges of the ordering graph.
    pub droptol: f64,
}

impl Default for AirParams {
    fn default() -> Self {
        AirParams {
            theta_c: 0.2,
            theta_r: 0.3,
            max_coarse: 40,
            max_levels: 25,
            relaxation: Relaxation::FThenAllFgs,
            block_size: 1,
            droptol: 0.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AirLevel {
    pub a: CsrMatrix,
    pub r: CsrMatrix,
    pub p: CsrMatrix,
    pub cf: CfSplitting,
    pub plan: Option<BlockPlan>,
    /// Local restriction solves that used the regularized fallback.
    pub regularized: usize,
}

#[derive(Clone, Debug)]
pub struct AirHierarchy {
    pub levels: Vec<AirLevel>,
    pub coarse_matrix: CsrMatrix,
    coarse: CoarseSolve,
    pub relaxation: Relaxation,
}

#[derive(Clone, Debug)]
enum CoarseSolve {
    Dense(DenseLu),
    /// The coarsest operator has no off-diagonal entries.
    Diagonal(Vec<f64>),
}

impl CoarseSolve {
    fn new(a: &CsrMatrix) -> Result<Self> {
        if !is_diagonal(a) {
            return Ok(CoarseSolve::Dense(DenseLu::new(a.to_dense())?));
        }
        let d = a.diagonal();
        if let Some(i) = d.iter().position(|&v| v == 0.0) {
            return Err(Error::Singular(format!(
                "coarsest diagonal entry {i} is zero"
            )));
        }
        Ok(CoarseSolve::Diagonal(d))
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        match self {
            CoarseSolve::Dense(lu) => lu.solve(b),
            CoarseSolve::Diagonal(d) => b.iter().zip(d).map(|(bi, di)| bi / di).collect(),
        }
    }
}

fn is_diagonal(a: &CsrMatrix) -> bool {
    (0..a.nrows()).all(|i| a.row(i).all(|(j, v)| j == i || v == 0.0))
}

/// `A_c = R A P`, no dropping.
pub fn galerkin_coarse(r: &CsrMatrix, a: &CsrMatrix, p: &CsrMatrix) -> Result<CsrMatrix> {
    r.spgemm(a)?.spgemm(p)
}

pub fn build_hierarchy(a: &CsrMatrix, params: &AirParams) -> Result<AirHierarchy> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "AIR on a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    if params.max_levels == 0 {
        return Err(Error::InvalidArgument(
            "max_levels must be at least 1".into(),
        ));
    }
    let mut levels = Vec::new();
    let mut current = a.clone();
    loop {
        let n = current.nrows();
        // a diagonal level is solved exactly whatever its size
        if n <= params.max_coarse || levels.len() + 1 >= params.max_levels || is_diagonal(&current)
        {
            break;
        }
        let g_c = strength_graph(&current, params.theta_c)?;
        let cf = rs_coarsen(&g_c);
        let nc = cf.num_coarse();
        if nc == n {
            if n <= 4 * params.max_coarse {
                break;
            }
            return Err(Error::CoarseningStagnation {
                level: levels.len(),
                rows: n,
            });
        }
        let g_r = strength_graph(&current, params.theta_r)?;
        let restriction = lair_restriction(&current, &cf, &g_r)?;
        let p = one_point_interpolation(&current, &cf, &g_c);
        let coarse = galerkin_coarse(&restriction.r, &current, &p)?;
        let plan = if params.relaxation == Relaxation::OrderedBlockGs {
            let b = if levels.is_empty() {
                params.block_size
            } else {
                1
            };
            Some(BlockPlan::new(&current, b, params.droptol)?)
        } else {
            None
        };
        levels.push(AirLevel {
            a: current,
            r: restriction.r,
            p,
            cf,
            plan,
            regularized: restriction.regularized,
        });
        current = coarse;
    }
    let coarse = CoarseSolve::new(&current)?;
    Ok(AirHierarchy {
        levels,
        coarse_matrix: current,
        coarse,
        relaxation: params.relaxation,
    })
}

impl AirHierarchy {
    pub fn num_levels(&self) -> usize {
        self.levels.len() + 1
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels
            .iter()
            .map(|l| l.a.nrows())
            .chain(std::iter::once(self.coarse_matrix.nrows()))
            .collect()
    }

    /// `Σ n_ℓ / n_0`.
    pub fn grid_complexity(&self) -> f64 {
        let s = self.level_sizes();
        s.iter().sum::<usize>() as f64 / s[0] as f64
    }

    /// `Σ nnz_ℓ / nnz_0`.
    pub fn operator_complexity(&self) -> f64 {
        let nnz: Vec<usize> = self
            .levels
            .iter()
            .map(|l| l.a.nnz())
            .chain(std::iter::once(self.coarse_matrix.nnz()))
            .collect();
        nnz.iter().sum::<usize>() as f64 / nnz[0].max(1) as f64
    }

    pub fn regularized_solves(&self) -> usize {
        self.levels.iter().map(|l| l.regularized).sum()
    }

    fn cycle(&self, l: usize, b: &[f64], x: &mut [f64]) -> Result<()> {
        let Some(level) = self.levels.get(l) else {
            x.copy_from_slice(&self.coarse.solve(b));
            return Ok(());
        };
        let r = level.a.residual(b, x);
        let rc = level.r.spmv(&r)?;
        let mut xc = vec![0.0; rc.len()];
        self.cycle(l + 1, &rc, &mut xc)?;
        let corr = level.p.spmv(&xc)?;
        for (xi, ci) in x.iter_mut().zip(&corr) {
            *xi += ci;
        }
        relax(
            &level.a,
            b,
            x,
            self.relaxation,
            Some(&level.cf),
            level.plan.as_ref(),
        )
    }

    /// One V(0,1) cycle on `A x = b` starting from `x`.
    pub fn vcycle(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        let n = self.level_sizes()[0];
        if b.len() != n || x.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "V-cycle on {n} rows with |b| = {}",
                b.len()
            )));
        }
        self.cycle(0, b, x)
    }

    /// Preconditioner action: one cycle from a zero initial guess.
    pub fn apply(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; b.len()];
        self.cycle(0, b, &mut x)
            .expect("dimensions checked at setup");
        x
    }
}

/// Dense two-level error propagation `e − P (RAP)⁻¹ R A e`.
pub fn coarse_grid_correction_dense(
    a: &DMatrix<f64>,
    r: &DMatrix<f64>,
    p: &DMatrix<f64>,
    e: &DVector<f64>,
) -> Result<DVector<f64>> {
    let ac = r * a * p;
    let lu = DenseLu::new(ac)?;
    let rhs = r * (a * e);
    let ec = DVector::from_vec(lu.solve(rhs.as_slice()));
    Ok(e - p * ec)
}
