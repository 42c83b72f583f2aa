//! Zienkiewicz-Zhu error indicators, fixed-fraction marking and the
//! solve, estimate, mark, refine loop.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hdg::quadrature::triangle_rule;
use crate::hdg::{DiscreteSolution, ElementBasis, ElementMap, ProblemSpec};
use crate::mesh::{MeshMode, SpaceTimeMesh};
use crate::solver::{build_problem_mesh, solve, SolverParams};
use crate::Point;

/// Default fraction of elements marked per cycle.
pub const DEFAULT_MARK_FRACTION: f64 = 0.1;

/// Refinement stops with an error beyond this many elements.
pub const ELEMENT_BUDGET: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorIndicatorField {
    /// `η_K ≥ 0` per element.
    pub eta: Vec<f64>,
}

impl ErrorIndicatorField {
    /// `(Σ η_K²)^{1/2}`.
    pub fn global(&self) -> f64 {
        self.eta.iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }
}

/// Reference coordinates of the three element vertices.
const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

fn element_gradient(basis: &ElementBasis, map: &ElementMap, c: &[f64], xi: [f64; 2]) -> Point {
    let n = basis.dim();
    let mut v = vec![0.0; n];
    let mut g = vec![[0.0; 2]; n];
    basis.eval(xi, &mut v, &mut g);
    let mut rg = [0.0; 2];
    for i in 0..n {
        rg[0] += c[i] * g[i][0];
        rg[1] += c[i] * g[i][1];
    }
    map.gradient(rg)
}

/// ZZ indicator: the space-time gradient of `u_h` is averaged at every
/// vertex over the adjacent elements (area weighted, each element evaluated
/// at that vertex), interpolated linearly, and compared with `∇̂u_h` in
/// `L²(K)`.
pub fn zz_estimate(mesh: &SpaceTimeMesh, uh: &DiscreteSolution) -> Result<ErrorIndicatorField> {
    if uh.coeffs.len() != mesh.num_elements() * uh.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} elements of degree {}",
            uh.coeffs.len(),
            mesh.num_elements(),
            uh.p
        )));
    }
    let basis = ElementBasis::new(uh.p);
    let nv = mesh.vertices().len();
    let mut sum = vec![[0.0; 2]; nv];
    let mut weight = vec![0.0; nv];
    for (k, e) in mesh.elements().iter().enumerate() {
        let map = ElementMap::new(mesh, k);
        let area = 0.5 * map.det.abs();
        for (l, &v) in e.vertices.iter().enumerate() {
            let g = element_gradient(&basis, &map, uh.element(k), REF_VERTICES[l]);
            sum[v][0] += area * g[0];
            sum[v][1] += area * g[1];
            weight[v] += area;
        }
    }
    let recovered: Vec<Point> = sum
        .iter()
        .zip(&weight)
        .map(|(s, w)| {
            if *w > 0.0 {
                [s[0] / w, s[1] / w]
            } else {
                [0.0; 2]
            }
        })
        .collect();

    // (P1 − P_{p−1})² has degree 2 max(1, p − 1)
    let rule = triangle_rule(2 * uh.p.max(2));
    let eta = (0..mesh.num_elements())
        .into_par_iter()
        .map(|k| {
            let map = ElementMap::new(mesh, k);
            let gv = mesh.elements()[k].vertices.map(|v| recovered[v]);
            let mut acc = 0.0;
            for (xi, w) in rule.points.iter().zip(&rule.weights) {
                let lam = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
                let g = element_gradient(&basis, &map, uh.element(k), *xi);
                for d in 0..2 {
                    let r = lam[0] * gv[0][d] + lam[1] * gv[1][d] + lam[2] * gv[2][d];
                    acc += w * (r - g[d]).powi(2);
                }
            }
            (acc * map.det.abs()).sqrt()
        })
        .collect();
    Ok(ErrorIndicatorField { eta })
}

/// The `⌈fraction · n⌉` elements with the largest indicators, ties going to
/// the lower id. Returned sorted by id.
pub fn mark_fixed_fraction(eta: &ErrorIndicatorField, fraction: f64) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "marking fraction {fraction} not in (0, 1]"
        )));
    }
    if eta.is_empty() {
        return Err(Error::InvalidArgument("empty indicator field".into()));
    }
    let n = eta.len();
    let count = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut ids: Vec<usize> = (0..n).collect();
    ids.sort_by(|&a, &b| eta.eta[b].total_cmp(&eta.eta[a]).then(a.cmp(&b)));
    let mut marked = ids[..count].to_vec();
    marked.sort_unstable();
    Ok(marked)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmrCycle {
    pub cycle: usize,
    pub elements: usize,
    /// Globally coupled trace DOFs.
    pub n: usize,
    pub l2_error: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub median_h: f64,
}

#[derive(Clone, Debug)]
pub struct AmrRun {
    pub cycles: Vec<AmrCycle>,
    /// The mesh solved in each cycle.
    pub meshes: Vec<SpaceTimeMesh>,
}

impl AmrRun {
    pub fn final_mesh(&self) -> &SpaceTimeMesh {
        self.meshes.last().expect("at least one cycle")
    }
}

/// Median element diameter; the mean of the two middle values for an even
/// count.
pub fn median_h(mesh: &SpaceTimeMesh) -> f64 {
    let mut h: Vec<f64> = (0..mesh.num_elements())
        .map(|k| mesh.element_geometry(k).h)
        .collect();
    if h.is_empty() {
        return f64::NAN;
    }
    h.sort_by(f64::total_cmp);
    let m = h.len() / 2;
    if h.len() % 2 == 1 {
        h[m]
    } else {
        0.5 * (h[m - 1] + h[m])
    }
}

/// Starting from a uniform `nx × nt` mesh: solve, estimate, mark, bisect,
/// `cycles` times, followed by a final solve. `cycles = 0` is a single
/// uniform solve.
#[allow(clippy::too_many_arguments)]
pub fn amr_loop(
    prob: &ProblemSpec,
    p: usize,
    nx: usize,
    nt: usize,
    mode: MeshMode,
    cycles: usize,
    fraction: f64,
    params: &SolverParams,
) -> Result<AmrRun> {
    let mut mesh = build_problem_mesh(prob, nx, nt, mode)?;
    let mut run = AmrRun {
        cycles: Vec::with_capacity(cycles + 1),
        meshes: Vec::with_capacity(cycles + 1),
    };
    for cycle in 0..=cycles {
        let sol = solve(&mesh, prob, p, params)?;
        run.cycles.push(AmrCycle {
            cycle,
            elements: mesh.num_elements(),
            n: sol.coupled_dofs,
            l2_error: sol.l2_error,
            iterations: sol.report.iterations,
            converged: sol.report.converged,
            median_h: median_h(&mesh),
        });
        let next = if cycle < cycles {
            let eta = zz_estimate(&mesh, &sol.uh)?;
            let marked = mark_fixed_fraction(&eta, fraction)?;
            Some(mesh.bisect_refine(&marked, ELEMENT_BUDGET)?)
        } else {
            None
        };
        run.meshes.push(mesh);
        match next {
            Some(m) => mesh = m,
            None => break,
        }
    }
    Ok(run)
}

/// Fraction of the elements no larger than the median diameter that touch
/// the line `c₀ + c₁ t + c₂ x = 0`. After a few cycles most elements share
/// the smallest size, so the median itself is included.
pub fn layer_fraction(mesh: &SpaceTimeMesh, line: [f64; 3]) -> f64 {
    let med = median_h(mesh);
    let small: Vec<usize> = (0..mesh.num_elements())
        .filter(|&k| mesh.element_geometry(k).h <= med)
        .collect();
    let hits = small
        .iter()
        .filter(|&&k| {
            let phi = mesh
                .element_vertices(k)
                .map(|x| line[0] + line[1] * x[0] + line[2] * x[1]);
            phi.iter().any(|&v| v >= 0.0) && phi.iter().any(|&v| v <= 0.0)
        })
        .count();
    hits as f64 / small.len() as f64
}
