//! Assemble, condense, precondition, solve, reconstruct.

use std::time::Instant;

use crate::air::{build_hierarchy, AirParams};
use crate::error::{Error, Result};
use crate::hdg::{
    assemble_blocks, assemble_subdomain, condense, facet_dim, reconstruct, st_l2_error,
    BlockSystem, CondensedSystem, DiscreteSolution, ElementBasis, ElementMap, ProblemSpec,
};
use crate::krylov::{bicgstab, SolveReport, StageTimings};
use crate::la::{block_diag_inverse_scale, norm2, CsrMatrix};
use crate::mesh::{BoundaryTag, MeshMode, SpaceTimeMesh};
use crate::Point;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverParams {
    pub tol: f64,
    pub maxit: usize,
    pub air: AirParams,
    /// Left-scale `S` by the inverse of its facet-block diagonal before AIR.
    pub block_scaling: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            tol: 1e-12,
            maxit: 5000,
            air: AirParams::default(),
            block_scaling: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub uh: DiscreteSolution,
    /// In slab mode: the slab needing the most iterations, with timings summed
    /// over all slabs.
    pub report: SolveReport,
    /// Iterations of every slab (one entry in all-at-once mode).
    pub slab_iterations: Vec<usize>,
    /// Globally coupled trace DOFs.
    pub coupled_dofs: usize,
    pub l2_error: Option<f64>,
}

/// Builds the mesh for `prob`: structured `nx × nt` grid, tagged, deformed.
pub fn build_problem_mesh(
    prob: &ProblemSpec,
    nx: usize,
    nt: usize,
    mode: MeshMode,
) -> Result<SpaceTimeMesh> {
    let mut mesh = SpaceTimeMesh::build(nx, nt, prob.domain, mode)?;
    mesh.classify_boundary(prob.roles);
    match &prob.deformation {
        Some(d) => mesh.deform(d),
        None => Ok(mesh),
    }
}

/// Number of trace unknowns in the all-at-once system of `mesh`.
pub fn coupled_dofs(mesh: &SpaceTimeMesh, p: usize) -> usize {
    let free = mesh
        .facets()
        .iter()
        .filter(|f| !(f.is_boundary() && f.tag == Some(BoundaryTag::Dirichlet)))
        .count();
    free * facet_dim(p)
}

/// Operator and right-hand side handed to AIR, after optional scaling.
pub fn preconditioned_system(
    cs: &CondensedSystem,
    block_scaling: bool,
) -> Result<(CsrMatrix, Vec<f64>)> {
    if block_scaling {
        let (s, sc) = block_diag_inverse_scale(&cs.s, cs.facet_block_size)?;
        let h = sc.apply(&cs.h);
        Ok((s, h))
    } else {
        Ok((cs.s.clone(), cs.h.clone()))
    }
}

/// Solves `S Λ = H` with AIR-preconditioned BiCGSTAB. The observer sees the
/// facet iterate after every full step.
pub fn solve_condensed(
    cs: &CondensedSystem,
    params: &SolverParams,
    observer: Option<&mut dyn FnMut(usize, &[f64]) -> Option<f64>>,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = cs.s.nrows();
    if n == 0 {
        let report = SolveReport {
            converged: true,
            residual_history: vec![1.0],
            ..SolveReport::default()
        };
        return Ok((Vec::new(), report));
    }
    let t0 = Instant::now();
    let (a, b) = preconditioned_system(cs, params.block_scaling)?;
    let mut air = params.air.clone();
    // after scaling the diagonal blocks are identities, so pointwise suffices
    air.block_size = if params.block_scaling {
        1
    } else {
        cs.facet_block_size
    };
    let hier = build_hierarchy(&a, &air)?;
    let setup = t0.elapsed().as_secs_f64();

    let cycle_reduction = {
        let mb = hier.apply(&b);
        let bn = norm2(&b);
        (bn > 0.0).then(|| norm2(&a.residual(&b, &mb)) / bn)
    };

    let t1 = Instant::now();
    let (lambda, mut report) = bicgstab(
        |v| a.spmv(v).expect("square operator"),
        |v| hier.apply(v),
        &b,
        params.tol,
        params.maxit,
        observer,
    )?;
    report.stage_timings.setup = setup;
    report.stage_timings.solve = t1.elapsed().as_secs_f64();
    report.cycle_reduction = cycle_reduction;
    let hn = norm2(&cs.h);
    if hn > 0.0 {
        report.true_residual = norm2(&cs.s.residual(&cs.h, &lambda)) / hn;
    }
    Ok((lambda, report))
}

fn scatter(cs: &CondensedSystem, u: &[f64], uh: &mut DiscreteSolution) {
    let ne = cs.element_block_size;
    for (k, ce) in cs.elements.iter().enumerate() {
        uh.element_mut(ce.element)
            .copy_from_slice(&u[k * ne..(k + 1) * ne]);
    }
}

fn error_of(mesh: &SpaceTimeMesh, prob: &ProblemSpec, uh: &DiscreteSolution) -> Option<f64> {
    prob.exact
        .as_ref()
        .map(|u| st_l2_error(mesh, uh, &|x| u(x), prob.discontinuity))
}

/// Condensed system of the whole mesh.
pub fn condensed_all_at_once(
    mesh: &SpaceTimeMesh,
    p: usize,
    prob: &ProblemSpec,
) -> Result<(BlockSystem, CondensedSystem)> {
    let bs = assemble_blocks(mesh, p, prob)?;
    let cs = condense(&bs)?;
    Ok((bs, cs))
}

/// Solves the whole space-time domain at once. With `track_error` the L²
/// error and true residual of every full-step iterate are stored in the
/// report histories.
pub fn solve_all_at_once(
    mesh: &SpaceTimeMesh,
    prob: &ProblemSpec,
    p: usize,
    params: &SolverParams,
    track_error: bool,
) -> Result<Solution> {
    let t0 = Instant::now();
    let (_, cs) = condensed_all_at_once(mesh, p, prob)?;
    let assembly = t0.elapsed().as_secs_f64();

    let mut scratch = DiscreteSolution::zeros(mesh, p);
    let mut true_residuals = Vec::new();
    let hn = norm2(&cs.h);
    let mut observe = |_: usize, lambda: &[f64]| -> Option<f64> {
        if hn > 0.0 {
            true_residuals.push(norm2(&cs.s.residual(&cs.h, lambda)) / hn);
        }
        let u = reconstruct(&cs, lambda).ok()?;
        scatter(&cs, &u, &mut scratch);
        error_of(mesh, prob, &scratch)
    };
    let observer: Option<&mut dyn FnMut(usize, &[f64]) -> Option<f64>> =
        if track_error && prob.exact.is_some() {
            Some(&mut observe)
        } else {
            None
        };
    let (lambda, mut report) = solve_condensed(&cs, params, observer)?;
    report.true_residual_history = true_residuals;

    let t2 = Instant::now();
    let u = reconstruct(&cs, &lambda)?;
    let mut uh = DiscreteSolution::zeros(mesh, p);
    scatter(&cs, &u, &mut uh);
    report.stage_timings.assembly = assembly;
    report.stage_timings.reconstruction = t2.elapsed().as_secs_f64();
    let l2_error = error_of(mesh, prob, &uh);
    Ok(Solution {
        uh,
        slab_iterations: vec![report.iterations],
        report,
        coupled_dofs: coupled_dofs(mesh, p),
        l2_error,
    })
}

/// Solves slab after slab, feeding each slab the trace of the solution
/// below its bottom interface.
pub fn solve_slab_by_slab(
    mesh: &SpaceTimeMesh,
    prob: &ProblemSpec,
    p: usize,
    params: &SolverParams,
) -> Result<Solution> {
    let ns = mesh
        .num_slabs()
        .ok_or_else(|| Error::InvalidArgument("slab solve needs a slab-tagged mesh".into()))?;
    let basis = ElementBasis::new(p);
    let mut uh = DiscreteSolution::zeros(mesh, p);
    let mut timings = StageTimings::default();
    let mut worst: Option<SolveReport> = None;
    let mut slab_iterations = Vec::with_capacity(ns);
    let mut converged = true;
    let mut true_residual: f64 = 0.0;
    for n in 0..ns {
        let elements = mesh.slab_elements(n);
        let t0 = Instant::now();
        let prev = &uh;
        let interface = |fid: usize, x: Point, normal: Point| -> f64 {
            let f = &mesh.facets()[fid];
            let below = f
                .elements
                .iter()
                .copied()
                .find(|&e| mesh.elements()[e].slab.is_some_and(|s| s < n));
            match below {
                Some(k) => {
                    let map = ElementMap::new(mesh, k);
                    let (u, grad) = prev.eval(&basis, &map, k, x);
                    let an = prob.normal_velocity(x, normal);
                    -an.min(0.0) * u + prob.nu * grad[1] * normal[1]
                }
                // later slabs sit downstream of an outflow interface
                None => 0.0,
            }
        };
        let bs = assemble_subdomain(mesh, p, prob, &elements, Some(&interface))?;
        let cs = condense(&bs)?;
        timings.assembly += t0.elapsed().as_secs_f64();

        let (lambda, report) = solve_condensed(&cs, params, None)?;
        let t2 = Instant::now();
        let u = reconstruct(&cs, &lambda)?;
        scatter(&cs, &u, &mut uh);
        timings.reconstruction += t2.elapsed().as_secs_f64();
        timings.setup += report.stage_timings.setup;
        timings.solve += report.stage_timings.solve;
        converged &= report.converged;
        true_residual = true_residual.max(report.true_residual);
        slab_iterations.push(report.iterations);
        if worst
            .as_ref()
            .is_none_or(|w| report.iterations > w.iterations)
        {
            worst = Some(report);
        }
    }
    let mut report = worst.unwrap_or_default();
    report.stage_timings = timings;
    report.converged = converged;
    report.true_residual = true_residual;
    let l2_error = error_of(mesh, prob, &uh);
    Ok(Solution {
        uh,
        report,
        slab_iterations,
        coupled_dofs: coupled_dofs(mesh, p),
        l2_error,
    })
}

/// Dispatches on whether `mesh` carries slab tags.
pub fn solve(
    mesh: &SpaceTimeMesh,
    prob: &ProblemSpec,
    p: usize,
    params: &SolverParams,
) -> Result<Solution> {
    match mesh.num_slabs() {
        Some(_) => solve_slab_by_slab(mesh, prob, p, params),
        None => solve_all_at_once(mesh, prob, p, params, false),
    }
}

/// Parameters of the "No Block Inv" ablation: AIR directly on `S`, all other
/// settings unchanged.
pub fn without_block_scaling(params: &SolverParams) -> SolverParams {
    SolverParams {
        block_scaling: false,
        ..params.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::{make_layer1d, make_polyexact, make_pulse1d};
    use crate::mesh::MeshMode;
    use nalgebra::DVector;

    #[test]
    fn schur_matches_monolithic() {
        let prob = make_pulse1d(1e-2, true);
        for p in 1..=3 {
            let mesh = build_problem_mesh(&prob, 4, 4, MeshMode::AllAtOnce).unwrap();
            let (bs, cs) = condensed_all_at_once(&mesh, p, &prob).unwrap();
            let (m, rhs) = bs.monolithic_dense();
            let full = m.lu().solve(&rhs).unwrap();
            let nu = bs.num_element_dofs();
            let lambda =
                cs.s.to_dense()
                    .lu()
                    .solve(&DVector::from_column_slice(&cs.h))
                    .unwrap();
            let u = reconstruct(&cs, lambda.as_slice()).unwrap();
            let du = (DVector::from_vec(u) - full.rows(0, nu)).amax();
            let dl = (lambda - full.rows(nu, full.len() - nu)).amax();
            assert!(du < 1e-10 && dl < 1e-10, "p={p}: {du:e} {dl:e}");
        }
    }

    #[test]
    fn polyexact_is_reproduced() {
        for p in 1..=3 {
            let prob = make_polyexact(p).unwrap();
            for mode in [MeshMode::AllAtOnce, MeshMode::SlabBySlab] {
                let mesh = build_problem_mesh(&prob, 3, 3, mode).unwrap();
                let sol = solve(&mesh, &prob, p, &SolverParams::default()).unwrap();
                assert!(sol.report.converged);
                let e = sol.l2_error.unwrap();
                assert!(e < 1e-10, "p={p} {mode:?}: {e:e}");
            }
        }
    }

    #[test]
    fn layer_converges_with_air() {
        let prob = make_layer1d();
        let mesh = build_problem_mesh(&prob, 12, 8, MeshMode::AllAtOnce).unwrap();
        let sol = solve(&mesh, &prob, 1, &SolverParams::default()).unwrap();
        assert!(sol.report.converged);
        assert!(sol.report.iterations <= 3, "{}", sol.report.iterations);
    }

    #[test]
    fn slab_and_all_at_once_agree() {
        let prob = make_pulse1d(1e-2, false);
        let mut errs = Vec::new();
        for mode in [MeshMode::AllAtOnce, MeshMode::SlabBySlab] {
            let mesh = build_problem_mesh(&prob, 12, 8, mode).unwrap();
            errs.push(
                solve(&mesh, &prob, 2, &SolverParams::default())
                    .unwrap()
                    .l2_error
                    .unwrap(),
            );
        }
        assert!(
            errs[0] < 2.0 * errs[1] && errs[1] < 2.0 * errs[0],
            "{errs:?}"
        );
    }

    #[test]
    fn error_history_is_tracked() {
        let prob = make_pulse1d(1e-2, false);
        let mesh = build_problem_mesh(&prob, 8, 8, MeshMode::AllAtOnce).unwrap();
        let sol = solve_all_at_once(&mesh, &prob, 1, &SolverParams::default(), true).unwrap();
        assert_eq!(sol.report.error_history.len(), sol.report.iterations);
        let last = *sol.report.error_history.last().unwrap();
        assert!((last - sol.l2_error.unwrap()).abs() < 1e-8);
    }
}
