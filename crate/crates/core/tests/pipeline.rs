//! End-to-end checks of assembly, condensation and the AIR solve.

use nalgebra::DVector;
use sthdg::air::{rs_coarsen, strength_graph};
use sthdg::cases::{make_layer1d, make_polyexact, make_pulse1d};
use sthdg::hdg::reconstruct;
use sthdg::mesh::MeshMode;
use sthdg::solver::{
    build_problem_mesh, condensed_all_at_once, preconditioned_system, solve, SolverParams,
};

#[test]
fn condensed_solve_matches_monolithic_dense_solve() {
    let cases = [
        make_pulse1d(1e-2, true),
        make_pulse1d(1e-6, false),
        make_layer1d(),
    ];
    for prob in &cases {
        for p in 1..=3 {
            // 4 × 4 cells, 32 elements
            let mesh = build_problem_mesh(prob, 4, 4, MeshMode::AllAtOnce).unwrap();
            assert!(mesh.num_elements() <= 64);
            let (bs, cs) = condensed_all_at_once(&mesh, p, prob).unwrap();
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
            assert!(
                du < 1e-10 && dl < 1e-10,
                "{} p={p}: {du:e} {dl:e}",
                prob.name
            );
        }
    }
}

#[test]
fn polynomial_solutions_are_exact() {
    for p in 1..=3 {
        for deform in [false, true] {
            let mut prob = make_polyexact(p).unwrap();
            if deform {
                prob.deformation = Some(sthdg::mesh::DeformationMap::new(
                    sthdg::cases::DEFORMATION_AMPLITUDE,
                ));
            }
            for mode in [MeshMode::AllAtOnce, MeshMode::SlabBySlab] {
                let mesh = build_problem_mesh(&prob, 6, 4, mode).unwrap();
                let sol = solve(&mesh, &prob, p, &SolverParams::default()).unwrap();
                let e = sol.l2_error.unwrap();
                assert!(
                    sol.report.converged && e < 1e-10,
                    "p={p} deform={deform} {mode:?}: {e:e}"
                );
            }
        }
    }
}

#[test]
fn coarse_points_sit_upstream_of_fine_points() {
    // â = (1, 1) in (t, x); C-points should be found against the flow
    let prob = make_layer1d();
    let mesh = build_problem_mesh(&prob, 24, 16, MeshMode::AllAtOnce).unwrap();
    let (bs, cs) = condensed_all_at_once(&mesh, 1, &prob).unwrap();
    let (a, _) = preconditioned_system(&cs, true).unwrap();
    let g = strength_graph(&a, SolverParams::default().air.theta_c).unwrap();
    let cf = rs_coarsen(&g);
    let b = cs.facet_block_size;
    let mid = |i: usize| mesh.facet_midpoint(bs.facet_ids[i / b]);
    let (mut sum, mut count) = (0.0, 0usize);
    for i in cf.f_points() {
        for &j in g.edges[i].iter().filter(|&&j| cf.is_c(j)) {
            let (xi, xj) = (mid(i), mid(j));
            let d = [xj[0] - xi[0], xj[1] - xi[1]];
            let len = d[0].hypot(d[1]);
            if len > 0.0 {
                sum += -(d[0] + d[1]) / (len * 2f64.sqrt());
                count += 1;
            }
        }
    }
    assert!(count > 0);
    let mean = sum / count as f64;
    assert!(mean > 0.0, "mean projection {mean}");
}

#[test]
fn slab_and_all_at_once_errors_agree() {
    for nu in [1e-2, 1e-6] {
        for p in 1..=2 {
            let prob = make_pulse1d(nu, true);
            let errs: Vec<f64> = [MeshMode::AllAtOnce, MeshMode::SlabBySlab]
                .into_iter()
                .map(|mode| {
                    let mesh = build_problem_mesh(&prob, 24, 16, mode).unwrap();
                    solve(&mesh, &prob, p, &SolverParams::default())
                        .unwrap()
                        .l2_error
                        .unwrap()
                })
                .collect();
            assert!(
                errs[0] < 2.0 * errs[1] && errs[1] < 2.0 * errs[0],
                "nu={nu} p={p}: {errs:?}"
            );
        }
    }
}
