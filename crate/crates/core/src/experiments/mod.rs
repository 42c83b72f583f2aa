//! Batch experiments: each kind computes typed rows and writes them as CSV.
//!
//! Numbers are printed with a fixed format so that two runs of the same
//! configuration produce byte-identical files. Wall-clock data goes to
//! `timings.csv` only.

mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub use config::{
    mode_name, parse_mode_arg, Config, ExperimentConfig, ExperimentKind, Overrides, DEFAULTS,
};

use crate::air::{
    above_diagonal_ratio, relax, relaxation_order, rs_coarsen, strength_graph,
    topological_block_order, BlockOrder, BlockPlan, Label, Relaxation,
};
use crate::amr::{amr_loop, layer_fraction, AmrCycle};
use crate::cases;
use crate::error::{Error, Result};
use crate::hdg::ProblemSpec;
use crate::krylov::StageTimings;
use crate::la::{block_diag_inverse_scale, norm2, write_matrix_market, write_vector};
use crate::mesh::{write_mesh, MeshMode};
use crate::solver::{
    build_problem_mesh, condensed_all_at_once, preconditioned_system, solve, solve_all_at_once,
    without_block_scaling, SolverParams,
};

/// Seven significant digits in scientific notation.
pub fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    format!("{v:.6e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

fn fmt_mesh((nx, nt): (usize, usize)) -> String {
    format!("{nx}x{nt}")
}

fn fmt_iters(it: usize, converged: bool) -> String {
    if converged {
        it.to_string()
    } else {
        "-".into()
    }
}

/// The problem of `cfg` for a given degree and diffusivity. `layer1d` takes
/// `nu` as given; its exact solution is only exact for `nu = 0`.
pub fn problem(cfg: &ExperimentConfig, p: usize, nu: f64) -> Result<ProblemSpec> {
    let mut prob = cases::by_name(&cfg.case, nu, p, cfg.deform)?;
    if cfg.case == "layer1d" {
        prob.nu = nu;
    }
    Ok(prob)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergeRow {
    pub mode: MeshMode,
    pub p: usize,
    pub nu: f64,
    pub mesh: (usize, usize),
    pub elements: usize,
    pub dofs: usize,
    pub error: f64,
    /// `log2(e_coarse / e_fine)`; absent on the first mesh.
    pub rate: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRow {
    pub mode: MeshMode,
    pub p: usize,
    pub mesh: (usize, usize),
    pub dofs: usize,
    /// `(iterations, converged)` per ν, in config order.
    pub counts: Vec<(usize, bool)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StagnationRow {
    pub nu: f64,
    pub mesh: (usize, usize),
    pub iteration: usize,
    pub precond_residual: f64,
    pub true_residual: f64,
    pub l2_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniformRow {
    pub mesh: (usize, usize),
    pub elements: usize,
    pub n: usize,
    pub l2_error: Option<f64>,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmrResult {
    pub cycles: Vec<AmrCycle>,
    /// Share of below-median elements touching the layer, per cycle.
    pub layer_fraction: Vec<Option<f64>>,
    /// Uniform error interpolated log-log at each cycle's N.
    pub uniform_at_n: Vec<Option<f64>>,
    pub uniform: Vec<UniformRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelaxRow {
    pub cycle: usize,
    pub n: usize,
    /// `(iterations, converged)` for jacobi, fgs, f_then_all_fgs,
    /// ordered_block_gs, and the configured relaxation without block scaling.
    pub counts: [(usize, bool); 5],
}

pub const RELAX_COLUMNS: [&str; 5] = [
    "jacobi",
    "fgs",
    "f_then_all_fgs",
    "ordered_block_gs",
    "no_block_inv",
];

#[derive(Clone, Debug, PartialEq)]
pub struct OrderRow {
    pub mesh: (usize, usize),
    pub nu: f64,
    pub blocks: usize,
    pub acyclic: bool,
    /// Blocks on a dependency cycle (empty when acyclic).
    pub cyclic_blocks: usize,
    /// Stored nonzeros above the block diagonal in the order used for the sweep.
    pub above_diagonal: usize,
    pub above_diagonal_ratio: f64,
    /// Relative residual after one ordered block Gauss-Seidel sweep from zero.
    pub sweep_residual: f64,
    /// Whether the scaled matrix also admits a pointwise (block size 1) order.
    pub scalar_acyclic: bool,
}

/// Convergence ladders for every mode, degree and ν.
pub fn run_converge(
    cfg: &ExperimentConfig,
    timings: &mut Vec<(String, StageTimings)>,
) -> Result<Vec<ConvergeRow>> {
    let mut rows = Vec::new();
    for &mode in &cfg.modes {
        for &p in &cfg.p {
            for &nu in &cfg.nu {
                let prob = problem(cfg, p, nu)?;
                let mut prev: Option<f64> = None;
                for &(nx, nt) in cfg.ladder(p) {
                    let mesh = build_problem_mesh(&prob, nx, nt, mode)?;
                    let sol = solve(&mesh, &prob, p, &cfg.solver)?;
                    let error = sol.l2_error.unwrap_or(f64::NAN);
                    timings.push((
                        format!("converge {} p={p} nu={nu:e} {nx}x{nt}", mode_name(mode)),
                        sol.report.stage_timings,
                    ));
                    rows.push(ConvergeRow {
                        mode,
                        p,
                        nu,
                        mesh: (nx, nt),
                        elements: mesh.num_elements(),
                        dofs: sol.coupled_dofs,
                        error,
                        rate: prev.map(|e0| (e0 / error).log2()),
                        iterations: sol.report.iterations,
                        converged: sol.report.converged,
                    });
                    prev = Some(error);
                }
            }
        }
    }
    Ok(rows)
}

/// Iteration counts on each ladder mesh for every ν.
pub fn run_iterations(
    cfg: &ExperimentConfig,
    timings: &mut Vec<(String, StageTimings)>,
) -> Result<Vec<IterationRow>> {
    let mut rows = Vec::new();
    for &mode in &cfg.modes {
        for &p in &cfg.p {
            for &(nx, nt) in cfg.ladder(p) {
                let mut counts = Vec::with_capacity(cfg.nu.len());
                let mut dofs = 0;
                for &nu in &cfg.nu {
                    let prob = problem(cfg, p, nu)?;
                    let mesh = build_problem_mesh(&prob, nx, nt, mode)?;
                    let sol = solve(&mesh, &prob, p, &cfg.solver)?;
                    dofs = sol.coupled_dofs;
                    timings.push((
                        format!("iterations {} p={p} nu={nu:e} {nx}x{nt}", mode_name(mode)),
                        sol.report.stage_timings,
                    ));
                    counts.push((sol.report.iterations, sol.report.converged));
                }
                rows.push(IterationRow {
                    mode,
                    p,
                    mesh: (nx, nt),
                    dofs,
                    counts,
                });
            }
        }
    }
    Ok(rows)
}

/// Residual and error after every full BiCGSTAB step. Always all-at-once,
/// since the error of a partially converged slab sequence is not defined
/// per step.
pub fn run_stagnation(
    cfg: &ExperimentConfig,
    timings: &mut Vec<(String, StageTimings)>,
) -> Result<Vec<StagnationRow>> {
    let mut rows = Vec::new();
    let p = cfg.p[0];
    for &nu in &cfg.nu {
        let prob = problem(cfg, p, nu)?;
        if prob.exact.is_none() {
            return Err(Error::InvalidArgument(format!(
                "case {} has no exact solution",
                cfg.case
            )));
        }
        for &(nx, nt) in cfg.ladder(p) {
            let mesh = build_problem_mesh(&prob, nx, nt, MeshMode::AllAtOnce)?;
            let sol = solve_all_at_once(&mesh, &prob, p, &cfg.solver, true)?;
            let r = &sol.report;
            timings.push((
                format!("stagnation p={p} nu={nu:e} {nx}x{nt}"),
                r.stage_timings,
            ));
            let last = r.residual_history.last().copied().unwrap_or(f64::NAN);
            for (k, &e) in r.error_history.iter().enumerate() {
                let it = k + 1;
                // a half-step exit leaves no full-step entry for the last iterate
                let res = r.residual_history.get(2 * it).copied().unwrap_or(last);
                rows.push(StagnationRow {
                    nu,
                    mesh: (nx, nt),
                    iteration: it,
                    precond_residual: res,
                    true_residual: r.true_residual_history.get(k).copied().unwrap_or(f64::NAN),
                    l2_error: e,
                });
            }
        }
    }
    Ok(rows)
}

/// `y(x)` on the log-log polyline through `pts` (sorted by x), extrapolating
/// the end segments.
pub fn loglog_interp(pts: &[(f64, f64)], x: f64) -> Option<f64> {
    if pts.len() < 2 || x <= 0.0 || pts.iter().any(|&(a, b)| a <= 0.0 || b <= 0.0) {
        return None;
    }
    let k = pts
        .windows(2)
        .position(|w| x <= w[1].0)
        .unwrap_or(pts.len() - 2);
    let (x0, y0) = (pts[k].0.ln(), pts[k].1.ln());
    let (x1, y1) = (pts[k + 1].0.ln(), pts[k + 1].1.ln());
    let s = (y1 - y0) / (x1 - x0);
    Some((y0 + s * (x.ln() - x0)).exp())
}

/// Adaptive loop from the first ladder mesh plus the uniform ladder for
/// comparison. Returns the final meshes of every cycle as well.
pub fn run_amr(
    cfg: &ExperimentConfig,
    timings: &mut Vec<(String, StageTimings)>,
) -> Result<(AmrResult, Vec<crate::mesh::SpaceTimeMesh>)> {
    let p = cfg.p[0];
    let prob = problem(cfg, p, cfg.nu[0])?;
    let (nx, nt) = cfg.ladder(p)[0];
    let mode = cfg.modes[0];
    let run = amr_loop(
        &prob,
        p,
        nx,
        nt,
        mode,
        cfg.cycles,
        cfg.fraction,
        &cfg.solver,
    )?;
    let mut uniform = Vec::new();
    for &(nx, nt) in cfg.ladder(p) {
        let mesh = build_problem_mesh(&prob, nx, nt, mode)?;
        let sol = solve(&mesh, &prob, p, &cfg.solver)?;
        timings.push((format!("amr uniform {nx}x{nt}"), sol.report.stage_timings));
        uniform.push(UniformRow {
            mesh: (nx, nt),
            elements: mesh.num_elements(),
            n: sol.coupled_dofs,
            l2_error: sol.l2_error,
            iterations: sol.report.iterations,
        });
    }
    let curve: Option<Vec<(f64, f64)>> = uniform
        .iter()
        .map(|u| u.l2_error.map(|e| (u.n as f64, e)))
        .collect();
    let uniform_at_n = run
        .cycles
        .iter()
        .map(|c| {
            curve
                .as_ref()
                .and_then(|pts| loglog_interp(pts, c.n as f64))
        })
        .collect();
    let layer = run
        .meshes
        .iter()
        .map(|m| prob.discontinuity.map(|line| layer_fraction(m, line)))
        .collect();
    let result = AmrResult {
        cycles: run.cycles,
        layer_fraction: layer,
        uniform_at_n,
        uniform,
    };
    Ok((result, run.meshes))
}

/// Iterations of each relaxation scheme on the meshes of an adaptive run.
pub fn run_relaxcompare(
    cfg: &ExperimentConfig,
    timings: &mut Vec<(String, StageTimings)>,
) -> Result<Vec<RelaxRow>> {
    let p = cfg.p[0];
    let prob = problem(cfg, p, cfg.nu[0])?;
    let (nx, nt) = cfg.ladder(p)[0];
    let run = amr_loop(
        &prob,
        p,
        nx,
        nt,
        cfg.modes[0],
        cfg.cycles,
        cfg.fraction,
        &cfg.solver,
    )?;
    let schemes = [
        Relaxation::Jacobi,
        Relaxation::Fgs,
        Relaxation::FThenAllFgs,
        Relaxation::OrderedBlockGs,
    ];
    let mut variants: Vec<SolverParams> = schemes
        .iter()
        .map(|&r| {
            let mut s = cfg.solver.clone();
            s.air.relaxation = r;
            s.block_scaling = true;
            s
        })
        .collect();
    variants.push(without_block_scaling(&cfg.solver));
    let mut rows = Vec::new();
    for (c, mesh) in run.meshes.iter().enumerate() {
        let mut counts = [(0, false); 5];
        for (k, params) in variants.iter().enumerate() {
            let sol = solve(mesh, &prob, p, params)?;
            timings.push((
                format!("relaxcompare cycle={c} {}", RELAX_COLUMNS[k]),
                sol.report.stage_timings,
            ));
            counts[k] = (sol.report.iterations, sol.report.converged);
        }
        rows.push(RelaxRow {
            cycle: c,
            n: run.cycles[c].n,
            counts,
        });
    }
    Ok(rows)
}

fn count_above(a: &crate::la::CsrMatrix, b: usize, order: &[usize]) -> usize {
    let mut pos = vec![0; order.len()];
    for (k, &blk) in order.iter().enumerate() {
        pos[blk] = k;
    }
    (0..a.nrows())
        .map(|i| {
            a.row(i)
                .filter(|&(j, v)| v != 0.0 && pos[j / b] > pos[i / b])
                .count()
        })
        .sum()
}

/// Topological ordering of the block-scaled facet system and one ordered
/// block Gauss-Seidel sweep.
pub fn run_ordercheck(cfg: &ExperimentConfig) -> Result<Vec<OrderRow>> {
    let p = cfg.p[0];
    let mut rows = Vec::new();
    for &(nx, nt) in cfg.ladder(p) {
        for &nu in &cfg.nu {
            let prob = problem(cfg, p, nu)?;
            let mesh = build_problem_mesh(&prob, nx, nt, MeshMode::AllAtOnce)?;
            let (_, cs) = condensed_all_at_once(&mesh, p, &prob)?;
            let b = cs.facet_block_size;
            let (a, _) = block_diag_inverse_scale(&cs.s, b)?;
            let rhs = preconditioned_system(&cs, true)?.1;
            let (acyclic, cyclic_blocks, order) = match topological_block_order(&a, b, 0.0)? {
                BlockOrder::Acyclic(o) => (true, 0, o),
                BlockOrder::Cyclic(c) => (false, c.len(), relaxation_order(&a, b, 0.0)?),
            };
            let scalar_acyclic =
                matches!(topological_block_order(&a, 1, 0.0)?, BlockOrder::Acyclic(_));
            let plan = BlockPlan::with_order(&a, b, order.clone())?;
            let mut x = vec![0.0; a.nrows()];
            relax(
                &a,
                &rhs,
                &mut x,
                Relaxation::OrderedBlockGs,
                None,
                Some(&plan),
            )?;
            let bn = norm2(&rhs);
            let sweep_residual = if bn > 0.0 {
                norm2(&a.residual(&rhs, &x)) / bn
            } else {
                0.0
            };
            rows.push(OrderRow {
                mesh: (nx, nt),
                nu,
                blocks: a.nrows() / b,
                acyclic,
                cyclic_blocks,
                above_diagonal: count_above(&a, b, &order),
                above_diagonal_ratio: above_diagonal_ratio(&a, b, &order),
                sweep_residual,
                scalar_acyclic,
            });
        }
    }
    Ok(rows)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            what: path.display().to_string(),
            message: format!("{other:?}"),
        },
    }
}

fn write_rows<I, R>(path: &Path, header: &[String], rows: I) -> Result<PathBuf>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn write_timings(path: &Path, timings: &[(String, StageTimings)]) -> Result<PathBuf> {
    write_rows(
        path,
        &header(&[
            "run",
            "setup",
            "assembly",
            "solve",
            "reconstruction",
            "total",
        ]),
        timings.iter().map(|(name, t)| {
            vec![
                name.clone(),
                fmt_f(t.setup),
                fmt_f(t.assembly),
                fmt_f(t.solve),
                fmt_f(t.reconstruction),
                fmt_f(t.total()),
            ]
        }),
    )
}

fn create_file(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Runs one experiment and writes its files into `out`. Returns the paths
/// written, `timings.csv` last.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut timings = Vec::new();
    let mut files = Vec::new();
    match cfg.kind {
        ExperimentKind::Converge => {
            let rows = run_converge(cfg, &mut timings)?;
            files.push(write_rows(
                &out.join("converge.csv"),
                &header(&[
                    "mode",
                    "p",
                    "nu",
                    "mesh",
                    "elements",
                    "dofs",
                    "error",
                    "rate",
                    "iterations",
                    "converged",
                ]),
                rows.iter().map(|r| {
                    vec![
                        mode_name(r.mode).to_string(),
                        r.p.to_string(),
                        format!("{:e}", r.nu),
                        fmt_mesh(r.mesh),
                        r.elements.to_string(),
                        r.dofs.to_string(),
                        fmt_f(r.error),
                        r.rate.map(|v| format!("{v:.4}")).unwrap_or_default(),
                        r.iterations.to_string(),
                        r.converged.to_string(),
                    ]
                }),
            )?);
        }
        ExperimentKind::Iterations => {
            let rows = run_iterations(cfg, &mut timings)?;
            let mut cols = header(&["mode", "p", "mesh", "dofs"]);
            cols.extend(cfg.nu.iter().map(|nu| format!("nu={nu:e}")));
            files.push(write_rows(
                &out.join("iterations.csv"),
                &cols,
                rows.iter().map(|r| {
                    let mut v = vec![
                        mode_name(r.mode).to_string(),
                        r.p.to_string(),
                        fmt_mesh(r.mesh),
                        r.dofs.to_string(),
                    ];
                    v.extend(r.counts.iter().map(|&(it, ok)| fmt_iters(it, ok)));
                    v
                }),
            )?);
        }
        ExperimentKind::Stagnation => {
            let rows = run_stagnation(cfg, &mut timings)?;
            files.push(write_rows(
                &out.join("stagnation.csv"),
                &header(&[
                    "nu",
                    "mesh",
                    "iteration",
                    "precond_residual",
                    "true_residual",
                    "l2_error",
                ]),
                rows.iter().map(|r| {
                    vec![
                        format!("{:e}", r.nu),
                        fmt_mesh(r.mesh),
                        r.iteration.to_string(),
                        fmt_f(r.precond_residual),
                        fmt_f(r.true_residual),
                        fmt_f(r.l2_error),
                    ]
                }),
            )?);
        }
        ExperimentKind::Amr => {
            let (res, meshes) = run_amr(cfg, &mut timings)?;
            files.push(write_rows(
                &out.join("amr.csv"),
                &header(&[
                    "cycle",
                    "elements",
                    "N",
                    "l2_error",
                    "iterations",
                    "converged",
                    "median_h",
                    "layer_fraction",
                    "uniform_error_at_N",
                ]),
                res.cycles.iter().enumerate().map(|(k, c)| {
                    vec![
                        c.cycle.to_string(),
                        c.elements.to_string(),
                        c.n.to_string(),
                        fmt_opt(c.l2_error),
                        c.iterations.to_string(),
                        c.converged.to_string(),
                        fmt_f(c.median_h),
                        fmt_opt(res.layer_fraction[k]),
                        fmt_opt(res.uniform_at_n[k]),
                    ]
                }),
            )?);
            files.push(write_rows(
                &out.join("amr_uniform.csv"),
                &header(&["mesh", "elements", "N", "l2_error", "iterations"]),
                res.uniform.iter().map(|u| {
                    vec![
                        fmt_mesh(u.mesh),
                        u.elements.to_string(),
                        u.n.to_string(),
                        fmt_opt(u.l2_error),
                        u.iterations.to_string(),
                    ]
                }),
            )?);
            for (c, mesh) in meshes.iter().enumerate() {
                let path = out.join(format!("amr_mesh_{c}.txt"));
                let mut w = create_file(&path)?;
                write_mesh(&mut w, mesh)?;
                w.flush().map_err(|e| Error::io(&path, e))?;
                files.push(path);
            }
        }
        ExperimentKind::RelaxCompare => {
            let rows = run_relaxcompare(cfg, &mut timings)?;
            let mut cols = header(&["cycle", "N"]);
            cols.extend(RELAX_COLUMNS.iter().map(|s| s.to_string()));
            files.push(write_rows(
                &out.join("relaxcompare.csv"),
                &cols,
                rows.iter().map(|r| {
                    let mut v = vec![r.cycle.to_string(), r.n.to_string()];
                    v.extend(r.counts.iter().map(|&(it, ok)| fmt_iters(it, ok)));
                    v
                }),
            )?);
        }
        ExperimentKind::OrderCheck => {
            let rows = run_ordercheck(cfg)?;
            files.push(write_rows(
                &out.join("ordercheck.csv"),
                &header(&[
                    "mesh",
                    "nu",
                    "blocks",
                    "acyclic",
                    "cyclic_blocks",
                    "above_diagonal",
                    "above_diagonal_ratio",
                    "sweep_residual",
                    "scalar_acyclic",
                ]),
                rows.iter().map(|r| {
                    vec![
                        fmt_mesh(r.mesh),
                        format!("{:e}", r.nu),
                        r.blocks.to_string(),
                        r.acyclic.to_string(),
                        r.cyclic_blocks.to_string(),
                        r.above_diagonal.to_string(),
                        fmt_f(r.above_diagonal_ratio),
                        fmt_f(r.sweep_residual),
                        r.scalar_acyclic.to_string(),
                    ]
                }),
            )?);
        }
        ExperimentKind::Export => files.extend(export_system(cfg, out)?),
    }
    files.push(write_timings(&out.join("timings.csv"), &timings)?);
    Ok(files)
}

/// Writes `S.mtx`, `rhs.mtx`, `block_size.txt` and `cf_labels.csv` for the
/// first ladder mesh. The CF labels are those of the first AIR level, i.e.
/// computed on the operator AIR sees (block-scaled when enabled).
pub fn export_system(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let p = cfg.p[0];
    let prob = problem(cfg, p, cfg.nu[0])?;
    let (nx, nt) = cfg.ladder(p)[0];
    let mesh = build_problem_mesh(&prob, nx, nt, MeshMode::AllAtOnce)?;
    let (bs, cs) = condensed_all_at_once(&mesh, p, &prob)?;
    let mut files = Vec::new();

    let path = out.join("S.mtx");
    let mut w = create_file(&path)?;
    write_matrix_market(&mut w, &cs.s)?;
    w.flush().map_err(|e| Error::io(&path, e))?;
    files.push(path);

    let path = out.join("rhs.mtx");
    let mut w = create_file(&path)?;
    write_vector(&mut w, &cs.h)?;
    w.flush().map_err(|e| Error::io(&path, e))?;
    files.push(path);

    let path = out.join("block_size.txt");
    fs::write(&path, format!("{}\n", cs.facet_block_size)).map_err(|e| Error::io(&path, e))?;
    files.push(path);

    let (a, _) = preconditioned_system(&cs, cfg.solver.block_scaling)?;
    let cf = rs_coarsen(&strength_graph(&a, cfg.solver.air.theta_c)?);
    let b = cs.facet_block_size;
    files.push(write_rows(
        &out.join("cf_labels.csv"),
        &header(&["row", "facet", "label", "t", "x"]),
        (0..a.nrows()).map(|i| {
            let fid = bs.facet_ids[i / b];
            let m = mesh.facet_midpoint(fid);
            let label = match cf.is_c(i) {
                true => Label::C,
                false => Label::F,
            };
            vec![
                i.to_string(),
                fid.to_string(),
                format!("{label:?}"),
                fmt_f(m[0]),
                fmt_f(m[1]),
            ]
        }),
    )?);
    Ok(files)
}
