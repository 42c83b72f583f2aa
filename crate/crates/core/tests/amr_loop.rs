use sthdg::amr::{amr_loop, layer_fraction};
use sthdg::cases::make_layer1d;
use sthdg::mesh::MeshMode;
use sthdg::solver::SolverParams;

#[test]
fn dofs_grow_every_cycle() {
    let prob = make_layer1d();
    let run = amr_loop(
        &prob,
        1,
        6,
        4,
        MeshMode::AllAtOnce,
        3,
        0.2,
        &SolverParams::default(),
    )
    .unwrap();
    assert_eq!(run.cycles.len(), 4);
    assert_eq!(run.meshes.len(), 4);
    for w in run.cycles.windows(2) {
        assert!(w[1].n > w[0].n && w[1].elements > w[0].elements);
    }
    assert!(run.cycles.iter().all(|c| c.converged));
    for m in &run.meshes {
        m.validate().unwrap();
    }
    let line = prob.discontinuity.unwrap();
    assert!(layer_fraction(run.final_mesh(), line) > 0.0);
}

#[test]
fn zero_cycles_is_one_uniform_solve() {
    let prob = make_layer1d();
    let run = amr_loop(
        &prob,
        1,
        6,
        4,
        MeshMode::AllAtOnce,
        0,
        0.1,
        &SolverParams::default(),
    )
    .unwrap();
    assert_eq!(run.cycles.len(), 1);
    assert_eq!(run.cycles[0].elements, 48);
}
