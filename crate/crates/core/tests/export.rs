use std::fs::File;
use std::io::BufReader;

use sthdg::experiments::{run_experiment, Config, ExperimentKind};
use sthdg::la::{read_matrix_market, read_vector};
use sthdg::solver::{build_problem_mesh, condensed_all_at_once};

#[test]
fn exported_system_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = Config::parse("[export]\nmeshes = 6x4\np = 2\n")
        .unwrap()
        .experiment(ExperimentKind::Export);
    run_experiment(&cfg, dir.path()).unwrap();

    let prob = sthdg::experiments::problem(&cfg, 2, 0.0).unwrap();
    let mesh = build_problem_mesh(&prob, 6, 4, sthdg::mesh::MeshMode::AllAtOnce).unwrap();
    let (_, cs) = condensed_all_at_once(&mesh, 2, &prob).unwrap();

    let s = read_matrix_market(BufReader::new(
        File::open(dir.path().join("S.mtx")).unwrap(),
    ))
    .unwrap();
    assert_eq!((s.nrows(), s.ncols()), (cs.s.nrows(), cs.s.ncols()));
    assert_eq!(s.indptr(), cs.s.indptr());
    assert_eq!(s.indices(), cs.s.indices());
    assert_eq!(s.data(), cs.s.data());
    let h = read_vector(BufReader::new(
        File::open(dir.path().join("rhs.mtx")).unwrap(),
    ))
    .unwrap();
    assert_eq!(h, cs.h);

    let labels = std::fs::read_to_string(dir.path().join("cf_labels.csv")).unwrap();
    let mut lines = labels.lines();
    assert_eq!(lines.next(), Some("row,facet,label,t,x"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), s.nrows());
    assert!(rows.iter().all(|r| r.contains(",C,") || r.contains(",F,")));
    assert!(rows.iter().any(|r| r.contains(",C,")));
}
