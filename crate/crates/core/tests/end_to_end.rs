use locsysid::datamat::{build_regressors, hankel};
use locsysid::harness::{cmd_sweep, ExperimentConfig};
use locsysid::ident::{identify_exact, identify_robust};
use locsysid::linalg::{eigenvalue_distance, eigenvalues};
use locsysid::netsim::{paper_chain, simulate, true_impulse_response, white_inputs_active, NoiseLevels};
use locsysid::realization::{estimate_order, ho_kalman, DEFAULT_GAP_RATIO};
use locsysid::solver::SolverConfig;

#[test]
fn noiseless_chain_round_trip() {
    let sys = paper_chain().with_noise(NoiseLevels::none());
    let inputs = white_inputs_active(&sys, &[0, 1, 2], 600, 5, 1.0);
    let traj = simulate(&sys, &inputs, 600, 5).unwrap();
    let reg = build_regressors(&traj, 0, 600, 300, 21, false).unwrap();
    let est = identify_exact(&reg.y, &reg.v, 21).unwrap();
    let truth = true_impulse_response(&sys, 0, 21).unwrap();
    assert!(est.error_against(&truth, None).unwrap() / truth.frobenius_norm() < 1e-6);

    let order = estimate_order(&est.s, DEFAULT_GAP_RATIO).unwrap();
    assert_eq!(order.order, 3);
    let model = ho_kalman(&est.s, 3).unwrap();
    assert!(eigenvalue_distance(&model.eigenvalues(), &eigenvalues(&sys.node(0).a)) < 1e-6);
    assert!(model.fit_error < 1e-6);
}

#[test]
fn robust_equality_limit_matches_exact_on_chain() {
    let sys = paper_chain().with_noise(NoiseLevels::none());
    let inputs = white_inputs_active(&sys, &[0, 1, 2], 200, 9, 1.0);
    let traj = simulate(&sys, &inputs, 200, 9).unwrap();
    let reg = build_regressors(&traj, 0, 200, 120, 6, false).unwrap();
    let exact = identify_exact(&reg.y, &reg.v, 6).unwrap();
    let robust = identify_robust(&reg.y, &reg.v, 6, 0.0, &SolverConfig::default()).unwrap();
    let gap = (exact.s.to_wide() - robust.s.to_wide()).norm() / exact.s.frobenius_norm();
    assert!(gap < 1e-4, "{gap}");
    assert!(hankel(&robust.s).unwrap().ncols() > 0);
}

#[test]
fn sweep_is_deterministic_and_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_json(
        r#"{"delta_grid": [0.5, 1.0, 2.0], "N": 200, "M": 150, "r": 6, "solver": {"record_trace": false}}"#,
    )
    .unwrap();
    let a = cmd_sweep(&cfg, Some(1), Some(dir.path())).unwrap();
    let first = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let b = cmd_sweep(&cfg, Some(1), Some(dir.path())).unwrap();
    assert_eq!(first, std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap());
    assert_eq!(a.len(), 3);
    assert_eq!(a.iter().map(|r| r.delta).collect::<Vec<_>>(), vec![0.5, 1.0, 2.0]);
    assert_eq!(a.iter().map(|r| r.error).collect::<Vec<_>>(), b.iter().map(|r| r.error).collect::<Vec<_>>());
}
