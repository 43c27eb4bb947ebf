use num_complex::Complex64;
use qthermo::bath::matsubara_expansion;
use qthermo::heom::{build_single_qubit, convergence_sweep, propagate, steady_state, uniform_grid, SteadyStateOptions};
use qthermo::linalg::{eigh, hermiticity_defect, projector, sigma_z, trace, unitary};
use qthermo::metrology::bloch_vector;
use qthermo::nonmarkov::trace_distance;
use qthermo::{Error, HeomParams, Op, SpectralDensity};

fn plus() -> Op {
    let a = Complex64::new(1.0, 0.0);
    projector(&[a, a])
}

#[test]
fn zero_coupling_is_unitary() {
    let model = build_single_qubit(1.0, plus()).unwrap();
    let sd = SpectralDensity::new(0.0, 0.1).unwrap();
    let bath = matsubara_expansion(&sd, 0.2, 2).unwrap();
    let grid = uniform_grid(20.0, 81);
    let traj = propagate(&model, &bath, &HeomParams::default().with_depth(3), &grid).unwrap();
    let h = sigma_z() * Complex64::new(0.5, 0.0);
    for (t, rho) in grid.iter().zip(&traj.states) {
        let u = unitary(&h, *t);
        let exact = &u * plus() * u.adjoint();
        assert!(trace_distance(rho, &exact).unwrap() < 1e-6, "t={t}");
    }
}

#[test]
fn larmor_half_turn() {
    let model = build_single_qubit(1.0, plus()).unwrap();
    let bath = matsubara_expansion(&SpectralDensity::new(0.0, 0.1).unwrap(), 0.2, 0).unwrap();
    let traj = propagate(&model, &bath, &HeomParams::default().with_depth(1), &[0.0, std::f64::consts::PI]).unwrap();
    let b = bloch_vector(traj.last().unwrap()).unwrap();
    assert!((b.x + 1.0).abs() < 1e-7 && b.y.abs() < 1e-7 && b.z.abs() < 1e-7, "{b:?}");
}

#[test]
fn physical_state_stays_a_density_matrix() {
    let model = build_single_qubit(1.0, plus()).unwrap();
    let sd = SpectralDensity::new(0.1, 0.05).unwrap();
    let bath = matsubara_expansion(&sd, 0.2, 2).unwrap();
    let grid = uniform_grid(60.0, 121);
    let traj = propagate(&model, &bath, &HeomParams::default().with_depth(5), &grid).unwrap();
    for (t, rho) in grid.iter().zip(&traj.states) {
        assert!((trace(rho) - Complex64::new(1.0, 0.0)).norm() < 1e-8, "trace at t={t}");
        assert!(hermiticity_defect(rho) < 1e-8, "hermiticity at t={t}");
        assert!(eigh(rho).0[0] > -1e-6, "positivity at t={t}");
    }
}

#[test]
fn unscaled_ados_give_the_same_physics() {
    let model = build_single_qubit(1.0, plus()).unwrap();
    let sd = SpectralDensity::new(0.05, 0.1).unwrap();
    let bath = matsubara_expansion(&sd, 0.2, 1).unwrap();
    let grid = uniform_grid(30.0, 31);
    let mut params = HeomParams::default().with_depth(4);
    let scaled = propagate(&model, &bath, &params, &grid).unwrap();
    params.scaling = false;
    let plain = propagate(&model, &bath, &params, &grid).unwrap();
    for (a, b) in scaled.states.iter().zip(&plain.states) {
        assert!(trace_distance(a, b).unwrap() < 1e-7);
    }
}

#[test]
fn uncoupled_superposition_never_settles() {
    let model = build_single_qubit(1.0, plus()).unwrap();
    let bath = matsubara_expansion(&SpectralDensity::new(0.0, 0.1).unwrap(), 0.2, 0).unwrap();
    let opts = SteadyStateOptions { t_max: 200.0, ..Default::default() };
    let err = steady_state(&model, &bath, &HeomParams::default().with_depth(1), &opts).unwrap_err();
    assert!(matches!(err, Error::SteadyStateNotConverged { residual, .. } if residual > 0.1));
}

#[test]
fn depth_refinement_at_weak_coupling() {
    let model = build_single_qubit(1.0, plus()).unwrap();
    let sd = SpectralDensity::new(0.01, 0.1).unwrap();
    let grid = uniform_grid(40.0, 81);
    let report = convergence_sweep(&model, &sd, 0.2, &HeomParams::default(), &[2, 3, 4, 5], &[1], &grid).unwrap();
    let devs = report.depth_deviations(1);
    assert_eq!(devs.len(), 3);
    assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
    assert!(report.converged_at().is_some());
}

#[test]
fn zero_coupling_sweep_has_no_deviation() {
    let model = build_single_qubit(1.0, plus()).unwrap();
    let sd = SpectralDensity::new(0.0, 0.1).unwrap();
    let grid = uniform_grid(10.0, 21);
    let report = convergence_sweep(&model, &sd, 0.2, &HeomParams::default(), &[1, 2], &[0, 1], &grid).unwrap();
    assert!(report.rows.iter().filter_map(|r| r.deviation).all(|d| d == 0.0));
}
