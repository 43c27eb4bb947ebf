use num_complex::Complex32;
use qthermo::heom::{build_single_qubit, uniform_grid};
use qthermo::linalg::projector;
use qthermo::metrology::{bloch_vector, thermal_benchmark};
use qthermo::heom::HeomParams;
use qthermo::{ScenarioF32, SpectralDensityF32};

#[test]
fn heom_runs_in_f32() {
    let one = Complex32::new(1.0, 0.0);
    let model = build_single_qubit(1.0f32, projector(&[one, one])).unwrap();
    let sd = SpectralDensityF32::new(0.05, 0.1).unwrap();
    let mut params = HeomParams::<f32>::default().with_depth(3);
    params.integrator = qthermo::ode::Integrator::AdaptiveRk45 { rtol: 1e-5, atol: 1e-6 };
    let sc = ScenarioF32::heom(model, sd, params).with_n_matsubara(1);
    let traj = sc.trajectory(0.2, &uniform_grid(10.0f32, 11)).unwrap();
    let b = bloch_vector(traj.last().unwrap()).unwrap();
    assert!(b.norm() < 1.0 + 1e-4);
    assert!((traj.states[0].trace().re - 1.0).abs() < 1e-5);
    assert!((thermal_benchmark(0.2f32, 1.0) - 0.166_201_42).abs() < 1e-6);
}
