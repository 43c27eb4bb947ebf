use qthermo::control::{optimize, AlphaSchedule, Algorithm, Bounds, CheckpointPolicy, PsoParams, RunParams};
use qthermo::Result;

const TARGET: [f64; 4] = [0.3, -0.55, 0.1, 0.72];

fn bowl(x: &[f64]) -> Result<f64> {
    Ok(-x.iter().zip(TARGET).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
}

fn hits(algorithm: Algorithm) -> usize {
    (0..100u64)
        .filter(|&seed| {
            let params = RunParams {
                n_particles: 20,
                iterations: 100,
                bounds: Bounds(1.0),
                seed,
                algorithm,
            };
            let out = optimize(&bowl, 4, &params, &CheckpointPolicy::default(), None).unwrap();
            out.best_position.iter().zip(TARGET).all(|(a, b)| (a - b).abs() < 1e-2)
        })
        .count()
}

#[test]
fn qpso_finds_the_bowl_minimum() {
    let n = hits(Algorithm::Qpso(AlphaSchedule::default()));
    assert!(n >= 95, "{n}/100 seeds");
}

#[test]
fn pso_finds_the_bowl_minimum() {
    let n = hits(Algorithm::Pso(PsoParams::default()));
    assert!(n >= 95, "{n}/100 seeds");
}

#[test]
fn positions_respect_bounds() {
    let params = RunParams {
        n_particles: 8,
        iterations: 30,
        bounds: Bounds(0.5),
        seed: 11,
        algorithm: Algorithm::Qpso(AlphaSchedule::default()),
    };
    let out = optimize(&bowl, 4, &params, &CheckpointPolicy::default(), None).unwrap();
    for p in &out.swarm.particles {
        assert!(p.position.iter().all(|x| x.abs() <= 0.5));
    }
    // the optimum of the last coordinate lies outside the box
    assert!((out.best_position[3] - 0.5).abs() < 1e-6);
}
