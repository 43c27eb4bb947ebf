//! Particle swarm (PSO) and quantum-behaved particle swarm (QPSO) updates.
//!
//! Both maximise the fitness. Randomness comes through [`Draws`] so that the
//! update rules can be driven by fixed values in tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Source of the random numbers used by one particle update.
pub trait Draws {
    /// Uniform in `[0, 1)`.
    fn uniform(&mut self) -> f64;
    /// Uniform in `(0, 1]`.
    fn open_unit(&mut self) -> f64 {
        1.0 - self.uniform()
    }
    fn coin(&mut self) -> bool {
        self.uniform() < 0.5
    }
}

impl<R: Rng> Draws for R {
    fn uniform(&mut self) -> f64 {
        self.random::<f64>()
    }
}

/// Deterministic ChaCha stream for `(seed, iteration, particle)`.
pub fn particle_stream(seed: u64, iteration: u64, particle: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((iteration << 32) | particle);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoParams {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            inertia: 0.7,
            cognitive: 1.5,
            social: 1.5,
        }
    }
}

/// Contraction–expansion coefficient decreasing linearly over the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSchedule {
    pub start: f64,
    pub end: f64,
}

impl Default for AlphaSchedule {
    fn default() -> Self {
        Self { start: 1.0, end: 0.5 }
    }
}

impl AlphaSchedule {
    pub fn at(&self, iteration: usize, total: usize) -> f64 {
        if total <= 1 {
            return self.start;
        }
        let f = iteration as f64 / (total - 1) as f64;
        self.start + (self.end - self.start) * f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Algorithm {
    Pso(PsoParams),
    Qpso(AlphaSchedule),
}

/// Symmetric box `[-bound, bound]` in every dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds(pub f64);

impl Bounds {
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(-self.0, self.0)
    }

    pub fn contains(&self, x: f64) -> bool {
        x.abs() <= self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Swarm {
    pub particles: Vec<Particle>,
    pub global_best: Vec<f64>,
    pub global_fitness: f64,
}

fn evaluate_all<F>(positions: &[Vec<f64>], fitness: &F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    positions.par_iter().map(|x| fitness(x)).collect()
}

impl Swarm {
    /// Swarm from explicit starting positions; velocities start at zero.
    pub fn from_positions<F>(positions: Vec<Vec<f64>>, fitness: &F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        if positions.is_empty() {
            return Err(Error::InvalidParameter("swarm needs at least one particle".into()));
        }
        let dim = positions[0].len();
        if positions.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidParameter("particles have different dimensions".into()));
        }
        let values = evaluate_all(&positions, fitness)?;
        let particles: Vec<Particle> = positions
            .into_iter()
            .zip(values)
            .map(|(x, f)| Particle {
                velocity: vec![0.0; x.len()],
                best_position: x.clone(),
                position: x,
                best_fitness: f,
            })
            .collect();
        let mut swarm = Self {
            global_best: particles[0].best_position.clone(),
            global_fitness: particles[0].best_fitness,
            particles,
        };
        swarm.refresh_global();
        Ok(swarm)
    }

    /// Uniform random positions in the box, one stream per particle.
    pub fn random<F>(n_particles: usize, dim: usize, bounds: Bounds, seed: u64, fitness: &F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let positions = (0..n_particles)
            .map(|i| {
                let mut rng = particle_stream(seed, u32::MAX as u64, i as u64);
                (0..dim).map(|_| bounds.0 * (2.0 * rng.uniform() - 1.0)).collect()
            })
            .collect();
        Self::from_positions(positions, fitness)
    }

    pub fn dim(&self) -> usize {
        self.global_best.len()
    }

    /// Mean of the personal-best positions.
    pub fn mbest(&self) -> Vec<f64> {
        let m = self.particles.len() as f64;
        let mut out = vec![0.0; self.dim()];
        for p in &self.particles {
            for (o, x) in out.iter_mut().zip(&p.best_position) {
                *o += x;
            }
        }
        out.iter_mut().for_each(|o| *o /= m);
        out
    }

    fn refresh_global(&mut self) {
        for p in &self.particles {
            if p.best_fitness > self.global_fitness {
                self.global_fitness = p.best_fitness;
                self.global_best = p.best_position.clone();
            }
        }
    }

    fn accept<F>(&mut self, fitness: &F) -> Result<()>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let positions: Vec<Vec<f64>> = self.particles.iter().map(|p| p.position.clone()).collect();
        let values = evaluate_all(&positions, fitness)?;
        for (p, f) in self.particles.iter_mut().zip(values) {
            if f > p.best_fitness {
                p.best_fitness = f;
                p.best_position = p.position.clone();
            }
        }
        self.refresh_global();
        Ok(())
    }
}

/// `V ← wV + f1 r1 (P − X) + f2 r2 (G − X)`, `X ← X + V`, then clamp and
/// re-evaluate. `draws(i)` supplies the numbers for particle `i`.
pub fn pso_step<F, D>(
    swarm: &mut Swarm,
    fitness: &F,
    bounds: Bounds,
    params: &PsoParams,
    mut draws: impl FnMut(usize) -> D,
) -> Result<()>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
    D: Draws,
{
    let g = swarm.global_best.clone();
    for (i, p) in swarm.particles.iter_mut().enumerate() {
        let mut rng = draws(i);
        for d in 0..p.position.len() {
            let (r1, r2) = (rng.uniform(), rng.uniform());
            let x = p.position[d];
            let v = params.inertia * p.velocity[d]
                + params.cognitive * r1 * (p.best_position[d] - x)
                + params.social * r2 * (g[d] - x);
            p.velocity[d] = v;
            p.position[d] = bounds.clamp(x + v);
        }
    }
    swarm.accept(fitness)
}

/// `X ← P ± α |mbest − X| ln(1/u)` per dimension, then clamp and re-evaluate.
pub fn qpso_step<F, D>(
    swarm: &mut Swarm,
    fitness: &F,
    bounds: Bounds,
    alpha: f64,
    mut draws: impl FnMut(usize) -> D,
) -> Result<()>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
    D: Draws,
{
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let mbest = swarm.mbest();
    for (i, p) in swarm.particles.iter_mut().enumerate() {
        let mut rng = draws(i);
        for d in 0..p.position.len() {
            let u = rng.open_unit();
            let sign = if rng.coin() { 1.0 } else { -1.0 };
            let spread = alpha * (mbest[d] - p.position[d]).abs() * (1.0 / u).ln();
            p.position[d] = bounds.clamp(p.best_position[d] + sign * spread);
        }
    }
    swarm.accept(fitness)
}
