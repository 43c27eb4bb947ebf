//! Swarm optimisation driver with per-iteration checkpoints.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::swarm::{particle_stream, pso_step, qpso_step, Algorithm, Bounds, Swarm};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub n_particles: usize,
    pub iterations: usize,
    pub bounds: Bounds,
    pub seed: u64,
    pub algorithm: Algorithm,
}

impl RunParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 || self.iterations == 0 {
            return Err(Error::InvalidParameter(
                "optimizer needs at least one particle and one iteration".into(),
            ));
        }
        if !(self.bounds.0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "amplitude bound must be > 0, got {}",
                self.bounds.0
            )));
        }
        Ok(())
    }
}

/// Everything needed to continue a run after `iteration` completed steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    /// Caller-supplied digest of the configuration; a resume must match it.
    pub fingerprint: String,
    pub params: RunParams,
    pub iteration: usize,
    pub swarm: Swarm,
    pub history: Vec<f64>,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let cp: Self = serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
        if cp.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                cp.version
            )));
        }
        if cp.history.len() != cp.iteration + 1 || cp.swarm.particles.len() != cp.params.n_particles {
            return Err(Error::Checkpoint(format!("{} is inconsistent", path.display())));
        }
        Ok(cp)
    }

    /// Writes through a temporary file and renames it into place.
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, text)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Global-best fitness after initialisation and after every iteration.
    pub history: Vec<f64>,
    pub swarm: Swarm,
}

#[derive(Debug, Clone, Default)]
pub struct CheckpointPolicy {
    pub path: Option<PathBuf>,
    pub fingerprint: String,
    /// Stop after this many completed iterations (for interrupted runs).
    pub stop_after: Option<usize>,
}

/// Maximises `fitness` over `[-bound, bound]^dim`.
pub fn optimize<F>(
    fitness: &F,
    dim: usize,
    params: &RunParams,
    policy: &CheckpointPolicy,
    resume: Option<Checkpoint>,
) -> Result<Outcome>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    params.validate()?;
    let (mut swarm, mut history, start) = match resume {
        Some(cp) => {
            if cp.fingerprint != policy.fingerprint || &cp.params != params {
                return Err(Error::ResumeMismatch);
            }
            (cp.swarm, cp.history, cp.iteration)
        }
        None => {
            let swarm = Swarm::random(params.n_particles, dim, params.bounds, params.seed, fitness)?;
            let history = vec![swarm.global_fitness];
            (swarm, history, 0)
        }
    };
    if swarm.dim() != dim {
        return Err(Error::ResumeMismatch);
    }

    for it in start..params.iterations {
        if policy.stop_after.is_some_and(|n| it >= n) {
            break;
        }
        let draws = |i: usize| particle_stream(params.seed, it as u64, i as u64);
        match &params.algorithm {
            Algorithm::Pso(p) => pso_step(&mut swarm, fitness, params.bounds, p, draws)?,
            Algorithm::Qpso(schedule) => {
                let alpha = schedule.at(it, params.iterations);
                qpso_step(&mut swarm, fitness, params.bounds, alpha, draws)?
            }
        }
        history.push(swarm.global_fitness);
        log::debug!("iteration {}: best fitness {:.6e}", it + 1, swarm.global_fitness);
        if let Some(path) = &policy.path {
            Checkpoint {
                version: CHECKPOINT_VERSION,
                fingerprint: policy.fingerprint.clone(),
                params: params.clone(),
                iteration: it + 1,
                swarm: swarm.clone(),
                history: history.clone(),
            }
            .save(path)?;
        }
    }
    Ok(Outcome {
        best_position: swarm.global_best.clone(),
        best_fitness: swarm.global_fitness,
        history,
        swarm,
    })
}
