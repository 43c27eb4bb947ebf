//! Piecewise-constant drives, the time-weighted QSNR objective and swarm
//! optimisers.

mod fitness;
mod optimize;
mod sequence;
mod swarm;

pub use fitness::{weighted_average, weighted_fitness, ControlProblem, FitnessSpec, DEFAULT_TIME_SAMPLES};
pub use optimize::{optimize, Checkpoint, CheckpointPolicy, Outcome, RunParams, CHECKPOINT_VERSION};
pub use sequence::{controlled_hamiltonian, ControlSequence};
pub use swarm::{
    particle_stream, pso_step, qpso_step, Algorithm, AlphaSchedule, Bounds, Draws, Particle, PsoParams, Swarm,
};
