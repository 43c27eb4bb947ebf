//! Hierarchical equations of motion for one bosonic Drude–Lorentz bath.

mod generator;
mod hierarchy;
mod model;
mod propagate;

pub use generator::{anticommutator_super, commutator_super, CsrMatrix, HeomGenerator};
pub use hierarchy::{binomial, enumerate_hierarchy, Hierarchy, HierarchyIndex, DEFAULT_HIERARCHY_CAP};
pub use model::{build_single_qubit, build_two_qubit, SystemModel};
pub use propagate::{
    convergence_sweep, propagate, steady_state, ConvergenceReport, ConvergenceRow, HeomPropagator, HeomState,
    RefineAxis, SteadyState, SteadyStateOptions, CONVERGENCE_THRESHOLD,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::Integrator;
use crate::scalar::Real;

/// Truncation and integration controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeomParams<T> {
    pub depth: usize,
    pub use_terminator: bool,
    pub scaling: bool,
    pub integrator: Integrator<T>,
    pub hierarchy_cap: usize,
}

impl<T: Real> Default for HeomParams<T> {
    fn default() -> Self {
        Self {
            depth: 6,
            use_terminator: true,
            scaling: true,
            integrator: Integrator::default(),
            hierarchy_cap: DEFAULT_HIERARCHY_CAP,
        }
    }
}

impl<T: Real> HeomParams<T> {
    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator<T>) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth < 1 {
            return Err(Error::InvalidParameter("heom.depth must be >= 1".into()));
        }
        self.integrator.validate()
    }
}

/// Time series of physical (level-0) states.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<crate::scalar::Op<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&crate::scalar::Op<T>> {
        self.states.last()
    }

    /// Expectation value `Tr(ρ(t) O)` along the trajectory.
    pub fn expectation(&self, op: &crate::scalar::Op<T>) -> Vec<T> {
        self.states.iter().map(|rho| (rho * op).trace().re).collect()
    }
}

pub fn validate_grid<T: Real>(t_grid: &[T]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("time grid is empty".into()));
    }
    if t_grid[0] != T::zero() {
        return Err(Error::InvalidParameter("time grid must start at 0".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `n` uniformly spaced samples on `[0, t_max]`.
pub fn uniform_grid<T: Real>(t_max: T, n_samples: usize) -> Vec<T> {
    let n = n_samples.max(2);
    (0..n)
        .map(|i| t_max * crate::scalar::lit::<T>(i as f64 / (n - 1) as f64))
        .collect()
}
