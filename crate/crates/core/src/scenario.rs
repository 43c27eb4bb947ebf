//! A probe, a bath and a solver bundled so that runs at different
//! temperatures share every other setting.

use serde::{Deserialize, Serialize};

use crate::bath::{default_n_matsubara, matsubara_expansion, BathExpansion, SpectralDensity};
use crate::error::{Error, Result};
use crate::heom::{self, HeomParams, SteadyState, SteadyStateOptions, SystemModel, Trajectory};
use crate::linalg::gibbs_state;
use crate::redfield::{self, RedfieldOptions};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Solver<T> {
    Heom {
        params: HeomParams<T>,
        /// `None` picks the smallest adequate `N_k` at the central temperature.
        n_matsubara: Option<usize>,
    },
    Brme(RedfieldOptions),
}

/// Where a run starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialPreset {
    /// `model.initial_state` as given.
    #[default]
    Model,
    /// Gibbs state of the bare system Hamiltonian at the run temperature.
    Gibbs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T: Real> {
    pub model: SystemModel<T>,
    pub spectral: SpectralDensity<T>,
    pub solver: Solver<T>,
    pub initial: InitialPreset,
}

impl<T: Real> Scenario<T> {
    pub fn heom(model: SystemModel<T>, spectral: SpectralDensity<T>, params: HeomParams<T>) -> Self {
        Self {
            model,
            spectral,
            solver: Solver::Heom { params, n_matsubara: None },
            initial: InitialPreset::Model,
        }
    }

    pub fn brme(model: SystemModel<T>, spectral: SpectralDensity<T>, opts: RedfieldOptions) -> Self {
        Self {
            model,
            spectral,
            solver: Solver::Brme(opts),
            initial: InitialPreset::Model,
        }
    }

    pub fn with_n_matsubara(mut self, n: usize) -> Self {
        if let Solver::Heom { n_matsubara, .. } = &mut self.solver {
            *n_matsubara = Some(n);
        }
        self
    }

    pub fn with_initial(mut self, initial: InitialPreset) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_model(&self, model: SystemModel<T>) -> Self {
        Self { model, ..self.clone() }
    }

    /// Copy with every temperature-dependent truncation fixed at `temperature`.
    pub fn pinned(&self, temperature: T) -> Result<Self> {
        let mut out = self.clone();
        if let Solver::Heom { n_matsubara, .. } = &mut out.solver {
            if n_matsubara.is_none() {
                *n_matsubara = Some(default_n_matsubara(&self.spectral, temperature)?);
            }
        }
        Ok(out)
    }

    pub fn n_matsubara(&self, temperature: T) -> Result<Option<usize>> {
        match &self.solver {
            Solver::Heom { n_matsubara: Some(n), .. } => Ok(Some(*n)),
            Solver::Heom { n_matsubara: None, .. } => default_n_matsubara(&self.spectral, temperature).map(Some),
            Solver::Brme(_) => Ok(None),
        }
    }

    pub fn bath(&self, temperature: T) -> Result<BathExpansion<T>> {
        let n = self.n_matsubara(temperature)?.unwrap_or(0);
        matsubara_expansion(&self.spectral, temperature, n)
    }

    /// Model with the initial state resolved for a run at `temperature`.
    pub fn model_at(&self, temperature: T) -> Result<SystemModel<T>> {
        if !(temperature > T::zero()) {
            return Err(Error::InvalidParameter(format!("temperature must be > 0, got {temperature}")));
        }
        match self.initial {
            InitialPreset::Model => Ok(self.model.clone()),
            InitialPreset::Gibbs => self.model.clone().with_initial_state(gibbs_state(&self.model.h_base, temperature)),
        }
    }

    pub fn trajectory(&self, temperature: T, t_grid: &[T]) -> Result<Trajectory<T>> {
        let model = self.model_at(temperature)?;
        match &self.solver {
            Solver::Heom { params, .. } => heom::propagate(&model, &self.bath(temperature)?, params, t_grid),
            Solver::Brme(opts) => redfield::brme_propagate(&model, &self.spectral, temperature, opts, t_grid),
        }
    }

    pub fn steady_state(&self, temperature: T, opts: &SteadyStateOptions<T>) -> Result<SteadyState<T>> {
        let model = self.model_at(temperature)?;
        match &self.solver {
            Solver::Heom { params, .. } => heom::steady_state(&model, &self.bath(temperature)?, params, opts),
            Solver::Brme(ropts) => redfield::brme_steady_state(&model, &self.spectral, temperature, ropts, opts),
        }
    }
}
