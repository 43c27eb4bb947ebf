use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::{matsubara_expansion, BathExpansion, SpectralDensity};
use crate::error::{Error, Result};
use crate::linalg::{total_sigma_z, trace_norm};
use crate::ode::Stepper;
use crate::scalar::{cre, lit, to_f64, Cx, Op, Real};

use super::generator::HeomGenerator;
use super::hierarchy::Hierarchy;
use super::model::SystemModel;
use super::{validate_grid, HeomParams, Trajectory};

/// All auxiliary operators at one instant, stored in scaled form.
#[derive(Debug, Clone)]
pub struct HeomState<T: Real> {
    pub ados: Vec<Cx<T>>,
    pub hierarchy: Arc<Hierarchy>,
    pub weights: Vec<T>,
    pub dim: usize,
    pub time: T,
}

impl<T: Real> HeomState<T> {
    /// Hierarchy initialised with `ρ_0 = ρ_S(0)` and every other ADO zero.
    pub fn initial(rho0: &Op<T>, hierarchy: Arc<Hierarchy>, weights: Vec<T>) -> Self {
        let d = rho0.nrows();
        let mut ados = vec![cre(T::zero()); hierarchy.len() * d * d];
        ados[..d * d].copy_from_slice(rho0.as_slice());
        Self { ados, hierarchy, weights, dim: d, time: T::zero() }
    }

    /// Level-0 (physical) reduced density matrix.
    pub fn physical(&self) -> Op<T> {
        let d2 = self.dim * self.dim;
        Op::from_column_slice(self.dim, self.dim, &self.ados[..d2])
    }

    /// Unscaled auxiliary operator at flat position `i`.
    pub fn ado(&self, i: usize) -> Op<T> {
        let d2 = self.dim * self.dim;
        Op::from_column_slice(self.dim, self.dim, &self.ados[i * d2..(i + 1) * d2]) * cre(self.weights[i])
    }
}

/// Incremental HEOM propagation, rebuilding the generator at control
/// segment boundaries.
pub struct HeomPropagator<'a, T: Real> {
    model: &'a SystemModel<T>,
    bath: &'a BathExpansion<T>,
    params: &'a HeomParams<T>,
    hierarchy: Arc<Hierarchy>,
    generators: HashMap<Option<usize>, HeomGenerator<T>>,
    active: Option<Option<usize>>,
    state: HeomState<T>,
    stepper: Stepper<T>,
}

impl<'a, T: Real> HeomPropagator<'a, T> {
    pub fn new(model: &'a SystemModel<T>, bath: &'a BathExpansion<T>, params: &'a HeomParams<T>) -> Result<Self> {
        params.validate()?;
        let hierarchy = Arc::new(Hierarchy::new(bath.n_exponentials(), params.depth, params.hierarchy_cap)?);
        let mut generators = HashMap::new();
        let first_key = model.control.as_ref().map(|_| 0);
        let gen = HeomGenerator::build(
            hierarchy.clone(),
            &model.hamiltonian(first_key),
            &model.coupling_op,
            bath,
            params,
        );
        let state = HeomState::initial(&model.initial_state, hierarchy.clone(), gen.weights.clone());
        let stepper = Stepper::new(params.integrator, gen.len());
        generators.insert(first_key, gen);
        Ok(Self {
            model,
            bath,
            params,
            hierarchy,
            generators,
            active: None,
            state,
            stepper,
        })
    }

    pub fn state(&self) -> &HeomState<T> {
        &self.state
    }

    pub fn time(&self) -> T {
        self.state.time
    }

    pub fn physical(&self) -> Op<T> {
        self.state.physical()
    }

    pub fn generator(&self, segment: Option<usize>) -> Option<&HeomGenerator<T>> {
        self.generators.get(&segment)
    }

    pub fn advance_to(&mut self, target: T) -> Result<()> {
        while self.state.time < target {
            let (key, piece_end) = match &self.model.control {
                None => (None, target),
                Some(cs) => {
                    if target > cs.t_max {
                        return Err(Error::OutsideWindow {
                            t: to_f64(target),
                            t_max: to_f64(cs.t_max),
                        });
                    }
                    let mut k = cs.segment_index(self.state.time)?;
                    while k + 1 < cs.n_segments() && cs.boundary(k + 1) <= self.state.time {
                        k += 1;
                    }
                    let end = if k + 1 == cs.n_segments() { cs.t_max } else { cs.boundary(k + 1) };
                    (Some(k), end.min(target))
                }
            };
            if !self.generators.contains_key(&key) {
                let gen = HeomGenerator::build(
                    self.hierarchy.clone(),
                    &self.model.hamiltonian(key),
                    &self.model.coupling_op,
                    self.bath,
                    self.params,
                );
                self.generators.insert(key, gen);
            }
            if self.active != Some(key) {
                self.stepper.reset_rhs();
                self.active = Some(key);
            }
            let gen = &self.generators[&key];
            let rhs = |x: &[Cx<T>], y: &mut [Cx<T>]| gen.apply(x, y);
            self.stepper.advance(&rhs, &mut self.state.ados, self.state.time, piece_end)?;
            self.state.time = piece_end;
        }
        Ok(())
    }
}

/// Level-0 states sampled on `t_grid` (which must start at 0).
pub fn propagate<T: Real>(
    model: &SystemModel<T>,
    bath: &BathExpansion<T>,
    params: &HeomParams<T>,
    t_grid: &[T],
) -> Result<Trajectory<T>> {
    validate_grid(t_grid)?;
    let mut prop = HeomPropagator::new(model, bath, params)?;
    let mut states = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        prop.advance_to(t)?;
        states.push(prop.physical());
    }
    Ok(Trajectory { times: t_grid.to_vec(), states })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateOptions<T> {
    pub probe_window: T,
    pub tolerance: T,
    pub t_max: T,
}

impl<T: Real> Default for SteadyStateOptions<T> {
    fn default() -> Self {
        Self {
            probe_window: lit(20.0),
            tolerance: lit(1e-7),
            t_max: lit(1e4),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyState<T: Real> {
    pub rho: Op<T>,
    pub convergence_time: T,
    pub residual: T,
}

/// Propagates until the trace-norm change over one probe window drops
/// below the tolerance.
pub fn steady_state<T: Real>(
    model: &SystemModel<T>,
    bath: &BathExpansion<T>,
    params: &HeomParams<T>,
    opts: &SteadyStateOptions<T>,
) -> Result<SteadyState<T>> {
    if !model.is_time_independent() {
        return Err(Error::InvalidParameter(
            "steady state requires a time-independent Hamiltonian".into(),
        ));
    }
    if !(opts.probe_window > T::zero()) || !(opts.tolerance > T::zero()) {
        return Err(Error::InvalidParameter("probe window and tolerance must be > 0".into()));
    }
    let mut prop = HeomPropagator::new(model, bath, params)?;
    let mut prev = prop.physical();
    let mut residual = T::max_value().unwrap_or_else(T::one);
    while prop.time() < opts.t_max {
        let next_t = (prop.time() + opts.probe_window).min(opts.t_max);
        prop.advance_to(next_t)?;
        let rho = prop.physical();
        residual = trace_norm(&(&rho - &prev));
        if residual < opts.tolerance {
            return Ok(SteadyState {
                rho,
                convergence_time: prop.time(),
                residual,
            });
        }
        prev = rho;
    }
    Err(Error::SteadyStateNotConverged {
        t_max: to_f64(opts.t_max),
        residual: to_f64(residual),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefineAxis {
    Depth,
    Matsubara,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub axis: RefineAxis,
    pub n_matsubara: usize,
    pub depth: usize,
    /// Max-over-time deviation of the observable from the previous setting
    /// in the same refinement chain.
    pub deviation: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub threshold: f64,
}

impl ConvergenceReport {
    /// First setting that agrees with its predecessor within the threshold.
    pub fn converged_at(&self) -> Option<(usize, usize)> {
        self.rows
            .iter()
            .find(|r| r.converged)
            .map(|r| (r.n_matsubara, r.depth))
    }

    /// Depth-refinement deviations for one `N_k`, in depth order.
    pub fn depth_deviations(&self, n_matsubara: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.axis == RefineAxis::Depth && r.n_matsubara == n_matsubara)
            .filter_map(|r| r.deviation)
            .collect()
    }
}

pub const CONVERGENCE_THRESHOLD: f64 = 1e-3;

/// Runs every `(N_k, L)` combination and reports successive deviations of
/// `⟨Σ_i σ_z^{(i)}⟩(t)`: along depth at fixed `N_k`, and along `N_k` at the
/// deepest level.
pub fn convergence_sweep<T: Real>(
    model: &SystemModel<T>,
    spectral: &SpectralDensity<T>,
    temperature: T,
    params: &HeomParams<T>,
    depths: &[usize],
    n_matsubaras: &[usize],
    t_grid: &[T],
) -> Result<ConvergenceReport> {
    if depths.is_empty() || n_matsubaras.is_empty() {
        return Err(Error::InvalidParameter("convergence sweep needs non-empty lists".into()));
    }
    let mut depths = depths.to_vec();
    depths.sort_unstable();
    let mut nks = n_matsubaras.to_vec();
    nks.sort_unstable();

    let observable = total_sigma_z::<T>(model.dim);
    let settings: Vec<(usize, usize)> = nks
        .iter()
        .flat_map(|&nk| depths.iter().map(move |&l| (nk, l)))
        .collect();
    let series: Vec<Vec<f64>> = settings
        .par_iter()
        .map(|&(nk, l)| -> Result<Vec<f64>> {
            let bath = matsubara_expansion(spectral, temperature, nk)?;
            let p = params.clone().with_depth(l);
            let traj = propagate(model, &bath, &p, t_grid)?;
            Ok(traj.expectation(&observable).into_iter().map(to_f64).collect())
        })
        .collect::<Result<_>>()?;

    let max_dev = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let nd = depths.len();
    let mut rows = Vec::with_capacity(settings.len() + nks.len());
    for (i, &(nk, l)) in settings.iter().enumerate() {
        let deviation = (i % nd > 0).then(|| max_dev(&series[i], &series[i - 1]));
        rows.push(ConvergenceRow {
            axis: RefineAxis::Depth,
            n_matsubara: nk,
            depth: l,
            deviation,
            converged: deviation.is_some_and(|d| d < CONVERGENCE_THRESHOLD),
        });
    }
    let deepest = nd - 1;
    for j in 1..nks.len() {
        let d = max_dev(&series[j * nd + deepest], &series[(j - 1) * nd + deepest]);
        rows.push(ConvergenceRow {
            axis: RefineAxis::Matsubara,
            n_matsubara: nks[j],
            depth: depths[deepest],
            deviation: Some(d),
            converged: d < CONVERGENCE_THRESHOLD,
        });
    }
    Ok(ConvergenceReport {
        rows,
        threshold: CONVERGENCE_THRESHOLD,
    })
}
