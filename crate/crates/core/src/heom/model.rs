use serde::{Deserialize, Serialize};

use crate::control::ControlSequence;
use crate::error::{Error, Result};
use crate::linalg::{identity, kron, sigma_x, sigma_y, sigma_z, validate_density, validate_hermitian};
use crate::scalar::{cre, lit, Op, Real};

/// Finite-dimensional probe coupled to the bath through one operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemModel<T: Real> {
    pub dim: usize,
    /// Time-independent part of the system Hamiltonian.
    pub h_base: Op<T>,
    /// System side of the system–bath coupling.
    pub coupling_op: Op<T>,
    /// Piecewise-constant drive; only defined for a single qubit.
    pub control: Option<ControlSequence<T>>,
    pub initial_state: Op<T>,
    pub omega0: T,
}

const OP_TOL: f64 = 1e-12;

impl<T: Real> SystemModel<T> {
    pub fn new(h_base: Op<T>, coupling_op: Op<T>, initial_state: Op<T>, omega0: T) -> Result<Self> {
        let dim = h_base.nrows();
        if dim < 2 {
            return Err(Error::Dimension(format!("system dimension must be >= 2, got {dim}")));
        }
        for (name, op) in [("coupling operator", &coupling_op), ("initial state", &initial_state)] {
            if op.nrows() != dim || op.ncols() != dim {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{}, Hamiltonian is {dim}x{dim}",
                    op.nrows(),
                    op.ncols()
                )));
            }
        }
        validate_hermitian("system Hamiltonian", &h_base, lit(OP_TOL))?;
        validate_hermitian("coupling operator", &coupling_op, lit(OP_TOL))?;
        validate_density(&initial_state, lit(OP_TOL))?;
        if !(omega0 > T::zero()) {
            return Err(Error::InvalidParameter(format!("omega0 must be > 0, got {omega0}")));
        }
        Ok(Self {
            dim,
            h_base,
            coupling_op,
            control: None,
            initial_state,
            omega0,
        })
    }

    pub fn with_control(mut self, control: ControlSequence<T>) -> Result<Self> {
        if self.dim != 2 {
            return Err(Error::Dimension(
                "piecewise-constant drives are defined for a single qubit only".into(),
            ));
        }
        self.control = Some(control);
        Ok(self)
    }

    pub fn with_initial_state(mut self, rho: Op<T>) -> Result<Self> {
        if rho.nrows() != self.dim {
            return Err(Error::Dimension(format!(
                "initial state is {}x{}, system is {}x{}",
                rho.nrows(),
                rho.ncols(),
                self.dim,
                self.dim
            )));
        }
        validate_density(&rho, lit(OP_TOL))?;
        self.initial_state = rho;
        Ok(self)
    }

    /// Hamiltonian on control segment `segment` (or the base Hamiltonian).
    pub fn hamiltonian(&self, segment: Option<usize>) -> Op<T> {
        match (&self.control, segment) {
            (Some(cs), Some(k)) => &self.h_base + cs.drive(k),
            _ => self.h_base.clone(),
        }
    }

    pub fn is_time_independent(&self) -> bool {
        self.control.is_none()
    }
}

/// `H_S = ω0/2 σ_z`, `S = σ_x`.
pub fn build_single_qubit<T: Real>(omega0: T, initial: Op<T>) -> Result<SystemModel<T>> {
    if initial.nrows() != 2 || initial.ncols() != 2 {
        return Err(Error::Dimension("single-qubit initial state must be 2x2".into()));
    }
    let h = sigma_z::<T>() * cre(omega0 * lit::<T>(0.5));
    SystemModel::new(h, sigma_x(), initial, omega0)
}

/// Two qubits in a common bath:
/// `H_S = ω0/2 (σ_z⊗1 + 1⊗σ_z) + g/2 (σ_x⊗σ_x + σ_y⊗σ_y)`, `S = σ_x⊗1 + 1⊗σ_x`.
pub fn build_two_qubit<T: Real>(omega0: T, g: T, initial: Op<T>) -> Result<SystemModel<T>> {
    if initial.nrows() != 4 || initial.ncols() != 4 {
        return Err(Error::Dimension(format!(
            "two-qubit initial state must be 4x4, got {}x{}",
            initial.nrows(),
            initial.ncols()
        )));
    }
    let id = identity::<T>(2);
    let half = lit::<T>(0.5);
    let (x, y, z) = (sigma_x::<T>(), sigma_y::<T>(), sigma_z::<T>());
    let h = (kron(&z, &id) + kron(&id, &z)) * cre(omega0 * half)
        + (kron(&x, &x) + kron(&y, &y)) * cre(g * half);
    let s = kron(&x, &id) + kron(&id, &x);
    SystemModel::new(h, s, initial, omega0)
}
