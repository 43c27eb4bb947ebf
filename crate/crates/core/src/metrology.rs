//! Bloch vectors, quantum Fisher information with respect to temperature,
//! QSNR and the equilibrium benchmark.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heom::{SteadyStateOptions, Trajectory};
use crate::linalg::{eigh, hermiticity_defect, sigma_x, sigma_y, sigma_z};
use crate::scalar::{lit, to_f64, Op, Real};
use crate::scenario::Scenario;

/// Bloch vectors within this distance of the unit sphere count as pure.
pub const PURE_THRESHOLD: f64 = 1e-9;
/// Eigenvalue pairs with `p_i + p_j` below this are dropped from the spectral sum.
pub const RANK_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> BlochVector<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn dot(&self, o: &Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm_sqr(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs_diff(&self, o: &Self) -> T {
        (self.x - o.x).abs().max((self.y - o.y).abs()).max((self.z - o.z).abs())
    }
}

fn pauli_expectations<T: Real>(a: &Op<T>) -> BlochVector<T> {
    let e = |p: Op<T>| (a * p).trace().re;
    BlochVector::new(e(sigma_x()), e(sigma_y()), e(sigma_z()))
}

/// Pauli expectations of a qubit state.
pub fn bloch_vector<T: Real>(rho: &Op<T>) -> Result<BlochVector<T>> {
    if rho.nrows() != 2 || rho.ncols() != 2 {
        return Err(Error::Dimension(format!(
            "Bloch vector needs a 2x2 state, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    Ok(pauli_expectations(rho))
}

/// `Tr(∂ρ σ)` for a qubit derivative (no trace normalisation).
pub fn bloch_derivative<T: Real>(drho: &Op<T>) -> Result<BlochVector<T>> {
    bloch_vector(drho)
}

/// `|ds|² + (s·ds)² / (1 − |s|²)`, with the pure-state limit handled explicitly.
pub fn qfi_bloch<T: Real>(s: &BlochVector<T>, ds: &BlochVector<T>) -> Result<T> {
    let n2 = s.norm_sqr();
    let radial = s.dot(ds);
    let eps = lit::<T>(PURE_THRESHOLD);
    if n2.sqrt() >= T::one() - eps {
        if radial.abs() < eps {
            return Ok(ds.norm_sqr());
        }
        return Err(Error::SingularPurity {
            norm: to_f64(n2.sqrt()),
            radial: to_f64(radial),
        });
    }
    Ok(ds.norm_sqr() + radial * radial / (T::one() - n2))
}

/// Spectral form `Σ_{ij} 2 |⟨i|∂ρ|j⟩|² / (p_i + p_j)`.
pub fn qfi_mixed<T: Real>(rho: &Op<T>, drho: &Op<T>) -> Result<T> {
    if rho.shape() != drho.shape() || rho.nrows() != rho.ncols() {
        return Err(Error::Dimension(format!(
            "state is {:?}, derivative is {:?}",
            rho.shape(),
            drho.shape()
        )));
    }
    let defect = hermiticity_defect(drho);
    if defect > lit(1e-8) {
        return Err(Error::NotHermitian(format!("temperature derivative (defect {defect})")));
    }
    let (p, v) = eigh(rho);
    let d = v.adjoint() * drho * &v;
    let n = rho.nrows();
    let mut f = T::zero();
    for i in 0..n {
        for j in 0..n {
            let s = p[i] + p[j];
            if s > lit(RANK_THRESHOLD) {
                f += lit::<T>(2.0) * d[(i, j)].norm_sqr() / s;
            }
        }
    }
    Ok(f)
}

pub fn qsnr<T: Real>(temperature: T, qfi: T) -> T {
    temperature * temperature * qfi
}

/// `(ω0/2T)² sech²(ω0/2T)`, the QSNR of a Gibbs qubit.
pub fn thermal_benchmark<T: Real>(temperature: T, omega0: T) -> T {
    let x = omega0 / (lit::<T>(2.0) * temperature);
    let sech = T::one() / x.cosh();
    x * x * sech * sech
}

/// QFI for either a qubit (Bloch route) or a larger system (spectral route).
pub fn qfi<T: Real>(rho: &Op<T>, drho: &Op<T>) -> Result<T> {
    if rho.nrows() == 2 {
        qfi_bloch(&bloch_vector(rho)?, &bloch_derivative(drho)?)
    } else {
        qfi_mixed(rho, drho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeScheme {
    /// `(ρ(T+δ) − ρ(T−δ)) / 2δ`
    #[default]
    Central,
    /// Central differences at `δ` and `δ/2` combined to cancel the `δ²` term.
    Richardson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeOptions {
    /// `δ / T`.
    pub relative_step: f64,
    pub scheme: DerivativeScheme,
}

impl Default for DerivativeOptions {
    fn default() -> Self {
        Self {
            relative_step: 1e-3,
            scheme: DerivativeScheme::Central,
        }
    }
}

impl DerivativeOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.relative_step > 0.0 && self.relative_step < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "derivative.relative_step must lie in (0, 0.5), got {}",
                self.relative_step
            )));
        }
        Ok(())
    }
}

fn central<T: Real>(plus: &[Op<T>], minus: &[Op<T>], delta: T) -> Vec<Op<T>> {
    let scale = crate::scalar::cre(T::one() / (lit::<T>(2.0) * delta));
    plus.iter().zip(minus).map(|(p, m)| (p - m) * scale).collect()
}

fn richardson<T: Real>(coarse: Vec<Op<T>>, fine: Vec<Op<T>>) -> Vec<Op<T>> {
    let (four, three) = (crate::scalar::cre(lit::<T>(4.0)), crate::scalar::cre(lit::<T>(3.0)));
    fine.into_iter()
        .zip(coarse)
        .map(|(f, c)| (f * four - c).map(|z| z / three))
        .collect()
}

/// Finite-difference `∂ρ/∂T` along `t_grid`, from paired runs at `T ± δ`
/// sharing every truncation setting of the central temperature.
pub fn temperature_derivative<T: Real>(
    scenario: &Scenario<T>,
    temperature: T,
    delta: T,
    t_grid: &[T],
) -> Result<Vec<Op<T>>> {
    if !(delta > T::zero()) || !(delta < temperature) {
        return Err(Error::InvalidParameter(format!(
            "derivative step must lie in (0, T), got {delta}"
        )));
    }
    let pinned = scenario.pinned(temperature)?;
    let (plus, minus) = rayon::join(
        || pinned.trajectory(temperature + delta, t_grid),
        || pinned.trajectory(temperature - delta, t_grid),
    );
    Ok(central(&plus?.states, &minus?.states, delta))
}

/// `temperature_derivative` with the scheme chosen in `opts`.
pub fn temperature_derivative_with<T: Real>(
    scenario: &Scenario<T>,
    temperature: T,
    t_grid: &[T],
    opts: &DerivativeOptions,
) -> Result<Vec<Op<T>>> {
    opts.validate()?;
    let delta = temperature * lit::<T>(opts.relative_step);
    match opts.scheme {
        DerivativeScheme::Central => temperature_derivative(scenario, temperature, delta, t_grid),
        DerivativeScheme::Richardson => {
            let half = delta * lit::<T>(0.5);
            let (coarse, fine) = rayon::join(
                || temperature_derivative(scenario, temperature, delta, t_grid),
                || temperature_derivative(scenario, temperature, half, t_grid),
            );
            Ok(richardson(coarse?, fine?))
        }
    }
}

/// One sample of the metrological figures of merit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetrologyPoint<T> {
    pub time: T,
    pub qfi: T,
    pub qsnr: T,
    /// Only for qubit probes.
    pub bloch: Option<BlochVector<T>>,
    pub dbloch_dt: Option<BlochVector<T>>,
}

/// QSNR along a trajectory together with its maximum and final value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QsnrSeries<T> {
    pub temperature: T,
    pub points: Vec<MetrologyPoint<T>>,
}

impl<T: Real> QsnrSeries<T> {
    pub fn qsnr(&self) -> Vec<T> {
        self.points.iter().map(|p| p.qsnr).collect()
    }

    pub fn max(&self) -> &MetrologyPoint<T> {
        self.points
            .iter()
            .fold(&self.points[0], |best, p| if p.qsnr > best.qsnr { p } else { best })
    }

    pub fn last(&self) -> &MetrologyPoint<T> {
        self.points.last().expect("non-empty series")
    }
}

fn metrology_point<T: Real>(time: T, temperature: T, rho: &Op<T>, drho: &Op<T>) -> Result<MetrologyPoint<T>> {
    let (bloch, dbloch) = if rho.nrows() == 2 {
        (Some(bloch_vector(rho)?), Some(bloch_derivative(drho)?))
    } else {
        (None, None)
    };
    let f = match (&bloch, &dbloch) {
        (Some(s), Some(ds)) => qfi_bloch(s, ds)?,
        _ => qfi_mixed(rho, drho)?,
    };
    Ok(MetrologyPoint {
        time,
        qfi: f,
        qsnr: qsnr(temperature, f),
        bloch,
        dbloch_dt: dbloch,
    })
}

/// Propagation, temperature derivative and QFI composed along `t_grid`.
pub fn qsnr_trajectory<T: Real>(
    scenario: &Scenario<T>,
    temperature: T,
    t_grid: &[T],
    opts: &DerivativeOptions,
) -> Result<QsnrSeries<T>> {
    let pinned = scenario.pinned(temperature)?;
    let (traj, drho) = rayon::join(
        || pinned.trajectory(temperature, t_grid),
        || temperature_derivative_with(&pinned, temperature, t_grid, opts),
    );
    qsnr_from(&traj?, &drho?, temperature)
}

/// QSNR series from a trajectory and matching derivatives.
pub fn qsnr_from<T: Real>(traj: &Trajectory<T>, drho: &[Op<T>], temperature: T) -> Result<QsnrSeries<T>> {
    if traj.len() != drho.len() {
        return Err(Error::LengthMismatch {
            expected: traj.len(),
            got: drho.len(),
        });
    }
    let points = traj
        .times
        .iter()
        .zip(&traj.states)
        .zip(drho)
        .map(|((&t, rho), d)| metrology_point(t, temperature, rho, d))
        .collect::<Result<_>>()?;
    Ok(QsnrSeries { temperature, points })
}

#[derive(Debug, Clone)]
pub struct SteadyQsnr<T: Real> {
    pub rho: Op<T>,
    pub point: MetrologyPoint<T>,
    pub convergence_time: T,
}

/// `Q_T(∞)`: the central run is propagated until the steady-state detector
/// fires, and the `T ± δ` companions are sampled at that same time.
pub fn steady_qsnr<T: Real>(
    scenario: &Scenario<T>,
    temperature: T,
    steady: &SteadyStateOptions<T>,
    opts: &DerivativeOptions,
) -> Result<SteadyQsnr<T>> {
    opts.validate()?;
    let pinned = scenario.pinned(temperature)?;
    let ss = pinned.steady_state(temperature, steady)?;
    let grid = [T::zero(), ss.convergence_time];
    let drho = temperature_derivative_with(&pinned, temperature, &grid, opts)?;
    let point = metrology_point(ss.convergence_time, temperature, &ss.rho, &drho[1])?;
    Ok(SteadyQsnr {
        rho: ss.rho,
        point,
        convergence_time: ss.convergence_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gibbs_state, projector};
    use crate::scalar::cre;
    use approx::assert_relative_eq;

    #[test]
    fn bloch_examples() {
        let plus = projector(&[cre(1.0), cre(1.0)]);
        let b = bloch_vector(&plus).unwrap();
        assert_relative_eq!(b.x, 1.0, epsilon = 1e-15);
        let g = gibbs_state(&(sigma_z::<f64>() * cre(0.5)), 0.2);
        let b = bloch_vector(&g).unwrap();
        assert_relative_eq!(b.z, -(2.5f64).tanh(), epsilon = 1e-14);
        assert!(bloch_vector(&crate::linalg::identity::<f64>(4)).is_err());
    }

    #[test]
    fn qfi_bloch_radial_and_pure() {
        let d = 0.37;
        let f = qfi_bloch(&BlochVector::new(0.0, 0.0, 0.5), &BlochVector::new(0.0, 0.0, d)).unwrap();
        assert_relative_eq!(f, 4.0 / 3.0 * d * d, max_relative = 1e-14);
        let f = qfi_bloch(&BlochVector::new(1.0, 0.0, 0.0), &BlochVector::new(0.0, 0.2, 0.0)).unwrap();
        assert_relative_eq!(f, 0.04, max_relative = 1e-14);
        let err = qfi_bloch(&BlochVector::new(1.0, 0.0, 0.0), &BlochVector::new(0.1, 0.0, 0.0));
        assert!(matches!(err, Err(Error::SingularPurity { .. })));
    }

    #[test]
    fn gibbs_qfi_matches_benchmark() {
        // d<σ_z>/dT for the Gibbs qubit, analytically.
        let t = 0.2;
        let x: f64 = 0.5 / t;
        let s = BlochVector::new(0.0, 0.0, -x.tanh());
        let ds = BlochVector::new(0.0, 0.0, x / t / x.cosh().powi(2));
        let f = qfi_bloch(&s, &ds).unwrap();
        assert_relative_eq!(qsnr(t, f), thermal_benchmark(t, 1.0), max_relative = 1e-12);
        // 6.25 sech²(2.5), evaluated to 20 digits with mpmath
        assert_relative_eq!(thermal_benchmark(0.2, 1.0), 0.16620141676975386, max_relative = 1e-14);
    }

    #[test]
    fn benchmark_limits() {
        assert!(thermal_benchmark(1e4, 1.0) < 1e-8);
        let exact = thermal_benchmark(0.05, 1.0);
        // (ω0/T)² e^{-ω0/T}
        let asym = 400.0 * (-20.0f64).exp();
        assert!(((exact - asym) / exact).abs() < 1e-3);
        assert_relative_eq!(exact, 8.24e-7, max_relative = 1e-3);
        assert_relative_eq!(qsnr(1.0, 0.42), 0.42);
        assert_eq!(qsnr(0.2, 0.0), 0.0);
    }

    #[test]
    fn zero_derivative_has_zero_qfi() {
        let g = gibbs_state(&(sigma_z::<f64>() * cre(0.5)), 0.3);
        assert_eq!(qfi_mixed(&g, &crate::linalg::zeros(2)).unwrap(), 0.0);
        assert!(qfi_mixed(&g, &sigma_y::<f64>().map(|z| z * crate::scalar::cx(0.0, 1.0))).is_err());
    }
}
