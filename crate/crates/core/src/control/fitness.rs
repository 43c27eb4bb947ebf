use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heom::uniform_grid;
use crate::metrology::{qsnr_trajectory, DerivativeOptions, MetrologyPoint};
use crate::scalar::{lit, to_f64, Real};
use crate::scenario::Scenario;

use super::sequence::ControlSequence;

pub const DEFAULT_TIME_SAMPLES: usize = 64;

/// Linearly increasing weights `w_j = (j+1)/N_t` over `N_t` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessSpec {
    pub n_time_samples: usize,
}

impl Default for FitnessSpec {
    fn default() -> Self {
        Self {
            n_time_samples: DEFAULT_TIME_SAMPLES,
        }
    }
}

impl FitnessSpec {
    pub fn new(n_time_samples: usize) -> Result<Self> {
        if n_time_samples < 2 {
            return Err(Error::InvalidParameter(format!(
                "fitness needs at least 2 time samples, got {n_time_samples}"
            )));
        }
        Ok(Self { n_time_samples })
    }

    pub fn weights(&self) -> Vec<f64> {
        let n = self.n_time_samples as f64;
        (0..self.n_time_samples).map(|j| (j as f64 + 1.0) / n).collect()
    }
}

/// `(1/N_t) Σ_j w_j Q_T(t_j)`.
pub fn weighted_fitness<T: Real>(points: &[MetrologyPoint<T>], spec: &FitnessSpec) -> Result<f64> {
    weighted_average(&points.iter().map(|p| to_f64(p.qsnr)).collect::<Vec<_>>(), spec)
}

pub fn weighted_average(qsnr: &[f64], spec: &FitnessSpec) -> Result<f64> {
    if qsnr.len() != spec.n_time_samples {
        return Err(Error::LengthMismatch {
            expected: spec.n_time_samples,
            got: qsnr.len(),
        });
    }
    let n = spec.n_time_samples as f64;
    Ok(spec.weights().iter().zip(qsnr).map(|(w, q)| w * q).sum::<f64>() / n)
}

/// Time-weighted QSNR of a single-qubit scenario under a drive.
#[derive(Debug, Clone)]
pub struct ControlProblem<T: Real> {
    pub scenario: Scenario<T>,
    pub temperature: T,
    pub n_segments: usize,
    pub t_max: T,
    pub spec: FitnessSpec,
    pub derivative: DerivativeOptions,
}

impl<T: Real> ControlProblem<T> {
    pub fn dimension(&self) -> usize {
        3 * self.n_segments
    }

    pub fn grid(&self) -> Vec<T> {
        uniform_grid(self.t_max, self.spec.n_time_samples)
    }

    pub fn sequence(&self, flat: &[f64]) -> Result<ControlSequence<T>> {
        if flat.len() != self.dimension() {
            return Err(Error::LengthMismatch {
                expected: self.dimension(),
                got: flat.len(),
            });
        }
        let v: Vec<T> = flat.iter().map(|&x| lit(x)).collect();
        ControlSequence::from_flat(&v, self.t_max)
    }

    /// QSNR series under the drive encoded by `flat`.
    pub fn series(&self, flat: &[f64]) -> Result<Vec<MetrologyPoint<T>>> {
        let cs = self.sequence(flat)?;
        let model = self.scenario.model.clone().with_control(cs)?;
        let scenario = self.scenario.with_model(model);
        Ok(qsnr_trajectory(&scenario, self.temperature, &self.grid(), &self.derivative)?.points)
    }

    pub fn fitness(&self, flat: &[f64]) -> Result<f64> {
        weighted_fitness(&self.series(flat)?, &self.spec)
    }

    pub fn baseline(&self) -> Result<f64> {
        self.fitness(&vec![0.0; self.dimension()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_rise_to_one() {
        let w = FitnessSpec::new(5).unwrap().weights();
        assert!(w.windows(2).all(|p| p[1] > p[0]));
        assert_eq!(*w.last().unwrap(), 1.0);
    }

    #[test]
    fn weighted_examples() {
        let spec = FitnessSpec::new(8).unwrap();
        let q = 0.3;
        let f = weighted_average(&[q; 8], &spec).unwrap();
        assert!((f - q * 9.0 / 16.0).abs() < 1e-15);
        assert_eq!(weighted_average(&[0.0; 8], &spec).unwrap(), 0.0);
        let spec4 = FitnessSpec::new(4).unwrap();
        assert_eq!(weighted_average(&[0.0, 0.0, 0.0, 1.0], &spec4).unwrap(), 0.25);
        assert!(weighted_average(&[1.0; 3], &spec4).is_err());
    }
}
