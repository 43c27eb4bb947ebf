//! Piecewise-constant single-qubit drives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sigma_x, sigma_y, sigma_z};
use crate::scalar::{cre, lit, to_f64, Op, Real};

/// `N` equal segments over `[0, t_max]`, each holding `(D_x, D_y, D_z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSequence<T> {
    pub amplitudes: Vec<[T; 3]>,
    pub t_max: T,
}

impl<T: Real> ControlSequence<T> {
    pub fn new(amplitudes: Vec<[T; 3]>, t_max: T) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter("control needs at least one segment".into()));
        }
        if !(t_max > T::zero()) {
            return Err(Error::InvalidParameter(format!("control t_max must be > 0, got {t_max}")));
        }
        Ok(Self { amplitudes, t_max })
    }

    pub fn zeros(n_segments: usize, t_max: T) -> Result<Self> {
        Self::new(vec![[T::zero(); 3]; n_segments], t_max)
    }

    /// Decodes a flat particle position `(Dx1, Dy1, Dz1, Dx2, ...)`.
    pub fn from_flat(flat: &[T], t_max: T) -> Result<Self> {
        if flat.is_empty() || flat.len() % 3 != 0 {
            return Err(Error::LengthMismatch {
                expected: 3 * flat.len().div_ceil(3).max(1),
                got: flat.len(),
            });
        }
        Self::new(flat.chunks(3).map(|c| [c[0], c[1], c[2]]).collect(), t_max)
    }

    pub fn to_flat(&self) -> Vec<T> {
        self.amplitudes.iter().flatten().copied().collect()
    }

    pub fn n_segments(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn segment_length(&self) -> T {
        self.t_max / lit::<T>(self.n_segments() as f64)
    }

    /// Start time of segment `k` (`k = N` gives `t_max`).
    pub fn boundary(&self, k: usize) -> T {
        if k >= self.n_segments() {
            self.t_max
        } else {
            self.segment_length() * lit::<T>(k as f64)
        }
    }

    /// Segments are left-closed; the last one also contains `t_max`.
    pub fn segment_index(&self, t: T) -> Result<usize> {
        if t < T::zero() || t > self.t_max {
            return Err(Error::OutsideWindow {
                t: to_f64(t),
                t_max: to_f64(self.t_max),
            });
        }
        let n = self.n_segments();
        let k = to_f64(t * lit::<T>(n as f64) / self.t_max).floor() as usize;
        Ok(k.min(n - 1))
    }

    pub fn max_abs_amplitude(&self) -> T {
        self.amplitudes
            .iter()
            .flatten()
            .fold(T::zero(), |m, a| m.max(a.abs()))
    }

    /// `½ (D_x σ_x + D_y σ_y + D_z σ_z)` for segment `k`.
    pub fn drive(&self, k: usize) -> Op<T> {
        let [dx, dy, dz] = self.amplitudes[k];
        let half = lit::<T>(0.5);
        sigma_x::<T>() * cre(half * dx) + sigma_y::<T>() * cre(half * dy) + sigma_z::<T>() * cre(half * dz)
    }
}

/// `ω0/2 σ_z + ½ Σ_i D_i^{(k)} σ_i` at time `t`.
pub fn controlled_hamiltonian<T: Real>(omega0: T, cs: &ControlSequence<T>, t: T) -> Result<Op<T>> {
    let k = cs.segment_index(t)?;
    Ok(sigma_z::<T>() * cre(omega0 * lit::<T>(0.5)) + cs.drive(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh, max_abs};

    #[test]
    fn zero_drive_is_bare_hamiltonian() {
        let cs = ControlSequence::<f64>::zeros(4, 10.0).unwrap();
        let bare = sigma_z::<f64>() * cre(0.5);
        for &t in &[0.0, 3.3, 7.5, 10.0] {
            assert!(max_abs(&(controlled_hamiltonian(1.0, &cs, t).unwrap() - &bare)) < 1e-15);
        }
    }

    #[test]
    fn boundary_belongs_to_next_segment() {
        let cs = ControlSequence::new(vec![[0.0, 0.0, 0.0], [0.3, 0.0, 0.0]], 8.0).unwrap();
        assert_eq!(cs.segment_index(4.0).unwrap(), 1);
        assert_eq!(cs.segment_index(3.999).unwrap(), 0);
        assert_eq!(cs.segment_index(8.0).unwrap(), 1);
        assert!(cs.segment_index(8.01).is_err());
        assert!(cs.segment_index(-0.1).is_err());
    }

    #[test]
    fn z_drive_shifts_splitting() {
        let cs = ControlSequence::new(vec![[0.5, 0.0, 0.0], [0.0, 0.0, 0.5]], 2.0).unwrap();
        let (vals, _): (Vec<f64>, _) = eigh(&controlled_hamiltonian(1.0, &cs, 1.5).unwrap());
        assert!((vals[0] + 0.75).abs() < 1e-14 && (vals[1] - 0.75).abs() < 1e-14);
    }

    #[test]
    fn flat_round_trip() {
        let flat = vec![0.1, -0.2, 0.3, 0.4, 0.5, -0.6];
        let cs = ControlSequence::from_flat(&flat, 5.0).unwrap();
        assert_eq!(cs.n_segments(), 2);
        assert_eq!(cs.to_flat(), flat);
        assert!(ControlSequence::from_flat(&flat[..4], 5.0).is_err());
    }
}
