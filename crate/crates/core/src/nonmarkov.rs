//! Trace-distance dynamics and the BLP measure over a library of state pairs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{projector, trace_norm, validate_density};
use crate::scalar::{cis, cre, cx, lit, to_f64, Op, Real};
use crate::scenario::Scenario;

/// Relative change of `N` under 2x grid refinement that triggers a warning.
pub const REFINEMENT_TOLERANCE: f64 = 0.01;
/// Below this, `N` is treated as zero by the refinement check.
pub const REFINEMENT_FLOOR: f64 = 1e-6;

/// `½ Tr|ρ_a − ρ_b|`.
pub fn trace_distance<T: Real>(a: &Op<T>, b: &Op<T>) -> Result<T> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(trace_norm(&(a - b)) * lit::<T>(0.5))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatePair<T: Real> {
    pub label: String,
    pub rho_a: Op<T>,
    pub rho_b: Op<T>,
}

impl<T: Real> StatePair<T> {
    pub fn new(label: impl Into<String>, rho_a: Op<T>, rho_b: Op<T>) -> Result<Self> {
        validate_density(&rho_a, lit(1e-10))?;
        validate_density(&rho_b, lit(1e-10))?;
        if rho_a.shape() != rho_b.shape() {
            return Err(Error::Dimension("state pair has mismatched dimensions".into()));
        }
        Ok(Self {
            label: label.into(),
            rho_a,
            rho_b,
        })
    }
}

pub const X_SUPERPOSITION: &str = "x-superposition (|±⟩)";

/// The six built-in qubit pairs. Pairs 4 and 5 are separated by π/2 on the
/// Bloch sphere rather than antipodal.
pub fn builtin_pairs<T: Real>() -> Vec<StatePair<T>> {
    let (o, l) = (cre(T::zero()), cre(T::one()));
    let i = cx(T::zero(), T::one());
    let c8 = cre(lit::<T>(std::f64::consts::FRAC_PI_8.cos()));
    let s8 = lit::<T>(std::f64::consts::FRAC_PI_8.sin());
    let phase = cis(lit::<T>(std::f64::consts::FRAC_PI_3));
    let half = cre(lit::<T>(0.5));
    let pair = |label: &str, a: [crate::scalar::Cx<T>; 2], b: [crate::scalar::Cx<T>; 2]| StatePair {
        label: label.to_string(),
        rho_a: projector(&a),
        rho_b: projector(&b),
    };
    vec![
        pair("computational (|0⟩,|1⟩)", [l, o], [o, l]),
        pair(X_SUPERPOSITION, [l, l], [l, -l]),
        pair("y-superposition (|L⟩,|R⟩)", [l, i], [l, -i]),
        pair("rotated (±π/8)", [c8, cre(s8)], [c8, cre(-s8)]),
        pair("phase-modulated (±π/8, π/3)", [c8, phase * s8], [c8, -phase * s8]),
        pair("asymmetric (|0⟩+0.5|1⟩)", [l, half], [-half, l]),
    ]
}

/// `Σ_i max(0, D_{i+1} − D_i)`.
pub fn positive_increments<T: Real>(distance: &[T]) -> T {
    distance
        .windows(2)
        .fold(T::zero(), |acc, w| acc + (w[1] - w[0]).max(T::zero()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlpResult<T> {
    pub pair_label: String,
    pub measure: T,
    pub times: Vec<T>,
    pub distance: Vec<T>,
    /// Measure on the 2x refined grid.
    pub refined_measure: T,
    /// False when refinement moved the measure by more than 1%.
    pub resolution_ok: bool,
}

fn refine<T: Real>(t_grid: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(2 * t_grid.len());
    for w in t_grid.windows(2) {
        out.push(w[0]);
        out.push((w[0] + w[1]) * lit::<T>(0.5));
    }
    out.extend(t_grid.last());
    out
}

/// Propagates both members of `pair` and accumulates information backflow.
pub fn blp_measure<T: Real>(
    scenario: &Scenario<T>,
    temperature: T,
    pair: &StatePair<T>,
    t_grid: &[T],
) -> Result<BlpResult<T>> {
    let pinned = scenario.pinned(temperature)?;
    let fine_grid = refine(t_grid);
    let run = |rho: &Op<T>| -> Result<Vec<Op<T>>> {
        let model = pinned.model.clone().with_initial_state(rho.clone())?;
        Ok(pinned.with_model(model).trajectory(temperature, &fine_grid)?.states)
    };
    let (a, b) = rayon::join(|| run(&pair.rho_a), || run(&pair.rho_b));
    let (a, b) = (a?, b?);
    let fine: Vec<T> = a
        .iter()
        .zip(&b)
        .map(|(x, y)| trace_distance(x, y))
        .collect::<Result<_>>()?;
    let coarse: Vec<T> = fine.iter().step_by(2).copied().collect();
    let measure = positive_increments(&coarse);
    let refined_measure = positive_increments(&fine);
    let (m, r) = (to_f64(measure), to_f64(refined_measure));
    let resolution_ok = m.max(r) < REFINEMENT_FLOOR || (m - r).abs() <= REFINEMENT_TOLERANCE * m.max(r);
    if !resolution_ok {
        log::warn!(
            "BLP measure for {} changes from {m:.3e} to {r:.3e} under grid refinement",
            pair.label
        );
    }
    Ok(BlpResult {
        pair_label: pair.label.clone(),
        measure,
        times: t_grid.to_vec(),
        distance: coarse,
        refined_measure,
        resolution_ok,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlpSummary<T> {
    pub winner: usize,
    pub results: Vec<BlpResult<T>>,
}

impl<T: Real> BlpSummary<T> {
    pub fn best(&self) -> &BlpResult<T> {
        &self.results[self.winner]
    }
}

/// Evaluates every pair concurrently and picks the largest measure
/// (earliest pair on ties).
pub fn blp_maximize<T: Real>(
    scenario: &Scenario<T>,
    temperature: T,
    t_grid: &[T],
    pairs: &[StatePair<T>],
) -> Result<BlpSummary<T>> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("no state pairs to evaluate".into()));
    }
    let results: Vec<BlpResult<T>> = pairs
        .par_iter()
        .map(|p| blp_measure(scenario, temperature, p, t_grid))
        .collect::<Result<_>>()?;
    let winner = results
        .iter()
        .enumerate()
        .fold(0, |best, (i, r)| if r.measure > results[best].measure { i } else { best });
    Ok(BlpSummary { winner, results })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrology::bloch_vector;

    #[test]
    fn distance_examples() {
        let p = builtin_pairs::<f64>();
        assert!((trace_distance(&p[0].rho_a, &p[0].rho_b).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(trace_distance(&p[0].rho_a, &p[0].rho_a).unwrap(), 0.0);
        let mixed = crate::linalg::identity::<f64>(2) * cre(0.5);
        assert!((trace_distance(&p[1].rho_a, &mixed).unwrap() - 0.5).abs() < 1e-14);
        assert!(trace_distance(&p[0].rho_a, &crate::linalg::identity::<f64>(4)).is_err());
    }

    #[test]
    fn library_pairs() {
        let p = builtin_pairs::<f64>();
        assert_eq!(p.len(), 6);
        // the rotated and phase-modulated pairs sit at ±π/4 and overlap
        for pair in [&p[0], &p[1], &p[2], &p[5]] {
            let overlap = (&pair.rho_a * &pair.rho_b).trace().norm();
            assert!(overlap < 1e-12, "{}", pair.label);
            assert!((trace_distance(&pair.rho_a, &pair.rho_b).unwrap() - 1.0).abs() < 1e-12);
        }
        for pair in [&p[3], &p[4]] {
            let d = trace_distance(&pair.rho_a, &pair.rho_b).unwrap();
            assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12, "{}", pair.label);
        }
        let (a, b) = (bloch_vector(&p[3].rho_a).unwrap(), bloch_vector(&p[3].rho_b).unwrap());
        let q = std::f64::consts::FRAC_PI_4;
        assert!((a.x - q.sin()).abs() < 1e-14 && (a.z - q.cos()).abs() < 1e-14 && a.y.abs() < 1e-14);
        assert!((b.x + q.sin()).abs() < 1e-14 && (b.z - q.cos()).abs() < 1e-14);
    }

    #[test]
    fn increments() {
        assert_eq!(positive_increments(&[1.0, 0.5, 0.7, 0.6, 0.9]), 0.5);
        assert_eq!(positive_increments(&[1.0, 0.9, 0.8]), 0.0);
    }

    #[test]
    fn refined_grid_has_midpoints() {
        assert_eq!(refine(&[0.0, 1.0, 3.0]), vec![0.0, 0.5, 1.0, 2.0, 3.0]);
    }
}
