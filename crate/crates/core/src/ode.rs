//! Explicit Runge–Kutta integrators for complex linear systems `y' = A y`.
//!
//! Only the action of `A` is needed. The adaptive scheme is the
//! Dormand–Prince 5(4) pair with FSAL; the fixed-step scheme is classical RK4
//! with the interval split into equal substeps so that runs are reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cabs, cre, lit, to_f64, Cx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Integrator<T> {
    FixedRk4 { dt: T },
    AdaptiveRk45 { rtol: T, atol: T },
}

impl<T: Real> Default for Integrator<T> {
    fn default() -> Self {
        Integrator::AdaptiveRk45 {
            rtol: lit(1e-8),
            atol: lit(1e-10),
        }
    }
}

impl<T: Real> Integrator<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Integrator::FixedRk4 { dt } => dt > T::zero(),
            Integrator::AdaptiveRk45 { rtol, atol } => rtol > T::zero() && atol > T::zero(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "integrator step and tolerances must be > 0".into(),
            ))
        }
    }
}

/// Reusable integrator state: scratch buffers plus the step-size memory of
/// the adaptive scheme.
pub struct Stepper<T: Real> {
    method: Integrator<T>,
    k: [Vec<Cx<T>>; 7],
    tmp: Vec<Cx<T>>,
    y_new: Vec<Cx<T>>,
    h: Option<T>,
    fsal_valid: bool,
    pub accepted: usize,
    pub rejected: usize,
}

// Dormand–Prince tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded error weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine<T: Real>(out: &mut [Cx<T>], y: &[Cx<T>], h: T, terms: &[(f64, &[Cx<T>])]) {
    let coeffs: Vec<Cx<T>> = terms.iter().map(|(c, _)| cre(h * lit::<T>(*c))).collect();
    for i in 0..out.len() {
        let mut acc = y[i];
        for (c, (_, k)) in coeffs.iter().zip(terms) {
            acc += *c * k[i];
        }
        out[i] = acc;
    }
}

impl<T: Real> Stepper<T> {
    pub fn new(method: Integrator<T>, len: usize) -> Self {
        let z = cre(T::zero());
        Self {
            method,
            k: std::array::from_fn(|_| vec![z; len]),
            tmp: vec![z; len],
            y_new: vec![z; len],
            h: None,
            fsal_valid: false,
            accepted: 0,
            rejected: 0,
        }
    }

    /// Marks the right-hand side as changed (e.g. a new control segment).
    pub fn reset_rhs(&mut self) {
        self.fsal_valid = false;
    }

    /// Advances `y` from `t0` to `t1` exactly.
    pub fn advance<F>(&mut self, rhs: &F, y: &mut [Cx<T>], t0: T, t1: T) -> Result<()>
    where
        F: Fn(&[Cx<T>], &mut [Cx<T>]),
    {
        if t1 <= t0 {
            return Ok(());
        }
        match self.method {
            Integrator::FixedRk4 { dt } => self.advance_rk4(rhs, y, t0, t1, dt),
            Integrator::AdaptiveRk45 { rtol, atol } => self.advance_dopri(rhs, y, t0, t1, rtol, atol),
        }
    }

    fn advance_rk4<F>(&mut self, rhs: &F, y: &mut [Cx<T>], t0: T, t1: T, dt: T) -> Result<()>
    where
        F: Fn(&[Cx<T>], &mut [Cx<T>]),
    {
        let span = t1 - t0;
        let n = (to_f64(span / dt) - 1e-9).ceil().max(1.0) as usize;
        let h = span / lit::<T>(n as f64);
        let half = lit::<T>(0.5);
        let sixth = h / lit::<T>(6.0);
        for _ in 0..n {
            let [k1, k2, k3, k4, ..] = &mut self.k;
            rhs(y, k1);
            combine(&mut self.tmp, y, h * half, &[(1.0, k1)]);
            rhs(&self.tmp, k2);
            combine(&mut self.tmp, y, h * half, &[(1.0, k2)]);
            rhs(&self.tmp, k3);
            combine(&mut self.tmp, y, h, &[(1.0, k3)]);
            rhs(&self.tmp, k4);
            let s = cre(sixth);
            let two = cre(lit::<T>(2.0));
            for i in 0..y.len() {
                y[i] += s * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
            }
            self.accepted += 1;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn advance_dopri<F>(
        &mut self,
        rhs: &F,
        y: &mut [Cx<T>],
        t0: T,
        t1: T,
        rtol: T,
        atol: T,
    ) -> Result<()>
    where
        F: Fn(&[Cx<T>], &mut [Cx<T>]),
    {
        let mut t = t0;
        if !self.fsal_valid {
            rhs(y, &mut self.k[0]);
            self.fsal_valid = true;
        }
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(y, rtol, atol, t1 - t0),
        };
        let h_floor = T::default_epsilon() * lit::<T>(16.0);

        while t < t1 {
            let remaining = t1 - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step < h_floor * (T::one() + t.abs()) {
                return Err(Error::StepUnderflow { t: to_f64(t), h: to_f64(step) });
            }

            let err = self.dopri_trial(rhs, y, step, rtol, atol);
            if err <= T::one() {
                t = if last { t1 } else { t + step };
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                self.accepted += 1;
                let factor = if err == T::zero() {
                    lit(5.0)
                } else {
                    (lit::<T>(0.9) * err.powf(lit(-0.2))).min(lit(5.0)).max(lit(0.2))
                };
                // A step truncated to land on t1 says little about the next one.
                if !last || step >= h {
                    h = step * factor;
                }
            } else {
                self.rejected += 1;
                h = step * (lit::<T>(0.9) * err.powf(lit(-0.2))).max(lit(0.1));
            }
        }
        self.h = Some(h);
        Ok(())
    }

    fn dopri_trial<F>(&mut self, rhs: &F, y: &[Cx<T>], h: T, rtol: T, atol: T) -> T
    where
        F: Fn(&[Cx<T>], &mut [Cx<T>]),
    {
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;
        combine(tmp, y, h, &[(A21, k1)]);
        rhs(tmp, k2);
        combine(tmp, y, h, &[(A31, k1), (A32, k2)]);
        rhs(tmp, k3);
        combine(tmp, y, h, &[(A41, k1), (A42, k2), (A43, k3)]);
        rhs(tmp, k4);
        combine(tmp, y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
        rhs(tmp, k5);
        combine(tmp, y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]);
        rhs(tmp, k6);
        combine(&mut self.y_new, y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
        rhs(&self.y_new, k7);

        let e = [E1, E3, E4, E5, E6, E7].map(|c| cre(h * lit::<T>(c)));
        let mut sum = T::zero();
        for i in 0..y.len() {
            let err = e[0] * k1[i] + e[1] * k3[i] + e[2] * k4[i] + e[3] * k5[i] + e[4] * k6[i] + e[5] * k7[i];
            let scale = atol + rtol * cabs(y[i]).max(cabs(self.y_new[i]));
            let r = cabs(err) / scale;
            sum += r * r;
        }
        (sum / lit::<T>(y.len().max(1) as f64)).sqrt()
    }

    fn initial_step(&self, y: &[Cx<T>], rtol: T, atol: T, span: T) -> T {
        // Hairer's heuristic: h ~ 0.01 * |y| / |f(y)|.
        let mut d0 = T::zero();
        let mut d1 = T::zero();
        for (yi, fi) in y.iter().zip(&self.k[0]) {
            let sc = atol + rtol * cabs(*yi);
            d0 += (cabs(*yi) / sc).powi(2);
            d1 += (cabs(*fi) / sc).powi(2);
        }
        let h = if d0 < lit(1e-10) || d1 < lit(1e-10) {
            lit(1e-6)
        } else {
            lit::<T>(0.01) * (d0 / d1).sqrt()
        };
        h.min(span)
    }
}
