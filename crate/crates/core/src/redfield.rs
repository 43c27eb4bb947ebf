//! Bloch–Redfield master equation without the secular approximation.
//!
//! With `S(ω) = Σ_{E_m−E_n=ω} |m⟩⟨m|S|n⟩⟨n|` (so `S(t) = Σ_ω S(ω) e^{iωt}` in
//! the interaction picture) and `Γ(ω) = ∫_0^∞ e^{iωτ} C(τ) dτ`:
//!
//! ```text
//! dρ/dt = −i[H_S, ρ] + Σ_{ω,ω'} Γ(−ω') (S(ω') ρ S(ω) − S(ω) S(ω') ρ) + h.c.
//! ```
//!
//! Rates follow the correlation-function normalisation of [`crate::bath`], so
//! `Re Γ(ω) = J(ω)(1 + n(ω))` and the HEOM and Redfield solvers describe the
//! same bath.

use serde::{Deserialize, Serialize};

use crate::bath::SpectralDensity;
use crate::error::{Error, Result};
use crate::heom::{validate_grid, CsrMatrix, SteadyState, SteadyStateOptions, SystemModel, Trajectory};
use crate::linalg::{eigh, trace_norm, zeros};
use crate::ode::{Integrator, Stepper};
use crate::scalar::{cre, cx, lit, to_f64, Cx, Op, Real};

/// Bohr frequencies closer than this are merged.
pub const FREQUENCY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct BohrDecomposition<T: Real> {
    pub frequencies: Vec<T>,
    /// `S(ω)` in the computational basis, aligned with `frequencies`.
    pub jump_ops: Vec<Op<T>>,
}

impl<T: Real> BohrDecomposition<T> {
    pub fn operator(&self, omega: T) -> Option<&Op<T>> {
        self.frequencies
            .iter()
            .position(|&w| (w - omega).abs() <= lit(FREQUENCY_TOL))
            .map(|i| &self.jump_ops[i])
    }
}

/// Splits the coupling operator into Bohr-frequency components of `h_base`.
pub fn bohr_decompose<T: Real>(model: &SystemModel<T>) -> Result<BohrDecomposition<T>> {
    if !model.is_time_independent() {
        return Err(Error::InvalidParameter(
            "Bloch-Redfield needs a time-independent Hamiltonian".into(),
        ));
    }
    let (energies, vecs) = eigh(&model.h_base);
    let s_eig = vecs.adjoint() * &model.coupling_op * &vecs;
    let d = model.dim;
    let tol = lit::<T>(FREQUENCY_TOL);

    let mut frequencies: Vec<T> = Vec::new();
    let mut blocks: Vec<Op<T>> = Vec::new();
    for m in 0..d {
        for n in 0..d {
            let w = energies[m] - energies[n];
            let slot = match frequencies.iter().position(|&f| (f - w).abs() <= tol) {
                Some(i) => i,
                None => {
                    frequencies.push(w);
                    blocks.push(zeros(d));
                    frequencies.len() - 1
                }
            };
            blocks[slot][(m, n)] += s_eig[(m, n)];
        }
    }
    let mut pairs: Vec<(T, Op<T>)> = frequencies
        .into_iter()
        .zip(blocks)
        .filter(|(_, b)| b.iter().any(|z| z.norm_sqr() > T::zero()))
        .map(|(w, b)| (w, &vecs * b * vecs.adjoint()))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let (frequencies, jump_ops) = pairs.into_iter().unzip();
    Ok(BohrDecomposition { frequencies, jump_ops })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RedfieldOptions {
    pub include_lamb_shift: bool,
    pub integrator: Integrator<f64>,
}

impl Default for RedfieldOptions {
    fn default() -> Self {
        Self {
            include_lamb_shift: false,
            integrator: Integrator::default(),
        }
    }
}

/// `J(ν)(1 + n(ν))` on the whole real line; `2λT/ω_c` at `ν = 0`.
fn emission_density(sd: &SpectralDensity<f64>, temperature: f64, nu: f64) -> f64 {
    let (l, wc) = (sd.lambda, sd.omega_c);
    let phi = if nu == 0.0 {
        temperature
    } else {
        -nu / (-nu / temperature).exp_m1()
    };
    2.0 * l * wc * phi / (nu * nu + wc * wc)
}

/// `(1/π) PV ∫ J(ν)(1+n(ν)) / (ω − ν) dν` over the real line.
fn lamb_shift_integral(sd: &SpectralDensity<f64>, temperature: f64, omega: f64) -> f64 {
    let f = |nu: f64| emission_density(sd, temperature, nu);
    // PV ∫ F(ν)/(ω−ν) dν = −∫_0^∞ [F(ω+u) − F(ω−u)] / u du
    let g = |u: f64| {
        if u == 0.0 {
            let h = 1e-6 * (1.0 + omega.abs());
            (f(omega + h) - f(omega - h)) / h
        } else {
            (f(omega + u) - f(omega - u)) / u
        }
    };
    let scale = sd.omega_c.max(temperature).max(omega.abs());
    let mut cuts = vec![0.0, sd.omega_c, omega.abs(), omega.abs() + sd.omega_c, 40.0 * scale];
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let target = 1e-12;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += quadrature::integrate(g, w[0], w[1], target).integral;
    }
    let last = *cuts.last().unwrap();
    // tail u = last + s/(1−s)
    let tail = |s: f64| {
        if s >= 1.0 {
            0.0
        } else {
            let u = last + s / (1.0 - s);
            g(u) / ((1.0 - s) * (1.0 - s))
        }
    };
    total += quadrature::integrate(tail, 0.0, 1.0, target).integral;
    -total / std::f64::consts::PI
}

/// `Γ(ω)`; the imaginary part is only evaluated when `include_lamb_shift`.
pub fn halffourier_rate<T: Real>(
    sd: &SpectralDensity<T>,
    temperature: T,
    omega: T,
    include_lamb_shift: bool,
) -> Result<Cx<T>> {
    if !(temperature > T::zero()) {
        return Err(Error::InvalidParameter(format!("temperature must be > 0, got {temperature}")));
    }
    let sd64 = SpectralDensity {
        lambda: to_f64(sd.lambda),
        omega_c: to_f64(sd.omega_c),
    };
    let (t, w) = (to_f64(temperature), to_f64(omega));
    if sd64.lambda == 0.0 {
        return Ok(cre(T::zero()));
    }
    let re = emission_density(&sd64, t, w);
    let im = if include_lamb_shift {
        lamb_shift_integral(&sd64, t, w)
    } else {
        0.0
    };
    Ok(cx(lit(re), lit(im)))
}

/// Rates at every Bohr frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct RedfieldRates<T: Real> {
    pub frequencies: Vec<T>,
    pub gamma: Vec<Cx<T>>,
    pub include_lamb_shift: bool,
}

impl<T: Real> RedfieldRates<T> {
    pub fn new(
        sd: &SpectralDensity<T>,
        temperature: T,
        frequencies: &[T],
        include_lamb_shift: bool,
    ) -> Result<Self> {
        let gamma = frequencies
            .iter()
            .map(|&w| halffourier_rate(sd, temperature, w, include_lamb_shift))
            .collect::<Result<_>>()?;
        Ok(Self {
            frequencies: frequencies.to_vec(),
            gamma,
            include_lamb_shift,
        })
    }
}

/// Column-major `vec(A X B)` superoperator.
fn sandwich<T: Real>(a: &Op<T>, b: &Op<T>) -> Op<T> {
    // vec(A X B) = (Bᵀ ⊗ A) vec(X)
    b.transpose().kronecker(a)
}

/// Dense Liouvillian acting on column-major vectorised states.
pub fn redfield_superoperator<T: Real>(
    model: &SystemModel<T>,
    sd: &SpectralDensity<T>,
    temperature: T,
    opts: &RedfieldOptions,
) -> Result<Op<T>> {
    let bohr = bohr_decompose(model)?;
    let d = model.dim;
    let id = Op::<T>::identity(d, d);
    let minus_i = cx(T::zero(), -T::one());
    let mut l = (sandwich(&model.h_base, &id) - sandwich(&id, &model.h_base)) * minus_i;

    // Γ(−ω') for each ω' in the decomposition.
    let neg: Vec<T> = bohr.frequencies.iter().map(|&w| -w).collect();
    let rates = RedfieldRates::new(sd, temperature, &neg, opts.include_lamb_shift)?;

    // Build D(ρ) = Σ Γ(−ω')(S(ω')ρS(ω) − S(ω)S(ω')ρ), then add its adjoint map.
    let mut dissipator = Op::<T>::zeros(d * d, d * d);
    for (sp, g) in bohr.jump_ops.iter().zip(&rates.gamma) {
        if g.norm_sqr() == T::zero() {
            continue;
        }
        for s in &bohr.jump_ops {
            dissipator += (sandwich(sp, s) - sandwich(&(s * sp), &id)) * *g;
        }
    }
    // h.c. of D(ρ): for Hermitian ρ, (D ρ)† = D̄ ρ with D̄ built from daggered factors.
    let mut adjoint_part = Op::<T>::zeros(d * d, d * d);
    for (sp, g) in bohr.jump_ops.iter().zip(&rates.gamma) {
        if g.norm_sqr() == T::zero() {
            continue;
        }
        for s in &bohr.jump_ops {
            let (spd, sd_) = (sp.adjoint(), s.adjoint());
            adjoint_part += (sandwich(&sd_, &spd) - sandwich(&id, &(spd * sd_))) * g.conj();
        }
    }
    l += dissipator + adjoint_part;
    Ok(l)
}

fn integrator_for<T: Real>(opts: &RedfieldOptions) -> Integrator<T> {
    match opts.integrator {
        Integrator::FixedRk4 { dt } => Integrator::FixedRk4 { dt: lit(dt) },
        Integrator::AdaptiveRk45 { rtol, atol } => Integrator::AdaptiveRk45 {
            rtol: lit(rtol),
            atol: lit(atol),
        },
    }
}

struct BrmeRun<T: Real> {
    generator: CsrMatrix<T>,
    stepper: Stepper<T>,
    y: Vec<Cx<T>>,
    time: T,
    dim: usize,
}

impl<T: Real> BrmeRun<T> {
    fn new(model: &SystemModel<T>, sd: &SpectralDensity<T>, temperature: T, opts: &RedfieldOptions) -> Result<Self> {
        let integrator = integrator_for::<T>(opts);
        integrator.validate()?;
        let l = redfield_superoperator(model, sd, temperature, opts)?;
        let generator = CsrMatrix::from_dense(&l);
        let y = model.initial_state.as_slice().to_vec();
        Ok(Self {
            stepper: Stepper::new(integrator, y.len()),
            generator,
            y,
            time: T::zero(),
            dim: model.dim,
        })
    }

    fn advance_to(&mut self, t: T) -> Result<()> {
        let g = &self.generator;
        let rhs = |x: &[Cx<T>], out: &mut [Cx<T>]| g.matvec(x, out);
        self.stepper.advance(&rhs, &mut self.y, self.time, t)?;
        self.time = self.time.max(t);
        Ok(())
    }

    fn state(&self) -> Op<T> {
        Op::from_column_slice(self.dim, self.dim, &self.y)
    }
}

pub fn brme_propagate<T: Real>(
    model: &SystemModel<T>,
    sd: &SpectralDensity<T>,
    temperature: T,
    opts: &RedfieldOptions,
    t_grid: &[T],
) -> Result<Trajectory<T>> {
    validate_grid(t_grid)?;
    let mut run = BrmeRun::new(model, sd, temperature, opts)?;
    let mut states = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        run.advance_to(t)?;
        states.push(run.state());
    }
    Ok(Trajectory {
        times: t_grid.to_vec(),
        states,
    })
}

/// Same residual criterion as the HEOM steady-state detector.
pub fn brme_steady_state<T: Real>(
    model: &SystemModel<T>,
    sd: &SpectralDensity<T>,
    temperature: T,
    opts: &RedfieldOptions,
    ss: &SteadyStateOptions<T>,
) -> Result<SteadyState<T>> {
    let mut run = BrmeRun::new(model, sd, temperature, opts)?;
    let mut prev = run.state();
    let mut residual = T::max_value().unwrap_or_else(T::one);
    while run.time < ss.t_max {
        let next = (run.time + ss.probe_window).min(ss.t_max);
        run.advance_to(next)?;
        let rho = run.state();
        residual = trace_norm(&(&rho - &prev));
        if residual < ss.tolerance {
            return Ok(SteadyState {
                rho,
                convergence_time: run.time,
                residual,
            });
        }
        prev = rho;
    }
    Err(Error::SteadyStateNotConverged {
        t_max: to_f64(ss.t_max),
        residual: to_f64(residual),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{matsubara_expansion, thermal_occupation};
    use crate::heom::{build_single_qubit, build_two_qubit};
    use crate::linalg::{gibbs_state, identity, max_abs, projector, sigma_x, sigma_z};
    use approx::assert_relative_eq;

    fn qubit() -> SystemModel<f64> {
        build_single_qubit(1.0, projector(&[cre(1.0), cre(1.0)])).unwrap()
    }

    #[test]
    fn qubit_decomposition() {
        let b = bohr_decompose(&qubit()).unwrap();
        assert_eq!(b.frequencies, vec![-1.0, 1.0]);
        let up = b.operator(1.0).unwrap();
        let want = Op::<f64>::from_row_slice(2, 2, &[cre(0.0), cre(1.0), cre(0.0), cre(0.0)]);
        assert!(max_abs(&(up - want)) < 1e-14);
        let sum = b.jump_ops.iter().fold(zeros::<f64>(2), |a, s| a + s);
        assert!(max_abs(&(sum - sigma_x::<f64>())) < 1e-12);
        assert!(max_abs(&(b.operator(-1.0).unwrap() - up.adjoint())) < 1e-12);
    }

    #[test]
    fn commuting_coupling_has_zero_frequency_only() {
        let m = SystemModel::new(sigma_z::<f64>() * cre(0.5), sigma_z(), identity(2) * cre(0.5), 1.0).unwrap();
        let b = bohr_decompose(&m).unwrap();
        assert_eq!(b.frequencies, vec![0.0]);
    }

    #[test]
    fn two_qubit_frequencies_match_eigen_differences() {
        let m = build_two_qubit(1.0, 0.2, identity::<f64>(4) * cre(0.25)).unwrap();
        let b = bohr_decompose(&m).unwrap();
        let (e, _) = eigh(&m.h_base);
        let s_sum = b.jump_ops.iter().fold(zeros::<f64>(4), |a, s| a + s);
        assert!(max_abs(&(s_sum - &m.coupling_op)) < 1e-12);
        for &w in &b.frequencies {
            let hit = (0..4).any(|i| (0..4).any(|j| (e[i] - e[j] - w).abs() < 1e-10));
            assert!(hit, "{w} is not an eigenvalue difference");
        }
        for (w, s) in b.frequencies.iter().zip(&b.jump_ops) {
            assert!(max_abs(&(b.operator(-*w).unwrap() - s.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn detailed_balance_and_zero_limit() {
        let sd = SpectralDensity::new(0.1, 0.1).unwrap();
        for w in [0.5, 1.0, 2.0] {
            let r = halffourier_rate(&sd, 0.2, w, false).unwrap().re / halffourier_rate(&sd, 0.2, -w, false).unwrap().re;
            assert_relative_eq!(r, (w / 0.2f64).exp(), max_relative = 1e-10);
        }
        assert_relative_eq!(halffourier_rate(&sd, 0.2, 0.0, false).unwrap().re, 0.4, max_relative = 1e-14);
        let g = halffourier_rate(&sd, 0.2, 1.0, false).unwrap().re;
        assert_relative_eq!(g, sd.eval(1.0) * (1.0 + thermal_occupation(1.0, 0.2).unwrap()), max_relative = 1e-14);
        let free = SpectralDensity::new(0.0, 0.1).unwrap();
        assert_eq!(halffourier_rate(&free, 0.2, 1.0, true).unwrap(), cre(0.0));
    }

    #[test]
    fn lamb_shift_matches_matsubara_route() {
        // Γ(ω) is also the half-Fourier transform of the exponential expansion.
        let sd = SpectralDensity::new(0.05, 0.5).unwrap();
        let exp = matsubara_expansion(&sd, 0.2, 4000).unwrap();
        for w in [-1.0, -0.3, 0.0, 0.4, 1.0, 2.5] {
            let quad: Cx<f64> = halffourier_rate(&sd, 0.2, w, true).unwrap();
            let series = exp.half_fourier(w);
            assert!((quad.im - series.im).abs() < 1e-7, "w={w}: {} vs {}", quad.im, series.im);
            assert!((quad.re - series.re).abs() < 1e-6, "w={w}: {} vs {}", quad.re, series.re);
        }
    }

    #[test]
    fn free_evolution_without_coupling() {
        let sd = SpectralDensity::new(0.0, 0.1).unwrap();
        let m = qubit();
        let traj = brme_propagate(&m, &sd, 0.2, &RedfieldOptions::default(), &[0.0, std::f64::consts::PI]).unwrap();
        let sx = (traj.states[1].clone() * sigma_x::<f64>()).trace().re;
        assert!((sx + 1.0).abs() < 1e-8);
    }

    #[test]
    fn steady_state_is_gibbs() {
        let sd = SpectralDensity::new(0.01, 0.5).unwrap();
        let ss = brme_steady_state(&qubit(), &sd, 0.2, &RedfieldOptions::default(), &SteadyStateOptions::default()).unwrap();
        let g = gibbs_state(&(sigma_z::<f64>() * cre(0.5)), 0.2);
        assert!(trace_norm(&(ss.rho - g)) < 1e-6);
    }
}
