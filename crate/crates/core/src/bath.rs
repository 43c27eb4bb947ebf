//! Drude–Lorentz bath: spectral density and its finite-temperature
//! exponential (Matsubara) decomposition.
//!
//! Correlation-function convention:
//! `C(t) = (1/pi) ∫_0^∞ dω J(ω) [coth(ω/2T) cos ωt − i sin ωt]`,
//! so that `∫_0^∞ Re C(t) dt = 2λT/ω_c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cx, lit, Cx, Real};

/// `J(ω) = 2 λ ω_c ω / (ω² + ω_c²)`, extended as an odd function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity<T> {
    pub lambda: T,
    pub omega_c: T,
}

impl<T: Real> SpectralDensity<T> {
    pub fn new(lambda: T, omega_c: T) -> Result<Self> {
        if !(lambda >= T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "bath.lambda must be >= 0, got {lambda}"
            )));
        }
        if !(omega_c > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "bath.omega_c must be > 0, got {omega_c}"
            )));
        }
        Ok(Self { lambda, omega_c })
    }

    pub fn eval(&self, omega: T) -> T {
        spectral_density(self, omega)
    }

    /// `lim_{ω→0} J(ω) coth(ω/2T) = 2λT/ω_c`, the zero-frequency noise level.
    pub fn zero_frequency_noise(&self, temperature: T) -> T {
        lit::<T>(2.0) * self.lambda * temperature / self.omega_c
    }
}

pub fn spectral_density<T: Real>(sd: &SpectralDensity<T>, omega: T) -> T {
    lit::<T>(2.0) * sd.lambda * sd.omega_c * omega / (omega * omega + sd.omega_c * sd.omega_c)
}

/// One exponential `c e^{-ν t}` of the correlation function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm<T> {
    pub amplitude: Cx<T>,
    pub rate: T,
}

/// Exponential decomposition `C(t) ≈ Σ_k c_k e^{-ν_k t} + Δ δ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BathExpansion<T> {
    pub spectral: SpectralDensity<T>,
    /// Term 0 is the Drude pole (`ν_0 = ω_c`), terms `1..=N_k` the Matsubara poles.
    pub terms: Vec<ExpTerm<T>>,
    /// `Δ = Σ_{k>N_k} Re(c_k)/ν_k`, the weight of the Markovian remainder.
    pub terminator_strength: T,
    pub temperature: T,
    pub n_matsubara: usize,
}

pub fn matsubara_expansion<T: Real>(
    sd: &SpectralDensity<T>,
    temperature: T,
    n_matsubara: usize,
) -> Result<BathExpansion<T>> {
    if !(temperature > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be > 0, got {temperature}"
        )));
    }
    let (lambda, wc) = (sd.lambda, sd.omega_c);
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);

    let cot = T::one() / (wc / (two * temperature)).tan();
    let c0 = cx(lambda * wc * cot, -lambda * wc);
    let mut terms = Vec::with_capacity(n_matsubara + 1);
    terms.push(ExpTerm { amplitude: c0, rate: wc });

    let mut markov_weight = c0.re / wc;
    for k in 1..=n_matsubara {
        let nu = T::two_pi() * lit::<T>(k as f64) * temperature;
        let gap = nu * nu - wc * wc;
        if gap.abs() <= T::default_epsilon() * lit::<T>(64.0) * nu * nu {
            return Err(Error::DegeneratePole {
                k,
                omega_c: crate::scalar::to_f64(wc),
            });
        }
        let ck = four * lambda * wc * nu * temperature / gap;
        markov_weight += ck / nu;
        terms.push(ExpTerm { amplitude: cx(ck, T::zero()), rate: nu });
    }

    let total = sd.zero_frequency_noise(temperature);
    let terminator_strength = (total - markov_weight).max(T::zero());
    Ok(BathExpansion {
        spectral: *sd,
        terms,
        terminator_strength,
        temperature,
        n_matsubara,
    })
}

/// Smallest `N_k` whose terminator carries less than 1% of the total
/// Markovian weight `2λT/ω_c`, capped at 10.
pub fn default_n_matsubara<T: Real>(sd: &SpectralDensity<T>, temperature: T) -> Result<usize> {
    const CAP: usize = 10;
    let total = sd.zero_frequency_noise(temperature);
    for n in 0..=CAP {
        let exp = matsubara_expansion(sd, temperature, n)?;
        if exp.terminator_strength <= lit::<T>(0.01) * total {
            return Ok(n);
        }
    }
    Ok(CAP)
}

impl<T: Real> BathExpansion<T> {
    pub fn correlation(&self, t: T) -> Cx<T> {
        correlation_function(self, t)
    }

    pub fn n_exponentials(&self) -> usize {
        self.terms.len()
    }

    /// `∫_0^∞ e^{iωτ} C(τ) dτ` of the retained exponentials plus the
    /// terminator (which contributes `Δ` to the real part).
    pub fn half_fourier(&self, omega: T) -> Cx<T> {
        let mut acc = cx(self.terminator_strength, T::zero());
        for term in &self.terms {
            acc += term.amplitude / cx(term.rate, -omega);
        }
        acc
    }
}

pub fn correlation_function<T: Real>(exp: &BathExpansion<T>, t: T) -> Cx<T> {
    exp.terms
        .iter()
        .fold(cx(T::zero(), T::zero()), |acc, term| {
            acc + term.amplitude * (-term.rate * t).exp()
        })
}

/// Bose–Einstein occupation `1 / (e^{ω/T} − 1)`.
pub fn thermal_occupation<T: Real>(omega: T, temperature: T) -> Result<T> {
    if !(omega > T::zero()) || !(temperature > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "thermal occupation needs ω > 0 and T > 0, got ω = {omega}, T = {temperature}"
        )));
    }
    Ok(T::one() / (omega / temperature).exp_m1())
}
