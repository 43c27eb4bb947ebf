//! Scalar abstraction shared by every numerical module.
//!
//! All physics is written against [`Real`], which is satisfied by `f32` and
//! `f64`. Complex amplitudes are `num_complex::Complex<T>`.

use std::fmt::{Debug, Display};

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::ToPrimitive;

/// Real floating-point scalar usable throughout the crate.
pub trait Real:
    RealField + Copy + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: RealField + Copy + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

/// Complex scalar over `T`.
pub type Cx<T> = Complex<T>;

/// Dense operator (density matrix, Hamiltonian, ...) over `T`.
pub type Op<T> = DMatrix<Complex<T>>;

/// Dense complex vector over `T`.
pub type CVec<T> = DVector<Complex<T>>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts `T` back into `f64` (lossless for `f32`/`f64`).
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub fn cre<T: Real>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn cabs<T: Real>(z: Cx<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

/// `e^{i phase}`.
#[inline]
pub fn cis<T: Real>(phase: T) -> Cx<T> {
    Complex::new(phase.cos(), phase.sin())
}
