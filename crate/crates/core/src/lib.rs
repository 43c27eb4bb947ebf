//! Quantum thermometry with qubit probes in Drude–Lorentz baths.
//!
//! The numerical core is generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases below fix `f64`, which is what the command-line front end
//! uses.

pub mod bath;
pub mod control;
pub mod error;
pub mod heom;
pub mod linalg;
pub mod metrology;
pub mod nonmarkov;
pub mod ode;
pub mod redfield;
pub mod scalar;
pub mod scenario;

pub use error::{Error, Result};

pub type SpectralDensity = bath::SpectralDensity<f64>;
pub type BathExpansion = bath::BathExpansion<f64>;
pub type SystemModel = heom::SystemModel<f64>;
pub type HeomParams = heom::HeomParams<f64>;
pub type Trajectory = heom::Trajectory<f64>;
pub type ControlSequence = control::ControlSequence<f64>;
pub type Scenario = scenario::Scenario<f64>;
pub type Solver = scenario::Solver<f64>;
pub type Op = scalar::Op<f64>;
pub type BlochVector = metrology::BlochVector<f64>;
pub type MetrologyPoint = metrology::MetrologyPoint<f64>;

pub type SpectralDensityF32 = bath::SpectralDensity<f32>;
pub type SystemModelF32 = heom::SystemModel<f32>;
pub type ScenarioF32 = scenario::Scenario<f32>;
