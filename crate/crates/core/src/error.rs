use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator is not Hermitian: {0}")]
    NotHermitian(String),

    #[error(
        "degenerate Matsubara pole: 2*pi*{k}*T equals the cutoff {omega_c}; perturb T or change the number of Matsubara terms"
    )]
    DegeneratePole { k: usize, omega_c: f64 },

    #[error("hierarchy with {count} auxiliary operators exceeds the cap of {cap}")]
    HierarchyTooLarge { count: usize, cap: usize },

    #[error("step size underflow at t = {t} (h = {h}); the truncation is probably too shallow for this coupling")]
    StepUnderflow { t: f64, h: f64 },

    #[error("steady state not reached by t = {t_max} (last residual {residual:e})")]
    SteadyStateNotConverged { t_max: f64, residual: f64 },

    #[error("singular purity: radial temperature derivative on the Bloch sphere surface (|s| = {norm}, s.ds = {radial:e})")]
    SingularPurity { norm: f64, radial: f64 },

    #[error("time {t} outside the control window [0, {t_max}]")]
    OutsideWindow { t: f64, t_max: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("checkpoint configuration does not match the supplied run")]
    ResumeMismatch,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
