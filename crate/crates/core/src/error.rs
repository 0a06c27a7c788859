use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("eigenvalue parameter b{index} is zero")]
    ZeroEigenvalue { index: usize },

    #[error("kappa constraint 2k0 + k1 + k2 + k3 + k4 = 1 violated (residual {residual:e})")]
    KappaConstraint { residual: f64 },

    #[error("exact mode requires rational κ")]
    InexactKappa,

    #[error("orbit escaped radius {radius:e} after {steps} steps")]
    Escaped { radius: f64, steps: usize },

    #[error("lattice consistency failure in {what}: entry ({row}, {col}) is {built}, expected {printed}")]
    LatticeMismatch {
        what: String,
        row: usize,
        col: usize,
        built: String,
        printed: String,
    },

    #[error("lattice identity failed: {0}")]
    LatticeIdentity(String),

    #[error("degenerate line: linear forms are not independent")]
    DegenerateLine,

    #[error("lines not in general position")]
    NotGeneralPosition,

    #[error("line action check failed: {0}")]
    LineAction(String),

    #[error("nongeneric parameters (surface is singular; walls are out of scope)")]
    NonGeneric,

    #[error("count identity '{identity}' failed at N = {n}")]
    CountMismatch { identity: String, n: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}
