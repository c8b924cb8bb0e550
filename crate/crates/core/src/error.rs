//! Error types shared across the solver modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile must be strictly positive, got inf g = {inf_g}")]
    NonPositive { inf_g: f64 },
    #[error("piecewise profile needs values.len() == breaks.len() + 1, got {breaks} breaks and {values} values")]
    LengthMismatch { breaks: usize, values: usize },
    #[error("breakpoints must be strictly ascending")]
    NonAscendingBreaks,
    #[error("sampled profile table is empty")]
    EmptyTable,
    #[error("length scale must be positive, got {length}")]
    NonPositiveLength { length: f64 },
}

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("eigenvalue problem requires a strictly positive profile (inf g = {inf_g})")]
    NonPositiveProfile { inf_g: f64 },
    #[error("eigensolver options invalid: {0}")]
    InvalidOptions(String),
}

#[derive(Debug, Error)]
pub enum SpeedError {
    #[error("invalid speed inputs: {0}")]
    InvalidInputs(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("junction solver did not converge after {sweeps} sweeps (last update {residual:.3e})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("junction at s = {junction} does not lie on the grid with step h = {h}")]
    GridMisaligned { junction: f64, h: f64 },
    #[error("invalid junction problem: {0}")]
    InvalidProblem(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("solution blew up at t = {t} (max u = {max_u:.3e}); time step too large")]
    UnstableBlowup { t: f64, max_u: f64 },
    #[error("front reached the right boundary at t = {t}; enlarge the domain")]
    DomainExhausted { t: f64 },
    #[error("level {level} was never attained by the solution")]
    LevelNotReached { level: f64 },
    #[error("no snapshot stored at t = {t}")]
    SnapshotMissing { t: f64 },
}
