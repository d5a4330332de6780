use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("Newton iteration did not converge for {label} at ramp step {step}")]
    ConvergenceFailure { label: &'static str, step: usize },

    #[error("critical point topology changed: {0}")]
    TopologyChange(String),

    #[error("degenerate Hessian at {label}: |det| = {det:e}")]
    DegenerateHessian { label: &'static str, det: f64 },

    #[error("numerical overflow: {0}")]
    NumericalOverflow(String),

    #[error("trajectory blew up in realization {realization} at t = {t} (|x| = {norm:e})")]
    NumericalBlowup { realization: u64, t: f64, norm: f64 },

    #[error("capture balls overlap at phase {phase}: separation {separation} <= 2R = {two_r}")]
    BallOverlap { phase: f64, separation: f64, two_r: f64 },

    #[error("path never entered either capture ball")]
    NoTransitions,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("conditional CDF value {value} outside [0, 1] for record {index}")]
    InvalidCdfValue { index: usize, value: f64 },

    #[error("invariant measure has no positive values for the {0} state")]
    DegenerateInvariantMeasure(&'static str),

    #[error("manifest references missing artifact {0}")]
    MissingArtifact(PathBuf),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
