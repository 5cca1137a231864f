use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("numerical failure (seed {seed}, z = {z}): {detail}")]
    Numerical { seed: u64, z: Complex64, detail: String },

    #[error("Dyson equation solver failed at z = {z}, w = {w}: {detail}")]
    SolverFailure { z: Complex64, w: Complex64, detail: String },

    #[error("near-singular Im M (Im m = {im_m:e}) at w = {w}")]
    NearSingular { w: Complex64, im_m: f64 },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("particle collision not resolved after {retries} step halvings at t = {t} (min spacing {min_spacing:e})")]
    Collision { t: f64, retries: u32, min_spacing: f64 },

    #[error("rare-event budget too small: expected {expected:.2} hits < 25; try at least {suggested_trials} trials")]
    RareEventBudget { expected: f64, suggested_trials: usize },
}
