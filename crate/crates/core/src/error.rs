use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("ensemble has no members")]
    EmptyEnsemble,

    #[error("jump points not strictly increasing at index {index}")]
    NotSorted { index: usize },

    #[error("cumulative probabilities decrease or leave [0, 1] at index {index}")]
    NotMonotoneCdf { index: usize },

    #[error("final cumulative probability is {value}, expected 1")]
    LastNotOne { value: f64 },

    #[error("weight at index {index} is not positive")]
    NonPositiveWeight { index: usize },

    #[error("probability level {0} outside (0, 1)")]
    AlphaOutOfRange(f64),

    #[error("covariate value at index {index} has no group in the fit")]
    SampleMismatch { index: usize },

    #[error("coordinate mismatch: {0}")]
    CoordinateMismatch(String),

    #[error("latitude {0} outside [-90, 90]")]
    LatitudeOutOfRange(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("no cell has enough complete pairs")]
    InsufficientData,

    #[error("score series is empty")]
    EmptySeries,

    #[error("all outcomes are equal")]
    AllOutcomesEqual,

    #[error("anomalies have zero variance")]
    DegenerateVariance,

    #[error("root finding did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
