//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A series evaluation hit the hard term cap before meeting its tail
    /// criterion. Carries the cap that was exhausted.
    #[error("series did not converge within {cap} terms ({context})")]
    NonConvergent { cap: usize, context: String },

    /// A grid argument was too small or spanned too little range.
    #[error("grid too small: {0}")]
    GridTooSmall(String),

    /// |J(z,w)|^2 exceeded 1 beyond the clamp tolerance; this signals an
    /// evaluation bug rather than a property of the kernel.
    #[error("normalized kernel bound violated: |J|^2 = {value}")]
    KernelBoundViolated { value: f64 },

    /// Simultaneous root iteration failed to converge for a root whose
    /// modulus could lie inside the requested disk.
    #[error("root finding stalled: {0}")]
    RootFindingStalled(String),

    /// Argument-principle contour could not be moved off a zero after the
    /// retry budget.
    #[error("contour passes through a zero after {retries} perturbation retries")]
    ContourThroughZero { retries: u32 },

    /// A linear statistic was requested on a zero set whose validity disk
    /// does not cover the test-function support.
    #[error("test function support (radius {support}) exceeds zero-set validity radius {validity}")]
    SupportExceedsValidity { support: f64, validity: f64 },

    /// Quadrature refinement stalled before reaching the target accuracy.
    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),

    /// Invalid argument to a public operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Configuration error (unknown key, malformed value, missing file).
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
