//! A numerical laboratory for Gaussian entire functions.
//!
//! The crate samples random Taylor series f(z) = sum xi_n a_n z^n with
//! independent standard complex Gaussian coefficients, finds their zeros in
//! disks with certified counts, measures linear statistics of the zero set
//! two independent ways (Monte Carlo and covariance-kernel quadrature), runs
//! Hayman-admissibility diagnostics on the covariance kernels, and performs
//! the headline experiment: reconstructing the zeros inside a disk from the
//! zeros outside it via recovered power sums and Newton's identities.

// Negated float comparisons are the NaN-rejecting idiom used throughout the
// argument validation here.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissibility;
pub mod dilog;
pub mod error;
pub mod kernel;
pub mod linstat;
pub mod logdomain;
pub mod poly;
pub mod quadrature;
pub mod report;
pub mod rigidity;
pub mod rng;
pub mod sampler;
pub mod zerofinder;

pub use error::{Error, Result};
pub use kernel::{KernelFamily, KernelSpec};
pub use linstat::{TestFunction, VarianceReport};
pub use rigidity::RecoveryReport;
pub use sampler::SampledFunction;
pub use zerofinder::ZeroSet;

/// Version string embedded in every report artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
