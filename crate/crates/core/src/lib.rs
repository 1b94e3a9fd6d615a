//! Fractional Brownian fields indexed by time and Hurst index.
//!
//! Closed-form covariances, frequency-integral and Monte Carlo oracles,
//! exact Gaussian sampling, fundamental martingales of dual pairs and
//! multifractional Brownian motion.

pub mod cli;
pub mod error;
pub mod gaussfield;
pub mod kernels;
pub mod martingales;
pub mod mbm;
pub mod mcoracle;
pub mod quad;
pub mod rng;
pub mod specfun;

pub use error::{Error, Result};
pub use gaussfield::{CovMatrix, FieldPoint, PathEnsemble, SampleMethod};
pub use kernels::{KernelId, MaKind, Parity, QuadSpec};
pub use specfun::{DualPair, Hurst};
