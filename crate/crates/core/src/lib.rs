//! Fluid-antenna hybrid multiport (FAHM) receivers for slow fluid antenna
//! multiple access.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: Hermitian kernels (Cholesky inverse, Schur-complement
//!   downdate, PSD square roots) and the Bessel `J0` correlation kernel.
//! - [`channel`]: port grids, steering vectors, correlated Rayleigh and
//!   finite-scatterer geometric channels, receive coupling.
//! - [`receiver`]: slow-FAMA, digital combining, CUMA and the GEPort-based
//!   hybrid receiver with effective-port stopping.
//! - [`metrics`]: SINR of a hybrid combiner, spectral efficiency, outage.
//! - [`sim`]: scenario configuration, deterministic Monte Carlo runs, sweeps,
//!   elbow diagnostics and timing benchmarks.

pub mod channel;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod receiver;
pub mod sim;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, HermitianInverseState};

pub use num_complex::Complex64;
