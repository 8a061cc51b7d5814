//! Forward noise models and layout reconstruction for multi-spatial-mode
//! twin-beam squeezed light.
//!
//! A twin beam produced by seeded four-wave mixing carries one two-mode
//! squeezed state per coherence-area pair. Splitting those areas across
//! detector regions (knife edges, split photodiodes) adds partition noise
//! and destroys part of the probe/conjugate correlation. This crate models
//! that measurement chain three ways:
//!
//! * [`noise`] — the published algebraic models (intensity-difference
//!   noise for a single pair and its multimode generalization) plus a
//!   linearized covariance engine for arbitrary signed region assignments;
//! * [`mc`] — a Gaussian-linearized Monte-Carlo sampler used as an
//!   independent oracle for the covariance engine;
//! * [`geometry`] — Gaussian footprints, knife-edge transmissions,
//!   probe/conjugate inversion symmetry and defocus broadening;
//! * [`scan`] — D-mirror raster scans, 1D sweeps and axial image-plane
//!   searches producing noise maps;
//! * [`fit`] — the inverse problem: multistart simplex fits recovering a
//!   coherence-area layout from a noise map, model selection over the
//!   number of pairs, and an angular-bandwidth mode-count estimator.
//!
//! All values are immutable after construction and every operation is a
//! pure function of its inputs; with a fixed seed (and, for Monte Carlo,
//! a fixed batch layout) results are bit-for-bit reproducible regardless
//! of how many worker threads are used.

pub mod fit;
pub mod fixtures;
pub mod geometry;
pub mod mc;
pub mod noise;
pub mod scan;

mod exec;
mod util;

pub use exec::Execution;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An input fell outside the physical domain of a model.
    #[error("domain error: {0}")]
    Domain(String),
    /// Every detected region has zero signed flux; the noise-reduction
    /// factor is undefined.
    #[error("no detected power: shot-noise level is zero")]
    ZeroShotNoise,
    /// A transmission vector was negative or summed above one.
    #[error("invalid partition: {0}")]
    Partition(String),
    /// A scan plan or map was structurally invalid.
    #[error("invalid scan: {0}")]
    Scan(String),
    /// A fit input was structurally invalid.
    #[error("invalid fit input: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
