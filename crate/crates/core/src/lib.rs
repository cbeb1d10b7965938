//! Tomography-to-geometry-to-optimization pipeline for noisy qubits.
//!
//! * [`quantum`]: density-matrix simulator, noise channels, Pauli sampling.
//! * [`tomography`]: four-probe Bloch-map reconstruction and bootstrap.
//! * [`geometry`]: SVD regularization, principal contractions, WPL
//!   parameters and the metric/curvature/area formulas.
//! * [`fisher`]: block-diagonal WPL Fisher matrices, thresholded
//!   pseudoinverses and Woodbury corrections.
//! * [`vqe`]: the two-qubit VQE instance, optimizers, drift and ablations.

pub mod error;
pub mod fisher;
pub mod geometry;
pub mod linalg;
pub mod quantum;
pub mod rng;
pub mod stats;
pub mod tomography;
pub mod vqe;

pub use error::{Error, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
