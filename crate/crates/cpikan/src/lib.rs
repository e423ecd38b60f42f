//! Chebyshev-polynomial Kolmogorov-Arnold networks and MLPs trained with
//! physics-informed losses on spatially rescaled PDE benchmarks.
//!
//! The library provides:
//! - Chebyshev basis evaluation with exact derivatives ([`cheb`]);
//! - cKAN and MLP forward passes generic over a scalar type ([`network`],
//!   [`scalar`]);
//! - a second-order forward-mode jet type for input derivatives ([`jet`]) and
//!   a batched reverse-mode tape for parameter gradients ([`tape`]);
//! - affine domain rescaling with chain-rule operator factors ([`scaling`]);
//! - four PDE benchmarks with residual operators, data sampling, and noise
//!   injection ([`problems`]), plus a finite-difference reference solver
//!   ([`reference`]);
//! - weighted physics-informed loss assembly ([`loss`]), full-batch Adam
//!   training and evaluation ([`train`]), and a config-driven experiment
//!   runner ([`experiment`]).

pub mod cheb;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod jet;
pub mod loss;
pub mod network;
pub mod problems;
pub mod reference;
pub mod scalar;
pub mod scaling;
pub mod tape;
pub mod train;

pub use error::{Error, Result};
