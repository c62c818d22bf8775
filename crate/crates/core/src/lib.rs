//! Pseudospectral toolkit for the final-state problem of the 1D cubic
//! Schrödinger equation `i u_t + ½ u_xx = λ|u|²u`.
//!
//! Fourier convention: `f̂(ξ) = ∫ e^{-ixξ} f(x) dx`, free flow
//! `Û(t) f̂ = e^{-itξ²/2} f̂`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolve;
pub mod fit;
pub mod fixedpoint;
pub mod oracle;
pub mod profile;
pub mod spectral;
pub mod trilinear;

pub use error::{ModwaveError, Result};
pub use fit::{fit_decay, DecayFit};
pub use profile::{FinalData, Sign, SolverParams};
pub use spectral::{FrequencyField, NormBundle, PhysicalField, SpectralGrid};
