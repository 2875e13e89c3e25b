//! Eigenspectrum and eigenstates of the quantum Rabi model
//! `H = a†a + Δσz + gσx(a† + a)` built from confluent Heun function
//! solutions, with an independent truncated Fock-space diagonalization used
//! as ground truth.
//!
//! Module map:
//!
//! * [`heun`]: the confluent Heun series, its three-term recurrence and
//!   polynomial truncation.
//! * [`rabi`]: model parameters, the Type-I/II solution branches, the
//!   condition functions `F`, `G±`, `K±`, the Wronskians and Fock-state
//!   assembly.
//! * [`spectrum`]: root scanning, refinement, cross-validation over `z` and
//!   the assembled spectrum.
//! * [`judd`]: the exceptional (Judd) part of the spectrum.
//! * [`oracle`]: dense diagonalization in the truncated photon-number basis.

pub mod error;
pub mod heun;
pub mod judd;
pub mod oracle;
pub mod rabi;
pub mod spectrum;

pub use error::{Error, Result};
pub use heun::{hc_coefficients, hc_eval, hc_truncation_residual, HeunEval, HeunParams};
pub use rabi::{BranchId, FockState, HeunSet, ModelParams, SolutionKind};
pub use spectrum::{compute_spectrum, SpectrumOptions, SpectrumResult};
