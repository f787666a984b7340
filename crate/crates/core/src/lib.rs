//! Simulation of entanglement production in two coupled quantum kicked tops.
//!
//! The crate is organised bottom-up:
//!
//! * [`numkernel`]: dense complex linear algebra and the special functions the
//!   analytical estimates need.
//! * [`spin`]: angular-momentum matrices, the quarter-turn rotation and SU(2)
//!   coherent states.
//! * [`qdynamics`]: the coupled Floquet step on pure states and density operators.
//! * [`cdynamics`]: the classical limit maps and phase-space sections.
//! * [`entanglement`]: Schmidt spectra, entropies, partial transpose and log-negativity.
//! * [`rmt`]: random-matrix predictions and the statistics used to test them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cdynamics;
pub mod entanglement;
mod error;
pub mod numkernel;
pub mod qdynamics;
pub mod rmt;
pub mod spin;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
