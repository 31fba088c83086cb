//! Purification of a subsystem by repeated projective measurements on its
//! partner, when the projected evolution operator has a continuous spectrum.
//!
//! * [`quadrature`]: adaptive Gauss–Kronrod integration and finite-difference
//!   curvature.
//! * [`spectral`]: survival probability `P(N)` and purity `Π(N)` for any
//!   diagonal kernel `λ_E`, exactly (quadrature) and asymptotically (Laplace
//!   expansion around the peak of `|λ_E|`).
//! * [`cavity`]: a free particle coupled through its momentum to a cavity
//!   mode that is repeatedly projected onto a coherent state or onto `|1⟩`.

// Quadrature nodes are quoted to full published precision; `!(x > 0.0)`
// comparisons are meant to reject NaN as well.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod error;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
