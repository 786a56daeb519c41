//! Indefinite-weight eigenproblems `-Δu = Λ Q_Ω u` and semilinear ground
//! states `-Δu = Q_Ω |u|^{p-2} u` on truncated domains of `R^N`.
//!
//! The weight `Q_Ω` is `+1` on a bounded open set `Ω` and `-1` outside it.

pub mod cli_io;
pub mod discretize;
pub mod eigensolve;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod linearized;
pub mod semilinear;
pub mod verify;

pub use error::{Error, Result};
