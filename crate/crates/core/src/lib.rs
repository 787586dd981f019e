//! Angle-free quantum signal processing, simulated with dense matrices.
//!
//! Given a unitary `U` and a diagonal unitary encoding the samples of a
//! function `f` at the `4d`-th roots of unity, the circuit assembled in
//! [`qsp`] block-encodes `f_d(U)` with scale factor `√2`, where `f_d` is the
//! averaged Laurent interpolant of [`interpolation`]. No rotation angles are
//! computed anywhere. [`transforms`] applies the construction to functions
//! of block-encoded Hermitian matrices and to singular value
//! transformation; [`analysis`] provides computable error bounds.

pub mod analysis;
pub mod encoding;
pub mod error;
pub mod functions;
pub mod interpolation;
pub mod numerics;
pub mod qsp;
pub mod transforms;

pub use error::{Error, Result};
