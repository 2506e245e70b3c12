//! Numerical toolkit for null controllability of a structurally damped wave
//! equation on `(0, π)`.
//!
//! The crate builds biorthogonal families to the complex exponentials
//! `e^{λ̄_n t}`, solves the associated moment problems, and propagates the
//! modal ODEs exactly so that controls can be checked against the dynamics.
//!
//! Everything here is `no_std` with `alloc`; file formats and the command
//! line live in the `nullwave` companion crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod biorth;
pub mod config;
pub mod error;
pub mod fft;
pub mod linalg;
pub mod modal;
pub mod moment;
pub mod multiplier;
pub mod pde;
pub mod quad;
pub mod spectrum;
pub mod weierstrass;

pub use error::{Error, Result};

/// Complex double used throughout.
pub type C64 = num_complex::Complex<f64>;

pub(crate) use num_traits::Float;
