//! Numerical core for boundary-modulus experiments on the unit circle and
//! the unit sphere of C^n.
//!
//! Everything here is deterministic given a [`sampler::Sampler`]: the same
//! seed and stream id reproduce every sample sequence bit for bit, which the
//! companion crate relies on for byte-identical reports.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod function;
pub mod kernels;
pub mod modulus;
pub mod oscillation;
pub mod outer;
pub mod quad;
pub mod sampler;
pub mod sphere;

pub use error::{CoreError, CoreResult};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
