//! Complex index of refraction of dilute gases for atomic matter waves.
//!
//! The crate goes from an interatomic potential to partial-wave phase
//! shifts, thermally averaged forward amplitudes and the index (n−1)/n_gas,
//! then simulates the three-sweep interferometer measurement of that index
//! and inverts fringe data back into Re(n−1)/n_gas, Im(n−1)/n_gas and ρ.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cell;
pub mod config;
pub mod constants;
pub mod error;
pub mod fringes;
pub mod potentials;
pub mod quadrature;
pub mod refraction;
pub mod scattering;
pub mod thermal;

pub use error::{Error, Result};
