//! Finite-type minimal annuli in S²×ℝ.
//!
//! This crate implements the algebra and numerics behind finite-type minimal
//! annuli: matrix Laurent potentials and polynomial Killing fields, the
//! Pinkall–Sterling hierarchy as an exact symbolic engine, Lax-flow frame
//! integration, the commuting isospectral action, hyperelliptic spectral
//! curves with period-closing conditions, simple-factor (bubbleton) dressing,
//! and Sym–Bobenko surface assembly.
//!
//! The crate is `no_std`-compatible (with `alloc`); all IO, file formats and
//! the command line live in the companion `annuli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod curve;
pub mod dressing;
pub mod family;
pub mod flow;
pub mod hierarchy;
pub mod isospectral;
pub mod loop_algebra;
pub mod mat2;
pub mod poly;
pub mod rng;
pub mod surface;

pub use mat2::Mat2;
pub use num_complex::Complex64 as C64;

/// Default tolerance for algebraic identities (exact up to rounding).
pub const TOL_ALG: f64 = 1e-8;
/// Default tolerance for PDE / quadrature based quantities.
pub const TOL_PDE: f64 = 1e-6;
