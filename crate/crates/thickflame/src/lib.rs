//! Thick-flame model with two free interfaces in a strip.
//!
//! The crate evaluates the planar traveling wave and its dispersion relation,
//! and evolves the linearized and fully nonlinear perturbation problems with a
//! three-subdomain Chebyshev collocation in the normal direction and a Fourier
//! expansion along the strip.
//!
//! The analytic layers ([`params`], [`wave`], [`dispersion`], [`spectral`]) are
//! generic over the floating point type; the simulation layers ([`linear`],
//! [`nonlinear`]) run in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod dispersion;
pub mod dual;
pub mod error;
pub mod io;
pub mod linear;
pub mod nonlinear;
pub mod params;
pub mod scalar;
pub mod spectral;
pub mod wave;

pub use error::{Error, Result};
pub use scalar::Real;

/// Model constants in double precision.
pub type Params64 = params::Params<f64>;
/// Model constants in single precision.
pub type Params32 = params::Params<f32>;
/// Traveling wave in double precision.
pub type Wave64 = wave::WaveProfile<f64>;
/// Traveling wave in single precision.
pub type Wave32 = wave::WaveProfile<f32>;
/// Collocation grid in double precision.
pub type Grid64 = spectral::Grid<f64>;
/// Collocation grid in single precision.
pub type Grid32 = spectral::Grid<f32>;
/// Growth curve in double precision.
pub type GrowthCurve64 = dispersion::GrowthCurve<f64>;
