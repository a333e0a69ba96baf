//! Optical satellite-to-ground downlink simulator.
//!
//! The channel transmittance is the product of four independent factors:
//! internal detection efficiency, atmospheric extinction, diffraction-limited
//! collection and a unit-mean log-normal turbulence factor. The same channel
//! drives a qubit tomography experiment (SIC-POVM counts, least-squares
//! Cholesky reconstruction, Uhlmann-Jozsa fidelity).
//!
//! Module map:
//!
//! * [`geometry`]: slant range and pass timing over a spherical Earth
//! * [`extinction`]: Beer-Lambert extinction, zenith bound, secant and exact slant models
//! * [`beam`]: Gaussian beam spot size and aperture collection
//! * [`turbulence`]: Hufnagel-Valley profile, Rytov/scintillation indices, aperture averaging
//! * [`fading`]: unit-mean log-normal intensity model and sampler
//! * [`budget`]: transmittance composition and zenith sweeps
//! * [`qst`]: qubit tomography under channel loss
//! * [`config`] / [`output`] / [`runner`]: the batch front-end used by the `downlink` binary
//!
//! All quantities are SI internally (metres, radians, seconds).

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beam;
pub mod budget;
pub mod config;
pub mod error;
pub mod extinction;
pub mod fading;
pub mod geometry;
pub mod optim;
pub mod output;
pub mod qst;
pub mod quad;
pub mod rng;
pub mod runner;
pub mod turbulence;

pub use error::{Error, Result};
