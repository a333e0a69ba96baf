//! Diffraction-limited Gaussian beam and receiver collection efficiency.
//!
//! Paraxial propagation with perfect pointing: the beam axis passes through
//! the centre of a circular receiving aperture of radius `a_R`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParams {
    pub wavelength_m: f64,
    /// Beam waist radius at the transmitter.
    pub waist_m: f64,
    pub receiver_radius_m: f64,
}

impl BeamParams {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.wavelength_m, self.waist_m, self.receiver_radius_m]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "beam parameters must be positive: {self:?}"
            )))
        }
    }

    pub fn with_receiver_diameter(&self, diameter_m: f64) -> Self {
        BeamParams {
            receiver_radius_m: 0.5 * diameter_m,
            ..*self
        }
    }

    pub fn rayleigh_range(&self) -> f64 {
        PI * self.waist_m * self.waist_m / self.wavelength_m
    }
}

/// Beam radius after propagating `z` metres.
pub fn spot_size(params: &BeamParams, z: f64) -> Result<f64> {
    params.validate()?;
    if !(z >= 0.0) {
        return Err(Error::domain(format!(
            "propagation distance must be >= 0, got {z}"
        )));
    }
    Ok(params.waist_m * (z / params.rayleigh_range()).hypot(1.0))
}

/// Fraction of the beam power falling inside the receiver aperture.
pub fn diffraction_transmittance(params: &BeamParams, z: f64) -> Result<f64> {
    let w = spot_size(params, z)?;
    let a = params.receiver_radius_m;
    Ok(-(-2.0 * a * a / (w * w)).exp_m1())
}
