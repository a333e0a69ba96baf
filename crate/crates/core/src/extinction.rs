//! Atmospheric absorption and scattering.
//!
//! The attenuation coefficient decays exponentially with altitude,
//! `gamma(h) = alpha0 * exp(-h / h0)`. The default scale height is 6 600 m:
//! with `alpha0 = 5e-6 /m` this gives the familiar zenith bound
//! `exp(-alpha0 * h0) = exp(-0.033) ~ 0.9675` (0.143 dB). The constants are
//! usually quoted for 800 nm and are applied unchanged at other wavelengths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, check_zenith, LinkGeometry};
use crate::quad;

/// Altitude above which the attenuation coefficient is treated as zero.
pub const EXACT_PATH_TOP_M: f64 = 100_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionParams {
    pub alpha0_per_m: f64,
    pub h0_m: f64,
}

impl Default for ExtinctionParams {
    fn default() -> Self {
        ExtinctionParams {
            alpha0_per_m: 5e-6,
            h0_m: 6_600.0,
        }
    }
}

impl ExtinctionParams {
    pub fn validate(&self) -> Result<()> {
        if self.alpha0_per_m > 0.0 && self.h0_m > 0.0 {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "extinction parameters must be positive (alpha0 = {}, h0 = {})",
                self.alpha0_per_m, self.h0_m
            )))
        }
    }

    /// Attenuation coefficient at altitude `h`.
    pub fn gamma(&self, h: f64) -> f64 {
        self.alpha0_per_m * (-h / self.h0_m).exp()
    }
}

/// `exp(-gamma * d)`.
pub fn beer_lambert(gamma_per_m: f64, distance_m: f64) -> f64 {
    (-gamma_per_m * distance_m).exp()
}

/// Transmittance of a vertical path from sea level to altitude `altitude_m`.
pub fn zenith_transmittance(params: &ExtinctionParams, altitude_m: f64) -> Result<f64> {
    params.validate()?;
    if !(altitude_m >= 0.0) {
        return Err(Error::domain(format!(
            "altitude must be >= 0, got {altitude_m}"
        )));
    }
    let column = params.alpha0_per_m * params.h0_m * -(-altitude_m / params.h0_m).exp_m1();
    Ok((-column).exp())
}

/// Plane-parallel (secant) slant transmittance, `eta_zen ^ sec(zeta)`.
pub fn slant_transmittance(params: &ExtinctionParams, altitude_m: f64, zenith: f64) -> Result<f64> {
    check_zenith(zenith)?;
    let zen = zenith_transmittance(params, altitude_m)?;
    Ok(zen.powf(1.0 / zenith.cos()))
}

/// Slant transmittance from the exact path integral over spherical shells.
///
/// The optical depth `alpha0 * int exp(-h(s)/h0) ds` runs from the station to
/// the satellite, truncated where the path rises above [`EXACT_PATH_TOP_M`].
pub fn exact_slant_transmittance(params: &ExtinctionParams, geom: &LinkGeometry) -> Result<f64> {
    params.validate()?;
    let z = geometry::slant_range(geom)?;
    let end = if geom.satellite_altitude_m <= EXACT_PATH_TOP_M {
        z
    } else {
        path_length_to_altitude(geom, EXACT_PATH_TOP_M).min(z)
    };
    let depth = quad::integrate_pieces(
        |s| (-geom.altitude_along_path(s) / params.h0_m).exp(),
        &path_breaks(end),
        quad::DEFAULT_REL_TOL,
    )?;
    Ok((-params.alpha0_per_m * depth).exp())
}

fn path_length_to_altitude(geom: &LinkGeometry, altitude_m: f64) -> f64 {
    let capped = LinkGeometry {
        satellite_altitude_m: altitude_m.max(geom.ogs_altitude_m + 1e-9),
        ..*geom
    };
    // Validated geometry, so this cannot fail.
    geometry::slant_range(&capped).unwrap_or(0.0)
}

fn path_breaks(end: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    breaks.extend([2e3, 1e4, 3e4, 1e5, 3e5].into_iter().filter(|&b| b < end));
    breaks.push(end);
    breaks
}
