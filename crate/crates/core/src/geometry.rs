//! Spherical-Earth slant-path geometry and zenithal pass timing.
//!
//! The Earth is a non-rotating sphere and the orbit is circular. Slant ranges
//! are measured from the ground-station shell (radius `R_E + H_OGS`), so the
//! zenith slant range is `H - H_OGS`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;
/// Standard gravitational parameter of the Earth (m^3/s^2).
pub const EARTH_MU: f64 = 3.986_004_418e14;
pub const DEFAULT_ZENITH_LIMIT_RAD: f64 = 80.0 * std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub satellite_altitude_m: f64,
    pub ogs_altitude_m: f64,
    pub earth_radius_m: f64,
    pub zenith_angle_rad: f64,
}

impl LinkGeometry {
    /// Geometry over the default Earth radius.
    pub fn new(
        satellite_altitude_m: f64,
        ogs_altitude_m: f64,
        zenith_angle_rad: f64,
    ) -> Result<Self> {
        let g = LinkGeometry {
            satellite_altitude_m,
            ogs_altitude_m,
            earth_radius_m: EARTH_RADIUS_M,
            zenith_angle_rad,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_zenith(&self, zenith_angle_rad: f64) -> Self {
        LinkGeometry {
            zenith_angle_rad,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ogs_altitude_m >= 0.0) {
            return Err(Error::domain(format!(
                "ground station altitude must be >= 0, got {} m",
                self.ogs_altitude_m
            )));
        }
        if !(self.satellite_altitude_m > self.ogs_altitude_m) {
            return Err(Error::domain(format!(
                "satellite altitude {} m must exceed ground station altitude {} m",
                self.satellite_altitude_m, self.ogs_altitude_m
            )));
        }
        if !(self.earth_radius_m > 0.0) {
            return Err(Error::domain("earth radius must be positive"));
        }
        check_zenith(self.zenith_angle_rad)
    }

    /// Radius of the shell the ground station sits on.
    pub fn station_radius_m(&self) -> f64 {
        self.earth_radius_m + self.ogs_altitude_m
    }

    /// Altitude above sea level of the point a distance `s` along the line of
    /// sight from the station.
    pub fn altitude_along_path(&self, s: f64) -> f64 {
        let r = self.station_radius_m();
        (r * r + s * s + 2.0 * r * s * self.zenith_angle_rad.cos()).sqrt() - self.earth_radius_m
    }
}

pub(crate) fn check_zenith(zenith: f64) -> Result<()> {
    if zenith.is_finite() && zenith.abs() < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "zenith angle must satisfy |zeta| < 90 deg, got {:.6} deg",
            zenith.to_degrees()
        )))
    }
}

/// Line-of-sight distance from the station to the satellite.
pub fn slant_range(geom: &LinkGeometry) -> Result<f64> {
    geom.validate()?;
    let r = geom.station_radius_m();
    let h = geom.satellite_altitude_m - geom.ogs_altitude_m;
    let (sin_z, cos_z) = geom.zenith_angle_rad.sin_cos();
    if geom.zenith_angle_rad == 0.0 {
        return Ok(h);
    }
    // Rationalised form of sqrt((r+h)^2 - r^2 sin^2) - r cos, stable for small h.
    let disc = ((r + h) * (r + h) - r * r * sin_z * sin_z).sqrt();
    Ok(h * (2.0 * r + h) / (disc + r * cos_z))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassTimes {
    pub total_s: f64,
    pub effective_s: f64,
    pub zenith_limit_rad: f64,
}

/// Earth-central half-angle between the sub-satellite point and the station
/// when the satellite is seen at zenith angle `zenith`.
pub fn central_angle(altitude_m: f64, zenith: f64, earth_radius_m: f64) -> f64 {
    zenith - (earth_radius_m * zenith.sin() / (earth_radius_m + altitude_m)).asin()
}

/// Total visibility and effective (zenith-limited) durations of a zenithal
/// pass of a circular orbit at altitude `altitude_m`.
pub fn pass_times(
    altitude_m: f64,
    zenith_limit: f64,
    earth_radius_m: f64,
    mu: f64,
) -> Result<PassTimes> {
    if !(altitude_m > 0.0) {
        return Err(Error::domain(format!(
            "altitude must be positive, got {altitude_m} m"
        )));
    }
    if !(zenith_limit > 0.0 && zenith_limit < FRAC_PI_2) {
        return Err(Error::domain(format!(
            "zenith limit must lie in (0, 90) deg, got {:.4} deg",
            zenith_limit.to_degrees()
        )));
    }
    if !(earth_radius_m > 0.0 && mu > 0.0) {
        return Err(Error::domain("earth radius and mu must be positive"));
    }
    let orbit_radius = earth_radius_m + altitude_m;
    let omega = (mu / orbit_radius.powi(3)).sqrt();
    let total_s = 2.0 * central_angle(altitude_m, FRAC_PI_2, earth_radius_m) / omega;
    let effective_s = 2.0 * central_angle(altitude_m, zenith_limit, earth_radius_m) / omega;
    Ok(PassTimes {
        total_s,
        effective_s,
        zenith_limit_rad: zenith_limit,
    })
}
