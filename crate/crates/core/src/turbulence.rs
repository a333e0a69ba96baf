//! Optical turbulence: Hufnagel-Valley `C_n^2` profile, scintillation indices
//! and aperture averaging.
//!
//! Path integrals over the profile are truncated at [`TURBULENCE_TOP_M`];
//! above 100 km every term of the profile is below `1e-20 m^-2/3` and the
//! truncation error is far below the quadrature tolerance.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::check_zenith;
use crate::quad;

pub const TURBULENCE_TOP_M: f64 = 100_000.0;

/// Lower edge of the "moderate" band of the intensity scintillation index.
pub const MODERATE_LOW: f64 = 0.9;
/// Upper edge of the "moderate" band.
pub const MODERATE_HIGH: f64 = 1.1;

pub fn wavenumber(wavelength_m: f64) -> f64 {
    2.0 * PI / wavelength_m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbulenceProfile {
    /// Ground-level structure constant `C_0` (m^-2/3).
    pub c0: f64,
    /// RMS wind speed along the path (m/s).
    pub v_rms: f64,
    /// Ground station altitude above sea level (m).
    pub h_ogs_m: f64,
}

impl Default for TurbulenceProfile {
    fn default() -> Self {
        TurbulenceProfile {
            c0: 1.7e-14,
            v_rms: 26.25,
            h_ogs_m: 65.0,
        }
    }
}

impl TurbulenceProfile {
    pub fn validate(&self) -> Result<()> {
        if self.c0 > 0.0 && self.v_rms > 0.0 && self.h_ogs_m >= 0.0 {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "invalid turbulence profile: {self:?}"
            )))
        }
    }

    /// The three summands of the profile at altitude `h`: high-altitude wind
    /// term, background term and ground-layer term.
    pub fn cn2_terms(&self, h: f64) -> [f64; 3] {
        let wind = 8.148e-56 * self.v_rms * self.v_rms * h.powi(10) * (-h / 1000.0).exp();
        let background = 2.7e-16 * (-h / 1500.0).exp();
        let ground = self.c0 * (-self.h_ogs_m / 700.0).exp() * ((self.h_ogs_m - h) / 100.0).exp();
        [wind, background, ground]
    }

    fn cn2_unchecked(&self, h: f64) -> f64 {
        self.cn2_terms(h).iter().sum()
    }
}

/// Refractive-index structure parameter at altitude `h` above sea level.
pub fn cn2(profile: &TurbulenceProfile, h: f64) -> Result<f64> {
    profile.validate()?;
    if !(h >= profile.h_ogs_m) {
        return Err(Error::domain(format!(
            "altitude {h} m is below the ground station ({} m)",
            profile.h_ogs_m
        )));
    }
    Ok(profile.cn2_unchecked(h))
}

/// Plane-wave Rytov variance of a horizontal path with constant `C_n^2`.
pub fn rytov_horizontal(cn2_const: f64, wavelength_m: f64, path_m: f64) -> f64 {
    1.23 * cn2_const * wavenumber(wavelength_m).powf(7.0 / 6.0) * path_m.powf(11.0 / 6.0)
}

/// `int_{H_OGS}^{H} C_n^2(z) (z - H_OGS)^power dz`, truncated at
/// [`TURBULENCE_TOP_M`].
pub fn weighted_cn2_integral(
    profile: &TurbulenceProfile,
    altitude_m: f64,
    power: f64,
) -> Result<f64> {
    profile.validate()?;
    let lo = profile.h_ogs_m;
    if !(altitude_m > lo) {
        return Err(Error::domain(format!(
            "satellite altitude {altitude_m} m must exceed ground station altitude {lo} m"
        )));
    }
    let hi = altitude_m.min(TURBULENCE_TOP_M.max(lo + 1.0));
    let mut breaks = vec![lo];
    for b in [
        lo + 100.0,
        lo + 500.0,
        lo + 2_000.0,
        5e3,
        1e4,
        1.5e4,
        2.5e4,
        5e4,
    ] {
        if b > *breaks.last().unwrap() && b < hi {
            breaks.push(b);
        }
    }
    breaks.push(hi);
    quad::integrate_pieces(
        |z| profile.cn2_unchecked(z) * (z - lo).max(0.0).powf(power),
        &breaks,
        quad::DEFAULT_REL_TOL,
    )
}

/// Rytov index of a downlink at zenith angle `zenith`.
pub fn rytov_downlink(
    profile: &TurbulenceProfile,
    wavelength_m: f64,
    altitude_m: f64,
    zenith: f64,
) -> Result<f64> {
    check_zenith(zenith)?;
    if !(wavelength_m > 0.0) {
        return Err(Error::domain("wavelength must be positive"));
    }
    let integral = weighted_cn2_integral(profile, altitude_m, 5.0 / 6.0)?;
    let sec = 1.0 / zenith.cos();
    Ok(2.25 * wavenumber(wavelength_m).powf(7.0 / 6.0) * sec.powf(11.0 / 6.0) * integral)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScintillationVariant {
    /// Both denominators raised to 7/6.
    #[default]
    AsPrinted,
    /// Second denominator raised to 5/6, which saturates towards 1.
    AndrewsBook,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Weak,
    Moderate,
    Strong,
}

impl Regime {
    pub fn classify(sigma_i2: f64) -> Self {
        if sigma_i2 < MODERATE_LOW {
            Regime::Weak
        } else if sigma_i2 <= MODERATE_HIGH {
            Regime::Moderate
        } else {
            Regime::Strong
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScintillationResult {
    pub sigma_r2: f64,
    pub sigma_i2: f64,
    pub regime: Regime,
}

/// Intensity scintillation index from the Rytov index, valid from weak into
/// strong fluctuations.
pub fn scintillation_index(
    sigma_r2: f64,
    variant: ScintillationVariant,
) -> Result<ScintillationResult> {
    if !(sigma_r2 >= 0.0) || !sigma_r2.is_finite() {
        return Err(Error::domain(format!(
            "Rytov index must be >= 0, got {sigma_r2}"
        )));
    }
    let s125 = sigma_r2.powf(6.0 / 5.0);
    let second_exp = match variant {
        ScintillationVariant::AsPrinted => 7.0 / 6.0,
        ScintillationVariant::AndrewsBook => 5.0 / 6.0,
    };
    let log_term = 0.49 * sigma_r2 / (1.0 + 1.11 * s125).powf(7.0 / 6.0)
        + 0.51 * sigma_r2 / (1.0 + 0.69 * s125).powf(second_exp);
    let sigma_i2 = log_term.exp_m1();
    Ok(ScintillationResult {
        sigma_r2,
        sigma_i2,
        regime: Regime::classify(sigma_i2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApertureKind {
    #[default]
    Andrews,
    Giggenbach,
    Yura,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApertureModel {
    pub kind: ApertureKind,
    pub tropopause_height_m: f64,
    pub theta_max_deg: f64,
}

impl Default for ApertureModel {
    fn default() -> Self {
        ApertureModel {
            kind: ApertureKind::Andrews,
            tropopause_height_m: 12_000.0,
            theta_max_deg: 10.0,
        }
    }
}

impl ApertureModel {
    pub fn andrews() -> Self {
        Self::default()
    }

    pub fn with_kind(self, kind: ApertureKind) -> Self {
        ApertureModel { kind, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tropopause_height_m > 0.0 && self.theta_max_deg > 0.0 && self.theta_max_deg < 90.0 {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid aperture model: {self:?}")))
        }
    }

    /// Distance to the dominant turbulent layer seen at elevation `theta`.
    pub fn giggenbach_length(&self, elevation_rad: f64) -> Result<f64> {
        self.validate()?;
        let theta = elevation_rad.to_degrees();
        if !(theta > 0.0 && theta <= 90.0) {
            return Err(Error::domain(format!(
                "elevation must lie in (0, 90] deg, got {theta} deg"
            )));
        }
        let x = theta / 90.0;
        let xm = self.theta_max_deg / 90.0;
        Ok(self.tropopause_height_m * x / (x * x + xm * xm))
    }
}

/// Inputs each aperture-averaging model needs beyond `D` and `lambda`.
#[derive(Debug, Clone, Copy)]
pub enum ApertureContext<'a> {
    /// Total propagation distance (Andrews).
    PathLength(f64),
    /// Elevation angle in radians (Giggenbach).
    Elevation(f64),
    /// Turbulence profile, satellite altitude and zenith angle (Yura).
    Profile {
        profile: &'a TurbulenceProfile,
        altitude_m: f64,
        zenith: f64,
    },
}

/// Turbulence scale height: the quotient of the second and 5/6 moments of the
/// profile above the station, raised to 6/7.
pub fn yura_scale_height(profile: &TurbulenceProfile, altitude_m: f64) -> Result<f64> {
    let num = weighted_cn2_integral(profile, altitude_m, 2.0)?;
    let den = weighted_cn2_integral(profile, altitude_m, 5.0 / 6.0)?;
    Ok((num / den).powf(6.0 / 7.0))
}

/// Aperture averaging factor `Av(D) = sigma_P^2 / sigma_I^2`.
pub fn aperture_averaging(
    model: &ApertureModel,
    diameter_m: f64,
    wavelength_m: f64,
    context: ApertureContext<'_>,
) -> Result<f64> {
    model.validate()?;
    if !(diameter_m >= 0.0 && wavelength_m > 0.0) {
        return Err(Error::domain(format!(
            "need D >= 0 and lambda > 0 (D = {diameter_m}, lambda = {wavelength_m})"
        )));
    }
    let k = wavenumber(wavelength_m);
    let d2 = diameter_m * diameter_m;
    match (model.kind, context) {
        (ApertureKind::Andrews, ApertureContext::PathLength(l)) => {
            if !(l > 0.0) {
                return Err(Error::domain(format!(
                    "path length must be positive, got {l}"
                )));
            }
            Ok((1.0 + 1.062 * k * d2 / (4.0 * l)).powf(-7.0 / 6.0))
        }
        (ApertureKind::Giggenbach, ApertureContext::Elevation(theta)) => {
            let l = model.giggenbach_length(theta)?;
            Ok((1.0 + 1.062 * k * d2 / (9.0 * l)).powf(-7.0 / 6.0))
        }
        (
            ApertureKind::Yura,
            ApertureContext::Profile {
                profile,
                altitude_m,
                zenith,
            },
        ) => {
            check_zenith(zenith)?;
            let hs = yura_scale_height(profile, altitude_m)?;
            let ratio = d2 * zenith.cos() / (wavelength_m * hs);
            Ok(1.0 / (1.0 + 1.1 * ratio.powf(7.0 / 6.0)))
        }
        (kind, ctx) => Err(Error::domain(format!(
            "{kind:?} aperture averaging cannot use context {ctx:?}"
        ))),
    }
}

/// Power scintillation index `Av * sigma_I^2`.
pub fn psi(sigma_i2: f64, av: f64) -> Result<f64> {
    if !(sigma_i2 >= 0.0) || !(av > 0.0 && av <= 1.0) {
        return Err(Error::domain(format!(
            "need sigma_I^2 >= 0 and Av in (0, 1] (got {sigma_i2}, {av})"
        )));
    }
    Ok(av * sigma_i2)
}
