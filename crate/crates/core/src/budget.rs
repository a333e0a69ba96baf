//! Link budget: the product of internal, atmospheric, diffraction and
//! turbulence factors, and zenith-angle sweeps over a satellite pass.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::{self, BeamParams};
use crate::error::{Error, Result};
use crate::extinction::{self, ExtinctionParams};
use crate::fading::FadingModel;
use crate::geometry::{self, LinkGeometry};
use crate::rng;
use crate::turbulence::{
    self, ApertureContext, ApertureKind, ApertureModel, ScintillationVariant, TurbulenceProfile,
};

pub const LEO_ALTITUDE_M: f64 = 420e3;
pub const MEO_ALTITUDE_M: f64 = 20_200e3;
pub const MAX_SWEEP_ZENITH_DEG: f64 = 80.0;
pub const DEFAULT_DRAWS_PER_POINT: usize = 10_000;

/// How the turbulence factor `I` enters the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluctuationMode {
    /// Log-variance is the intensity scintillation index (point receiver).
    Isi,
    /// Log-variance is the power scintillation index (aperture averaged).
    #[default]
    Psi,
    /// `I = 1`.
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub beam: BeamParams,
    pub extinction: ExtinctionParams,
    pub turbulence: TurbulenceProfile,
    pub eta_int: f64,
    pub aperture_model: ApertureModel,
    pub fluctuation_mode: FluctuationMode,
    pub scintillation_variant: ScintillationVariant,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            beam: BeamParams {
                wavelength_m: 1550e-9,
                waist_m: 0.01,
                receiver_radius_m: 0.5,
            },
            extinction: ExtinctionParams::default(),
            turbulence: TurbulenceProfile::default(),
            eta_int: 0.4,
            aperture_model: ApertureModel::default(),
            fluctuation_mode: FluctuationMode::Psi,
            scintillation_variant: ScintillationVariant::AsPrinted,
        }
    }
}

impl ChannelParams {
    pub fn with_diameter(&self, diameter_m: f64) -> Self {
        ChannelParams {
            beam: self.beam.with_receiver_diameter(diameter_m),
            ..*self
        }
    }

    pub fn with_mode(&self, fluctuation_mode: FluctuationMode) -> Self {
        ChannelParams {
            fluctuation_mode,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.beam.validate()?;
        self.extinction.validate()?;
        self.turbulence.validate()?;
        self.aperture_model.validate()?;
        if self.eta_int > 0.0 && self.eta_int <= 1.0 {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "eta_int must lie in (0, 1], got {}",
                self.eta_int
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmittanceBreakdown {
    pub eta_int: f64,
    pub eta_atm: f64,
    pub eta_d: f64,
    pub intensity_factor: f64,
    pub eta_total: f64,
    pub loss_db: f64,
}

impl TransmittanceBreakdown {
    pub fn from_factors(eta_int: f64, eta_atm: f64, eta_d: f64, intensity_factor: f64) -> Self {
        let eta_total = eta_int * eta_atm * eta_d * intensity_factor;
        TransmittanceBreakdown {
            eta_int,
            eta_atm,
            eta_d,
            intensity_factor,
            eta_total,
            loss_db: loss_db(eta_total),
        }
    }
}

pub fn loss_db(eta: f64) -> f64 {
    -10.0 * eta.log10()
}

/// Channel transmittance for one geometry and one turbulence draw.
pub fn compose(
    params: &ChannelParams,
    geom: &LinkGeometry,
    intensity: f64,
) -> Result<TransmittanceBreakdown> {
    params.validate()?;
    if !(intensity > 0.0) || !intensity.is_finite() {
        return Err(Error::domain(format!(
            "intensity factor must be positive, got {intensity}"
        )));
    }
    let z = geometry::slant_range(geom)?;
    let eta_atm = extinction::slant_transmittance(
        &params.extinction,
        geom.satellite_altitude_m,
        geom.zenith_angle_rad,
    )?;
    let eta_d = beam::diffraction_transmittance(&params.beam, z)?;
    Ok(TransmittanceBreakdown::from_factors(
        params.eta_int,
        eta_atm,
        eta_d,
        intensity,
    ))
}

/// Scintillation state of the channel at one geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellScintillation {
    pub sigma_r2: f64,
    pub sigma_i2: f64,
    pub av: f64,
    /// Log-variance fed to the fading model for the configured mode.
    pub sigma_j2: f64,
}

impl CellScintillation {
    pub fn fading(&self) -> FadingModel {
        FadingModel {
            sigma_j2: self.sigma_j2,
        }
    }
}

pub fn scintillation_at(params: &ChannelParams, geom: &LinkGeometry) -> Result<CellScintillation> {
    let lambda = params.beam.wavelength_m;
    let zenith = geom.zenith_angle_rad;
    let sigma_r2 = turbulence::rytov_downlink(
        &params.turbulence,
        lambda,
        geom.satellite_altitude_m,
        zenith,
    )?;
    let sigma_i2 =
        turbulence::scintillation_index(sigma_r2, params.scintillation_variant)?.sigma_i2;
    let av = aperture_factor(
        &params.aperture_model,
        &params.turbulence,
        geom,
        2.0 * params.beam.receiver_radius_m,
        lambda,
    )?;
    let sigma_j2 = match params.fluctuation_mode {
        FluctuationMode::Isi => sigma_i2,
        FluctuationMode::Psi => turbulence::psi(sigma_i2, av)?,
        FluctuationMode::Deterministic => 0.0,
    };
    Ok(CellScintillation {
        sigma_r2,
        sigma_i2,
        av,
        sigma_j2,
    })
}

fn aperture_factor(
    model: &ApertureModel,
    profile: &TurbulenceProfile,
    geom: &LinkGeometry,
    diameter_m: f64,
    wavelength_m: f64,
) -> Result<f64> {
    let ctx = match model.kind {
        ApertureKind::Andrews => ApertureContext::PathLength(geometry::slant_range(geom)?),
        ApertureKind::Giggenbach => {
            ApertureContext::Elevation(std::f64::consts::FRAC_PI_2 - geom.zenith_angle_rad.abs())
        }
        ApertureKind::Yura => ApertureContext::Profile {
            profile,
            altitude_m: geom.satellite_altitude_m,
            zenith: geom.zenith_angle_rad,
        },
    };
    turbulence::aperture_averaging(model, diameter_m, wavelength_m, ctx)
}

/// Loss statistics of one (diameter, zenith) cell, in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossStats {
    pub mean_db: f64,
    pub sd_db: f64,
    pub p05_db: f64,
    pub p50_db: f64,
    pub p95_db: f64,
    /// Loss with `I = 1`.
    pub deterministic_db: f64,
    pub scintillation: CellScintillation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterSeries {
    pub diameter_m: f64,
    pub points: Vec<LossStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub altitude_m: f64,
    pub mode: FluctuationMode,
    pub zenith_grid_deg: Vec<f64>,
    pub series: Vec<DiameterSeries>,
}

/// Zenith grid from `-limit` to `+limit` degrees in `step` degree steps, in radians.
pub fn zenith_grid(limit_deg: f64, step_deg: f64) -> Vec<f64> {
    let n = (2.0 * limit_deg / step_deg).round() as i64;
    (0..=n)
        .map(|i| (-limit_deg + step_deg * i as f64).to_radians())
        .collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain("zenith grid is empty"));
    }
    let limit = MAX_SWEEP_ZENITH_DEG.to_radians() + 1e-12;
    match grid.iter().find(|z| !(z.abs() <= limit)) {
        Some(z) => Err(Error::domain(format!(
            "zenith {:.4} deg is outside the +/-80 deg sweep range",
            z.to_degrees()
        ))),
        None => Ok(()),
    }
}

/// Percentile with linear interpolation between order statistics.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn cell_stats(
    params: &ChannelParams,
    geom: &LinkGeometry,
    draws: usize,
    seed: u64,
    path: [u64; 2],
) -> Result<LossStats> {
    let base = compose(params, geom, 1.0)?;
    let scint = scintillation_at(params, geom)?;
    let fading = scint.fading();
    let mut losses: Vec<f64> = if params.fluctuation_mode == FluctuationMode::Deterministic {
        vec![base.loss_db]
    } else {
        let mut rng = rng::rng_for(seed, &path);
        (0..draws)
            .map(|_| {
                let i = fading.draw(&mut rng);
                TransmittanceBreakdown::from_factors(base.eta_int, base.eta_atm, base.eta_d, i)
                    .loss_db
            })
            .collect()
    };
    let n = losses.len() as f64;
    let mean = losses.iter().sum::<f64>() / n;
    let sd = if losses.len() > 1 {
        (losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    losses.sort_by(f64::total_cmp);
    Ok(LossStats {
        mean_db: mean,
        sd_db: sd,
        p05_db: percentile(&losses, 0.05),
        p50_db: percentile(&losses, 0.50),
        p95_db: percentile(&losses, 0.95),
        deterministic_db: base.loss_db,
        scintillation: scint,
    })
}

/// Photon-loss statistics over a pass for each receiver diameter.
///
/// Each (diameter, zenith) cell draws from its own generator keyed by
/// `(seed, diameter index, zenith index)`, so runs that differ only in the
/// fluctuation mode see the same underlying normal variates.
pub fn sweep_pass(
    params: &ChannelParams,
    base: &LinkGeometry,
    diameters_m: &[f64],
    zenith_grid_rad: &[f64],
    draws_per_point: usize,
    seed: u64,
) -> Result<SweepResult> {
    check_grid(zenith_grid_rad)?;
    base.validate()?;
    if draws_per_point == 0 {
        return Err(Error::domain("draws_per_point must be >= 1"));
    }
    let cells: Vec<(usize, usize)> = (0..diameters_m.len())
        .flat_map(|d| (0..zenith_grid_rad.len()).map(move |z| (d, z)))
        .collect();
    let stats = cells
        .par_iter()
        .map(|&(d, z)| {
            let p = params.with_diameter(diameters_m[d]);
            let g = base.with_zenith(zenith_grid_rad[z]);
            cell_stats(&p, &g, draws_per_point, seed, [d as u64, z as u64])
        })
        .collect::<Result<Vec<_>>>()?;
    let per = zenith_grid_rad.len();
    let series = diameters_m
        .iter()
        .enumerate()
        .map(|(d, &diameter_m)| DiameterSeries {
            diameter_m,
            points: stats[d * per..(d + 1) * per].to_vec(),
        })
        .collect();
    Ok(SweepResult {
        altitude_m: base.satellite_altitude_m,
        mode: params.fluctuation_mode,
        zenith_grid_deg: zenith_grid_rad.iter().map(|z| z.to_degrees()).collect(),
        series,
    })
}

/// Aperture averaging factor per (diameter, zenith).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvTable {
    pub kind: ApertureKind,
    pub altitude_m: f64,
    pub zenith_grid_deg: Vec<f64>,
    pub diameters_m: Vec<f64>,
    /// `values[d][z]`.
    pub values: Vec<Vec<f64>>,
}

pub fn av_vs_zenith(
    model: &ApertureModel,
    profile: &TurbulenceProfile,
    base: &LinkGeometry,
    diameters_m: &[f64],
    zenith_grid_rad: &[f64],
    wavelength_m: f64,
) -> Result<AvTable> {
    check_grid(zenith_grid_rad)?;
    let values = diameters_m
        .iter()
        .map(|&d| {
            zenith_grid_rad
                .iter()
                .map(|&z| aperture_factor(model, profile, &base.with_zenith(z), d, wavelength_m))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AvTable {
        kind: model.kind,
        altitude_m: base.satellite_altitude_m,
        zenith_grid_deg: zenith_grid_rad.iter().map(|z| z.to_degrees()).collect(),
        diameters_m: diameters_m.to_vec(),
        values,
    })
}
