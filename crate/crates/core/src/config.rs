//! Scenario configuration for the batch front-end.
//!
//! Documents are TOML. Lengths accept a bare number in metres or a string
//! with a unit (`"50 cm"`, `"1550 nm"`, `"420 km"`); angles are in degrees.
//! Values are held in SI units (angles stay in degrees and are converted at
//! the module boundary), so serialising a parsed config and parsing it again
//! reproduces it exactly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::beam::BeamParams;
use crate::budget::{self, ChannelParams, FluctuationMode};
use crate::error::{Error, Result};
use crate::extinction::ExtinctionParams;
use crate::geometry::{EARTH_MU, EARTH_RADIUS_M};
use crate::qst::{FadingDraw, ReconstructOptions, StateEnsemble, TomographyConfig};
use crate::turbulence::{ApertureKind, ApertureModel, ScintillationVariant, TurbulenceProfile};

/// A length in metres.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Length(pub f64);

impl Length {
    pub fn m(self) -> f64 {
        self.0
    }
}

impl FromStr for Length {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let split = s
            .find(|ch: char| !(ch.is_ascii_digit() || "+-.eE ".contains(ch)))
            .unwrap_or(s.len());
        let (num, unit) = s.split_at(split);
        let value: f64 = num
            .trim()
            .parse()
            .map_err(|_| format!("cannot read a number from length {s:?}"))?;
        let scale = match unit.trim() {
            "" | "m" => 1.0,
            "km" => 1e3,
            "cm" => 1e-2,
            "mm" => 1e-3,
            "um" | "µm" => 1e-6,
            "nm" => 1e-9,
            other => return Err(format!("unknown length unit {other:?} in {s:?}")),
        };
        Ok(Length(value * scale))
    }
}

impl<'de> Deserialize<'de> for Length {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Length(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl Serialize for Length {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Scenario {
    PassTime,
    AvSweep,
    #[default]
    LinkBudget,
    Qst,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scenario::PassTime => "pass_time",
            Scenario::AvSweep => "av_sweep",
            Scenario::LinkBudget => "link_budget",
            Scenario::Qst => "qst",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    /// Satellite altitudes; each scenario runs once per altitude.
    pub altitudes: Vec<Length>,
    pub ogs_altitude: Length,
    pub earth_radius: Length,
    /// Gravitational parameter, m^3/s^2.
    pub mu: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        GeometrySection {
            altitudes: vec![
                Length(budget::LEO_ALTITUDE_M),
                Length(budget::MEO_ALTITUDE_M),
            ],
            ogs_altitude: Length(65.0),
            earth_radius: Length(EARTH_RADIUS_M),
            mu: EARTH_MU,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub wavelength: Length,
    pub waist: Length,
    /// Receiver telescope diameters.
    pub diameters: Vec<Length>,
    pub eta_int: f64,
    pub mode: FluctuationMode,
    pub scintillation: ScintillationVariant,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            wavelength: Length(1550e-9),
            waist: Length(0.01),
            diameters: [0.25, 0.5, 0.75, 1.0].map(Length).to_vec(),
            eta_int: 0.4,
            mode: FluctuationMode::Psi,
            scintillation: ScintillationVariant::AsPrinted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtinctionSection {
    /// Sea-level attenuation coefficient, 1/m.
    pub alpha0: f64,
    pub h0: Length,
}

impl Default for ExtinctionSection {
    fn default() -> Self {
        let p = ExtinctionParams::default();
        ExtinctionSection {
            alpha0: p.alpha0_per_m,
            h0: Length(p.h0_m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TurbulenceSection {
    /// Ground-level structure constant, m^(-2/3).
    pub c0: f64,
    /// RMS wind speed, m/s.
    pub v_rms: f64,
}

impl Default for TurbulenceSection {
    fn default() -> Self {
        let p = TurbulenceProfile::default();
        TurbulenceSection {
            c0: p.c0,
            v_rms: p.v_rms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApertureSection {
    pub model: ApertureKind,
    pub tropopause_height: Length,
    pub theta_max_deg: f64,
}

impl Default for ApertureSection {
    fn default() -> Self {
        let m = ApertureModel::default();
        ApertureSection {
            model: m.kind,
            tropopause_height: Length(m.tropopause_height_m),
            theta_max_deg: m.theta_max_deg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub zenith_limit_deg: f64,
    pub zenith_step_deg: f64,
    pub draws_per_point: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            zenith_limit_deg: budget::MAX_SWEEP_ZENITH_DEG,
            zenith_step_deg: 1.0,
            draws_per_point: budget::DEFAULT_DRAWS_PER_POINT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PassTimeSection {
    pub zenith_limit_deg: f64,
}

impl Default for PassTimeSection {
    fn default() -> Self {
        PassTimeSection {
            zenith_limit_deg: 80.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TomographySection {
    /// Photons emitted per tomography trial; one curve per entry.
    pub photons: Vec<u64>,
    pub ensemble_size: usize,
    pub zenith_limit_deg: f64,
    pub zenith_step_deg: f64,
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub states: StateEnsemble,
    pub fading_draw: FadingDraw,
    pub shot_noise: bool,
}

impl Default for TomographySection {
    fn default() -> Self {
        let o = ReconstructOptions::default();
        TomographySection {
            photons: vec![200_000],
            ensemble_size: 220,
            zenith_limit_deg: 80.0,
            zenith_step_deg: 10.0,
            restarts: o.restarts,
            tol: o.tol,
            max_iter: o.max_iter,
            states: StateEnsemble::HaarPure,
            fading_draw: FadingDraw::PerTrial,
            shot_noise: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub seed: u64,
    /// Output directory.
    pub output: String,
    pub geometry: GeometrySection,
    pub channel: ChannelSection,
    pub extinction: ExtinctionSection,
    pub turbulence: TurbulenceSection,
    pub aperture: ApertureSection,
    pub sweep: SweepSection,
    pub pass_time: PassTimeSection,
    pub tomography: TomographySection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: Scenario::default(),
            seed: 1,
            output: "out".into(),
            geometry: Default::default(),
            channel: Default::default(),
            extinction: Default::default(),
            turbulence: Default::default(),
            aperture: Default::default(),
            sweep: Default::default(),
            pass_time: Default::default(),
            tomography: Default::default(),
        }
    }
}

/// Parse and validate a TOML scenario document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(text)
        .map_err(|e| Error::ConfigParse(e.to_string().trim_end().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn check(bad: &mut Vec<String>, ok: bool, msg: impl FnOnce() -> String) {
    if !ok {
        bad.push(msg());
    }
}

fn zenith_ok(deg: f64) -> bool {
    (0.0..90.0).contains(&deg)
}

impl ScenarioConfig {
    /// Serialise to a TOML document that parses back to `self`.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    /// Checks every invariant and reports all violations together.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let g = &self.geometry;
        check(&mut bad, !g.altitudes.is_empty(), || {
            "geometry.altitudes is empty".into()
        });
        check(&mut bad, g.ogs_altitude.m() >= 0.0, || {
            format!(
                "geometry.ogs_altitude must be >= 0, got {} m",
                g.ogs_altitude.m()
            )
        });
        for h in &g.altitudes {
            check(&mut bad, h.m() > g.ogs_altitude.m(), || {
                format!(
                    "geometry.altitudes: {} m is not above the ground station",
                    h.m()
                )
            });
        }
        check(&mut bad, g.earth_radius.m() > 0.0, || {
            "geometry.earth_radius must be > 0".into()
        });
        check(&mut bad, g.mu > 0.0, || "geometry.mu must be > 0".into());

        let c = &self.channel;
        check(&mut bad, c.wavelength.m() > 0.0, || {
            "channel.wavelength must be > 0".into()
        });
        check(&mut bad, c.waist.m() > 0.0, || {
            "channel.waist must be > 0".into()
        });
        check(&mut bad, !c.diameters.is_empty(), || {
            "channel.diameters is empty".into()
        });
        for d in &c.diameters {
            check(&mut bad, d.m() >= 0.0, || {
                format!("channel.diameters: {} m is negative", d.m())
            });
        }
        check(&mut bad, c.eta_int > 0.0 && c.eta_int <= 1.0, || {
            format!("channel.eta_int must lie in (0, 1], got {}", c.eta_int)
        });

        check(&mut bad, self.extinction.alpha0 > 0.0, || {
            "extinction.alpha0 must be > 0".into()
        });
        check(&mut bad, self.extinction.h0.m() > 0.0, || {
            "extinction.h0 must be > 0".into()
        });
        check(&mut bad, self.turbulence.c0 >= 0.0, || {
            "turbulence.c0 must be >= 0".into()
        });
        check(&mut bad, self.turbulence.v_rms >= 0.0, || {
            "turbulence.v_rms must be >= 0".into()
        });
        check(&mut bad, self.aperture.tropopause_height.m() > 0.0, || {
            "aperture.tropopause_height must be > 0".into()
        });
        check(&mut bad, self.aperture.theta_max_deg > 0.0, || {
            "aperture.theta_max_deg must be > 0".into()
        });

        let s = &self.sweep;
        check(
            &mut bad,
            s.zenith_limit_deg >= 0.0 && s.zenith_limit_deg <= budget::MAX_SWEEP_ZENITH_DEG,
            || {
                format!(
                    "sweep.zenith_limit_deg must lie in [0, 80], got {}",
                    s.zenith_limit_deg
                )
            },
        );
        check(&mut bad, s.zenith_step_deg > 0.0, || {
            "sweep.zenith_step_deg must be > 0".into()
        });
        check(&mut bad, s.draws_per_point >= 1, || {
            "sweep.draws_per_point must be >= 1".into()
        });

        let p = self.pass_time.zenith_limit_deg;
        check(&mut bad, zenith_ok(p) && p > 0.0, || {
            format!("pass_time.zenith_limit_deg must lie in (0, 90), got {p}")
        });

        let t = &self.tomography;
        check(
            &mut bad,
            !t.photons.is_empty() && t.photons.iter().all(|&n| n >= 1),
            || "tomography.photons must be a non-empty list of counts >= 1".into(),
        );
        check(&mut bad, t.ensemble_size >= 1, || {
            "tomography.ensemble_size must be >= 1".into()
        });
        check(
            &mut bad,
            t.zenith_limit_deg >= 0.0 && t.zenith_limit_deg <= budget::MAX_SWEEP_ZENITH_DEG,
            || {
                format!(
                    "tomography.zenith_limit_deg must lie in [0, 80], got {}",
                    t.zenith_limit_deg
                )
            },
        );
        check(&mut bad, t.zenith_step_deg > 0.0, || {
            "tomography.zenith_step_deg must be > 0".into()
        });
        check(&mut bad, t.restarts >= 1, || {
            "tomography.restarts must be >= 1".into()
        });
        check(&mut bad, t.tol > 0.0, || {
            "tomography.tol must be > 0".into()
        });
        check(&mut bad, t.max_iter >= 1, || {
            "tomography.max_iter must be >= 1".into()
        });

        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid(bad))
        }
    }

    /// Channel with the first configured diameter.
    pub fn channel_params(&self) -> ChannelParams {
        let c = &self.channel;
        ChannelParams {
            beam: BeamParams {
                wavelength_m: c.wavelength.m(),
                waist_m: c.waist.m(),
                receiver_radius_m: c.diameters.first().map_or(0.0, |d| 0.5 * d.m()),
            },
            extinction: ExtinctionParams {
                alpha0_per_m: self.extinction.alpha0,
                h0_m: self.extinction.h0.m(),
            },
            turbulence: TurbulenceProfile {
                c0: self.turbulence.c0,
                v_rms: self.turbulence.v_rms,
                h_ogs_m: self.geometry.ogs_altitude.m(),
            },
            eta_int: c.eta_int,
            aperture_model: ApertureModel {
                kind: self.aperture.model,
                tropopause_height_m: self.aperture.tropopause_height.m(),
                theta_max_deg: self.aperture.theta_max_deg,
            },
            fluctuation_mode: c.mode,
            scintillation_variant: c.scintillation,
        }
    }

    pub fn diameters_m(&self) -> Vec<f64> {
        self.channel.diameters.iter().map(|d| d.m()).collect()
    }

    /// Tomography settings for one photon budget.
    pub fn tomography_config(&self, photons: u64) -> TomographyConfig {
        let t = &self.tomography;
        TomographyConfig {
            photons,
            transmittance: 1.0,
            ensemble_size: t.ensemble_size,
            seed: self.seed,
            optimizer: ReconstructOptions {
                restarts: t.restarts,
                tol: t.tol,
                max_iter: t.max_iter,
            },
            states: t.states,
            shot_noise: t.shot_noise,
        }
    }
}
