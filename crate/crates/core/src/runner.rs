//! Scenario dispatch: run the configured experiment and write its tables.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::budget;
use crate::config::{Scenario, ScenarioConfig};
use crate::error::{Error, Result};
use crate::geometry::{self, LinkGeometry};
use crate::output::{self, Manifest, Table};
use crate::qst;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// `420km`, `20200km`, `500m`.
fn altitude_label(h: f64) -> String {
    if h >= 1e3 && (h / 1e3).fract() == 0.0 {
        format!("{}km", h / 1e3)
    } else {
        format!("{}m", output::format_sig9(h))
    }
}

fn base_geometry(cfg: &ScenarioConfig, h: f64) -> Result<LinkGeometry> {
    let g = LinkGeometry {
        satellite_altitude_m: h,
        ogs_altitude_m: cfg.geometry.ogs_altitude.m(),
        earth_radius_m: cfg.geometry.earth_radius.m(),
        zenith_angle_rad: 0.0,
    };
    g.validate()?;
    Ok(g)
}

/// Compute every table of the scenario, keyed by file name.
pub fn tables(cfg: &ScenarioConfig) -> Result<Vec<(String, Table)>> {
    cfg.validate()?;
    let channel = cfg.channel_params();
    let diameters = cfg.diameters_m();
    let altitudes: Vec<f64> = cfg.geometry.altitudes.iter().map(|h| h.m()).collect();
    let mut out = Vec::new();
    match cfg.scenario {
        Scenario::PassTime => {
            let limit = cfg.pass_time.zenith_limit_deg.to_radians();
            let rows = altitudes
                .iter()
                .map(|&h| {
                    geometry::pass_times(h, limit, cfg.geometry.earth_radius.m(), cfg.geometry.mu)
                        .map(|p| (h, p))
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(("pass_time.csv".to_string(), output::pass_time_table(&rows)));
        }
        Scenario::AvSweep => {
            let grid = budget::zenith_grid(cfg.sweep.zenith_limit_deg, cfg.sweep.zenith_step_deg);
            for &h in &altitudes {
                let av = budget::av_vs_zenith(
                    &channel.aperture_model,
                    &channel.turbulence,
                    &base_geometry(cfg, h)?,
                    &diameters,
                    &grid,
                    channel.beam.wavelength_m,
                )?;
                out.push((
                    format!("av_{}.csv", altitude_label(h)),
                    output::av_table(&av),
                ));
            }
        }
        Scenario::LinkBudget => {
            let grid = budget::zenith_grid(cfg.sweep.zenith_limit_deg, cfg.sweep.zenith_step_deg);
            for (i, &h) in altitudes.iter().enumerate() {
                let sweep = budget::sweep_pass(
                    &channel,
                    &base_geometry(cfg, h)?,
                    &diameters,
                    &grid,
                    cfg.sweep.draws_per_point,
                    rng_key(cfg.seed, i),
                )?;
                out.push((
                    format!("loss_{}.csv", altitude_label(h)),
                    output::sweep_table(&sweep),
                ));
            }
        }
        Scenario::Qst => {
            let t = &cfg.tomography;
            let grid = budget::zenith_grid(t.zenith_limit_deg, t.zenith_step_deg);
            for (i, &h) in altitudes.iter().enumerate() {
                let base = base_geometry(cfg, h)?;
                let mut table = output::fidelity_table(&qst::FidelityTable {
                    altitude_m: h,
                    rows: Vec::new(),
                });
                for (j, &n) in t.photons.iter().enumerate() {
                    let mut tc = cfg.tomography_config(n);
                    tc.seed = rng_key(rng_key(cfg.seed, i), j);
                    let fid = qst::fidelity_vs_zenith(
                        &channel,
                        &base,
                        &diameters,
                        &grid,
                        &tc,
                        t.fading_draw,
                    )?;
                    table.rows.extend(output::fidelity_table(&fid).rows);
                }
                out.push((format!("fidelity_{}.csv", altitude_label(h)), table));
            }
        }
    }
    Ok(out)
}

fn rng_key(seed: u64, index: usize) -> u64 {
    crate::rng::derive_seed(seed, &[index as u64])
}

/// Run the scenario and write one CSV per table plus the manifest into `dir`.
pub fn run_into(cfg: &ScenarioConfig, dir: &Path) -> Result<RunReport> {
    let start = Instant::now();
    let tables = tables(cfg)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for (name, table) in &tables {
        let path = dir.join(name);
        output::emit_csv(table, &path)?;
        files.push(path);
    }
    let manifest = Manifest {
        software: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        scenario: cfg.scenario.to_string(),
        seed: cfg.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        files: tables.iter().map(|(n, _)| n.clone()).collect(),
        config: cfg,
    };
    let manifest = output::write_manifest(&manifest, &dir.join(MANIFEST_NAME))?;
    Ok(RunReport { files, manifest })
}

pub fn run(cfg: &ScenarioConfig) -> Result<RunReport> {
    run_into(cfg, Path::new(&cfg.output))
}
