//! Unit-mean log-normal model of turbulence-induced intensity fluctuations.
//!
//! The relative intensity `I = P / P0` has `ln I ~ N(-s/2, s)` where `s` is
//! the log-variance parameter (the ISI or the PSI, depending on whether
//! aperture averaging is modelled). This is the normalised form of the
//! irradiance-domain log-normal: writing `P0` for the long-term mean power
//! and using the weak-turbulence identity `sigma_chi^2 = s / 4` collapses the
//! irradiance and power-domain densities onto the density in [`pdf`]. The
//! mean of `I` is exactly 1 and its variance is `exp(s) - 1`.
//!
//! Normal variates come from `rand_distr::StandardNormal`; a draw maps to
//! `I = exp(-s/2 + sqrt(s) * z)`, so models with different `s` driven by the
//! same seed share the underlying normals.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingModel {
    pub sigma_j2: f64,
}

impl FadingModel {
    pub fn new(sigma_j2: f64) -> Result<Self> {
        if sigma_j2 >= 0.0 && sigma_j2.is_finite() {
            Ok(FadingModel { sigma_j2 })
        } else {
            Err(Error::domain(format!(
                "log-variance must be >= 0, got {sigma_j2}"
            )))
        }
    }

    pub fn mean(&self) -> f64 {
        1.0
    }

    pub fn variance(&self) -> f64 {
        self.sigma_j2.exp_m1()
    }

    /// Maps a standard normal variate to an intensity ratio.
    pub fn intensity_from_normal(&self, z: f64) -> f64 {
        if self.sigma_j2 == 0.0 {
            return 1.0;
        }
        (-0.5 * self.sigma_j2 + self.sigma_j2.sqrt() * z).exp()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.intensity_from_normal(z)
    }
}

/// Density of the relative intensity at `i`.
pub fn pdf(model: &FadingModel, i: f64) -> Result<f64> {
    if !(i > 0.0) {
        return Err(Error::domain(format!(
            "intensity ratio must be positive, got {i}"
        )));
    }
    let s = model.sigma_j2;
    if s == 0.0 {
        return Err(Error::Degenerate(
            "zero log-variance is a point mass at I = 1".into(),
        ));
    }
    let x = i.ln() + 0.5 * s;
    Ok((-(x * x) / (2.0 * s)).exp() / (i * (2.0 * PI * s).sqrt()))
}

/// `n` independent draws from the model, reproducible for a fixed seed.
pub fn sample(model: &FadingModel, seed: u64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("sample count must be >= 1"));
    }
    let mut rng = rng::rng_for(seed, &[]);
    Ok((0..n).map(|_| model.draw(&mut rng)).collect())
}
