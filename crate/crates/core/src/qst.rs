//! Qubit state tomography over the satellite channel.
//!
//! An onboard source emits `N` copies of an unknown qubit state; a fraction
//! `eta` (the channel transmittance) reaches the ground, where a four-outcome
//! SIC-POVM is measured with Poisson shot noise. The state is recovered by
//! least squares over a Cholesky parameterisation and scored with the
//! Uhlmann-Jozsa fidelity.
//!
//! Predicted counts inside the least-squares cost use the same effective
//! photon number `round(eta * N)` as the simulated data and are not rounded,
//! so the cost is smooth in the parameters.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::{self, ChannelParams, FluctuationMode, TransmittanceBreakdown};
use crate::error::{Error, Result};
use crate::geometry::LinkGeometry;
use crate::optim::{self, SimplexOptions};
use crate::rng::{self, SimRng};

pub type C64 = Complex64;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
/// Largest Poisson mean sampled exactly; above it a rounded Gaussian is used.
pub const EXACT_POISSON_MAX_MEAN: f64 = 1e7;
/// Key for the per-member input-state streams, shared by every grid cell.
const STATE_STREAM: u64 = 0x5749_4331;
const PER_ZENITH_STREAM: u64 = 0x5a45_4e49;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn zero() -> Self {
        Mat2([[c(0.0, 0.0); 2]; 2])
    }

    pub fn identity() -> Self {
        Mat2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]])
    }

    pub fn pauli() -> [Mat2; 3] {
        let o = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let i = c(0.0, 1.0);
        [
            Mat2([[o, one], [one, o]]),
            Mat2([[o, -i], [i, o]]),
            Mat2([[one, o], [o, -one]]),
        ]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_defect(&self) -> f64 {
        let d = *self - self.adjoint();
        d.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = 0.5 * (self.0[0][1] + self.0[1][0].conj());
        let mid = 0.5 * (a + d);
        let rad = (0.5 * (a - d)).hypot(b.norm());
        [mid - rad, mid + rad]
    }

    /// Principal square root of a positive semidefinite Hermitian matrix.
    pub fn psd_sqrt(&self) -> Result<Mat2> {
        // sqrt(A) = (A + sqrt(det A) I) / sqrt(tr A + 2 sqrt(det A)) for 2x2 PSD A
        let det = self.det().re;
        let tr = self.trace().re;
        if !(det.is_finite() && tr.is_finite()) || det < -PSD_TOL || tr < -PSD_TOL {
            return Err(Error::Degenerate(format!(
                "matrix square root needs a PSD argument (trace {tr:.3e}, det {det:.3e})"
            )));
        }
        let s = det.max(0.0).sqrt();
        let t = (tr + 2.0 * s).max(0.0).sqrt();
        if t == 0.0 {
            return Ok(Mat2::zero());
        }
        Ok((*self + Mat2::identity().scale(c(s, 0.0))).scale(c(1.0 / t, 0.0)))
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + rhs.scale(c(-1.0, 0.0))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2(std::array::from_fn(|i| {
            std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j])
        }))
    }
}

/// A validated qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    pub const DIM: usize = 2;

    pub fn new(m: Mat2) -> Result<Self> {
        let herm = m.hermitian_defect();
        if herm > HERMITIAN_TOL {
            return Err(Error::domain(format!(
                "matrix is not Hermitian (defect {herm:.3e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::domain(format!("trace is {tr}, expected 1")));
        }
        let min_eig = m.hermitian_eigenvalues()[0];
        if min_eig < -PSD_TOL {
            return Err(Error::domain(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(DensityMatrix(m))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat2::identity().scale(c(0.5, 0.0)))
    }

    /// `|psi><psi|` for a (not necessarily normalised) non-zero vector.
    pub fn pure(psi: [C64; 2]) -> Result<Self> {
        let norm2 = psi[0].norm_sqr() + psi[1].norm_sqr();
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::Degenerate("zero state vector".into()));
        }
        let mut m = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = psi[i] * psi[j].conj() / norm2;
            }
        }
        // make the diagonal exactly real and the off-diagonal exactly conjugate
        m.0[0][0] = c(m.0[0][0].re, 0.0);
        m.0[1][1] = c(1.0 - m.0[0][0].re, 0.0);
        m.0[1][0] = m.0[0][1].conj();
        DensityMatrix::new(m)
    }

    /// State with Bloch vector `r` (`|r| <= 1`).
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let [x, y, z] = r;
        let m = Mat2([
            [c(0.5 * (1.0 + z), 0.0), c(0.5 * x, -0.5 * y)],
            [c(0.5 * x, 0.5 * y), c(0.5 * (1.0 - z), 0.0)],
        ]);
        DensityMatrix::new(m)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn bloch(&self) -> [f64; 3] {
        let m = &self.0 .0;
        [2.0 * m[0][1].re, -2.0 * m[0][1].im, m[0][0].re - m[1][1].re]
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }
}

/// Real Cholesky parameters `(t1, t2, t3, t4)` of `T = [[t1, 0], [t3 + i t4, t2]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CholeskyParams(pub [f64; 4]);

pub fn cholesky_to_rho(t: &CholeskyParams) -> Result<DensityMatrix> {
    let [t1, t2, t3, t4] = t.0;
    let norm2 = t1 * t1 + t2 * t2 + t3 * t3 + t4 * t4;
    if !(norm2.sqrt() >= 1e-15) || !norm2.is_finite() {
        return Err(Error::Degenerate(format!(
            "Cholesky vector norm too small: {t:?}"
        )));
    }
    let (a, d) = cholesky_diagonal(t1, t2, t3, t4, norm2);
    let off = c(t3 * t2, -t4 * t2) / norm2;
    DensityMatrix::new(Mat2([[c(a, 0.0), off], [off.conj(), c(d, 0.0)]]))
}

fn cholesky_diagonal(t1: f64, t2: f64, t3: f64, t4: f64, norm2: f64) -> (f64, f64) {
    let a = (t1 * t1 + t3 * t3 + t4 * t4) / norm2;
    let d = t2 * t2 / norm2;
    (a, d)
}

/// A set of measurement effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<Mat2>,
}

impl Povm {
    pub fn new(effects: Vec<Mat2>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::domain("POVM has no effects"));
        }
        for (k, m) in effects.iter().enumerate() {
            if m.hermitian_defect() > HERMITIAN_TOL || m.hermitian_eigenvalues()[0] < -PSD_TOL {
                return Err(Error::domain(format!(
                    "effect {k} is not positive semidefinite"
                )));
            }
        }
        let sum = effects.iter().fold(Mat2::zero(), |acc, m| acc + *m);
        let defect = (sum - Mat2::identity())
            .0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if defect > HERMITIAN_TOL {
            return Err(Error::domain(format!(
                "effects sum to identity only within {defect:.3e}"
            )));
        }
        Ok(Povm { effects })
    }

    pub fn effects(&self) -> &[Mat2] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// Born-rule outcome probabilities `tr(M_k rho)`.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.effects
            .iter()
            .map(|m| (*m * rho.0).trace().re)
            .collect()
    }
}

/// Bloch vectors of the tetrahedral qubit SIC-POVM.
pub fn sic_bloch_vectors() -> [[f64; 3]; 4] {
    let s = 1.0 / 3f64.sqrt();
    [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]
}

/// `M_k = (I + s_k . sigma) / 4` over the tetrahedron vertices.
pub fn sic_povm_qubit() -> Povm {
    let [sx, sy, sz] = Mat2::pauli();
    let effects = sic_bloch_vectors()
        .iter()
        .map(|s| {
            (Mat2::identity()
                + sx.scale(c(s[0], 0.0))
                + sy.scale(c(s[1], 0.0))
                + sz.scale(c(s[2], 0.0)))
            .scale(c(0.25, 0.0))
        })
        .collect();
    Povm::new(effects).expect("tetrahedral SIC-POVM is a valid POVM")
}

/// Nearest integer, ties away from zero, clamped at zero.
pub fn round_count(x: f64) -> u64 {
    x.round().max(0.0) as u64
}

pub fn effective_photons(photons: u64, eta: f64) -> u64 {
    round_count(eta * photons as f64)
}

/// Born-rule counts `round(N tr(M_k rho))`.
pub fn expected_counts(rho: &DensityMatrix, povm: &Povm, photons: u64) -> Vec<u64> {
    povm.probabilities(rho)
        .into_iter()
        .map(|p| round_count(photons as f64 * p))
        .collect()
}

pub fn poisson_sample<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    if mean <= EXACT_POISSON_MAX_MEAN {
        let d = Poisson::new(mean).expect("positive finite mean");
        d.sample(rng) as u64
    } else {
        let d = Normal::new(mean, mean.sqrt()).expect("positive finite mean");
        round_count(d.sample(rng))
    }
}

/// Poisson-distributed counts with means `round(round(eta N) tr(M_k rho))`.
pub fn simulate_counts_with<R: Rng + ?Sized>(
    rho_in: &DensityMatrix,
    povm: &Povm,
    photons: u64,
    eta: f64,
    rng: &mut R,
) -> Result<Vec<u64>> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::domain(format!(
            "transmittance must lie in [0, 1], got {eta}"
        )));
    }
    let n_eff = effective_photons(photons, eta);
    Ok(expected_counts(rho_in, povm, n_eff)
        .into_iter()
        .map(|n| poisson_sample(n as f64, rng))
        .collect())
}

pub fn simulate_counts(
    rho_in: &DensityMatrix,
    povm: &Povm,
    photons: u64,
    eta: f64,
    seed: u64,
) -> Result<Vec<u64>> {
    simulate_counts_with(rho_in, povm, photons, eta, &mut rng::rng_for(seed, &[]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReconstructOptions {
    pub restarts: usize,
    /// Relative cost-spread tolerance of the simplex.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            restarts: 5,
            tol: 1e-9,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub rho: DensityMatrix,
    /// Least-squares cost in counts squared.
    pub cost: f64,
    pub converged: bool,
    /// All counts were zero; `rho` is the maximally mixed fallback.
    pub degenerate: bool,
}

/// Least-squares fit returning the best restart even when none converged.
pub fn reconstruct_best_effort<R: Rng + ?Sized>(
    counts: &[u64],
    povm: &Povm,
    n_eff: u64,
    opts: &ReconstructOptions,
    rng: &mut R,
) -> Result<Reconstruction> {
    if counts.len() != povm.len() {
        return Err(Error::domain(format!(
            "{} counts for a {}-outcome POVM",
            counts.len(),
            povm.len()
        )));
    }
    if counts.iter().all(|&m| m == 0) {
        return Ok(Reconstruction {
            rho: DensityMatrix::maximally_mixed(),
            cost: 0.0,
            converged: true,
            degenerate: true,
        });
    }
    if n_eff == 0 {
        return Err(Error::domain("effective photon number must be >= 1"));
    }
    if opts.restarts == 0 {
        return Err(Error::domain("need at least one restart"));
    }

    let scale = n_eff as f64;
    let freqs: Vec<f64> = counts.iter().map(|&m| m as f64 / scale).collect();
    // Effects as (1 + s.r)/4 would be faster, but the generic trace keeps
    // the cost valid for any POVM.
    let effects = povm.effects();
    let cost = |t: &[f64]| -> f64 {
        let [t1, t2, t3, t4] = [t[0], t[1], t[2], t[3]];
        let norm2 = t1 * t1 + t2 * t2 + t3 * t3 + t4 * t4;
        if !(norm2 > 1e-30) {
            return f64::MAX;
        }
        let (a, d) = cholesky_diagonal(t1, t2, t3, t4, norm2);
        let off = c(t3 * t2, -t4 * t2) / norm2;
        let rho = Mat2([[c(a, 0.0), off], [off.conj(), c(d, 0.0)]]);
        effects
            .iter()
            .zip(&freqs)
            .map(|(m, f)| ((*m * rho).trace().re - f).powi(2))
            .sum()
    };
    let simplex = SimplexOptions {
        rel_tol: opts.tol,
        abs_floor: 1e-18,
        max_iter: opts.max_iter,
        initial_step: 0.25,
    };

    let mut best: Option<optim::SimplexResult> = None;
    for _ in 0..opts.restarts {
        let x0: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let r = optim::nelder_mead(cost, &x0, &simplex);
        let better = match &best {
            None => true,
            Some(b) => {
                (r.converged && !b.converged) || (r.converged == b.converged && r.cost < b.cost)
            }
        };
        if better {
            best = Some(r);
        }
    }
    let best = best.expect("restarts >= 1");
    let t = CholeskyParams([best.x[0], best.x[1], best.x[2], best.x[3]]);
    Ok(Reconstruction {
        rho: cholesky_to_rho(&t)?,
        cost: best.cost * scale * scale,
        converged: best.converged,
        degenerate: false,
    })
}

/// Least-squares reconstruction; fails if no restart converged.
pub fn reconstruct<R: Rng + ?Sized>(
    counts: &[u64],
    povm: &Povm,
    n_eff: u64,
    opts: &ReconstructOptions,
    rng: &mut R,
) -> Result<Reconstruction> {
    let r = reconstruct_best_effort(counts, povm, n_eff, opts, rng)?;
    if r.converged {
        Ok(r)
    } else {
        Err(Error::OptimizationFailed {
            restarts: opts.restarts,
            best_cost: r.cost,
        })
    }
}

/// Uhlmann-Jozsa fidelity via the qubit closed form
/// `tr(rho sigma) + 2 sqrt(det rho det sigma)`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let overlap = (rho.0 * sigma.0).trace().re;
    let dets = rho.0.det().re * sigma.0.det().re;
    (overlap + 2.0 * dets.max(0.0).sqrt()).clamp(0.0, 1.0)
}

/// Uhlmann-Jozsa fidelity from its definition `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn fidelity_by_definition(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let s = rho.0.psd_sqrt()?;
    let inner = s * sigma.0 * s;
    let root = inner.psd_sqrt()?;
    Ok(root.trace().re.powi(2).clamp(0.0, 1.0))
}

pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let [a, b] = (rho.0 - sigma.0).hermitian_eigenvalues();
    0.5 * (a.abs() + b.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateEnsemble {
    /// Haar-random pure states.
    #[default]
    HaarPure,
    /// Bures-random mixed states.
    BuresMixed,
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn haar_unitary<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [a, b, cc, d] = q.map(|x| x / n);
    let su2 = Mat2([[c(a, b), c(cc, d)], [c(-cc, d), c(a, -b)]]);
    let phase = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    su2.scale(phase)
}

pub fn random_state<R: Rng + ?Sized>(kind: StateEnsemble, rng: &mut R) -> Result<DensityMatrix> {
    match kind {
        StateEnsemble::HaarPure => DensityMatrix::pure([complex_normal(rng), complex_normal(rng)]),
        StateEnsemble::BuresMixed => {
            let g = Mat2([
                [complex_normal(rng), complex_normal(rng)],
                [complex_normal(rng), complex_normal(rng)],
            ]);
            let a = (Mat2::identity() + haar_unitary(rng)) * g;
            let m = a * a.adjoint();
            let tr = m.trace().re;
            let mut rho = m.scale(c(1.0 / tr, 0.0));
            rho.0[1][0] = rho.0[0][1].conj();
            rho.0[0][0].im = 0.0;
            rho.0[1][1] = c(1.0 - rho.0[0][0].re, 0.0);
            DensityMatrix::new(rho)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TomographyConfig {
    pub photons: u64,
    pub transmittance: f64,
    pub ensemble_size: usize,
    pub seed: u64,
    pub optimizer: ReconstructOptions,
    pub states: StateEnsemble,
    /// Poisson shot noise on the counts; when off, counts are the rounded
    /// Born-rule expectations.
    pub shot_noise: bool,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        TomographyConfig {
            photons: 200_000,
            transmittance: 1.0,
            ensemble_size: 220,
            seed: 0,
            optimizer: ReconstructOptions::default(),
            states: StateEnsemble::HaarPure,
            shot_noise: true,
        }
    }
}

impl TomographyConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.photons < 1 {
            bad.push("photons must be >= 1".to_string());
        }
        if !(0.0..=1.0).contains(&self.transmittance) {
            bad.push(format!(
                "transmittance must lie in [0, 1], got {}",
                self.transmittance
            ));
        }
        if self.ensemble_size < 1 {
            bad.push("ensemble_size must be >= 1".to_string());
        }
        if self.optimizer.restarts < 1 || self.optimizer.max_iter < 1 || !(self.optimizer.tol > 0.0)
        {
            bad.push("optimizer needs restarts >= 1, max_iter >= 1, tol > 0".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::domain(bad.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyResult {
    pub fidelities: Vec<f64>,
    pub mean_fidelity: f64,
    pub sd_fidelity: f64,
    /// Members whose reconstruction did not converge (best restart used).
    pub failures: usize,
    /// Members with no detected photons (maximally mixed fallback).
    pub degenerate: usize,
}

impl TomographyResult {
    fn from_members(members: Vec<(f64, bool, bool)>) -> Self {
        let fidelities: Vec<f64> = members.iter().map(|m| m.0).collect();
        let n = fidelities.len() as f64;
        let mean = fidelities.iter().sum::<f64>() / n;
        let sd = if fidelities.len() > 1 {
            (fidelities.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        TomographyResult {
            mean_fidelity: mean,
            sd_fidelity: sd,
            failures: members.iter().filter(|m| !m.1).count(),
            degenerate: members.iter().filter(|m| m.2).count(),
            fidelities,
        }
    }
}

/// Input state of ensemble member `member`; identical across grid cells.
pub fn ensemble_state(config: &TomographyConfig, member: usize) -> Result<DensityMatrix> {
    random_state(
        config.states,
        &mut rng::rng_for(config.seed, &[STATE_STREAM, member as u64]),
    )
}

fn run_members<F>(
    config: &TomographyConfig,
    povm: &Povm,
    cell: &[u64],
    eta_for: F,
) -> Result<TomographyResult>
where
    F: Fn(&mut SimRng) -> Result<f64> + Sync,
{
    config.validate()?;
    let members = (0..config.ensemble_size)
        .into_par_iter()
        .map(|m| {
            let rho_in = ensemble_state(config, m)?;
            let mut path = cell.to_vec();
            path.push(m as u64);
            let mut noise = rng::rng_for(config.seed, &path);
            let eta = eta_for(&mut noise)?;
            let n_eff = effective_photons(config.photons, eta);
            let counts = if config.shot_noise {
                simulate_counts_with(&rho_in, povm, config.photons, eta, &mut noise)?
            } else {
                expected_counts(&rho_in, povm, n_eff)
            };
            let rec = reconstruct_best_effort(
                &counts,
                povm,
                n_eff.max(1),
                &config.optimizer,
                &mut noise,
            )?;
            Ok((fidelity(&rho_in, &rec.rho), rec.converged, rec.degenerate))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TomographyResult::from_members(members))
}

/// Tomography of `ensemble_size` random inputs at a fixed transmittance.
pub fn run_ensemble(config: &TomographyConfig, povm: &Povm) -> Result<TomographyResult> {
    let eta = config.transmittance;
    run_members(config, povm, &[], |_| Ok(eta))
}

/// When the turbulence factor is redrawn during a pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingDraw {
    /// A fresh draw for every tomography trial.
    #[default]
    PerTrial,
    /// One draw per zenith angle, shared by the whole ensemble.
    PerZenith,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityRow {
    pub zenith_deg: f64,
    pub diameter_m: f64,
    pub photons: u64,
    pub mean_fidelity: f64,
    pub sd_fidelity: f64,
    pub failures: usize,
    pub degenerate: usize,
    /// Transmittance with `I = 1`.
    pub eta_deterministic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityTable {
    pub altitude_m: f64,
    pub rows: Vec<FidelityRow>,
}

/// Mean and SD of the reconstruction fidelity over a pass, per diameter and
/// zenith angle, with the transmittance supplied by the link budget.
pub fn fidelity_vs_zenith(
    channel: &ChannelParams,
    base: &LinkGeometry,
    diameters_m: &[f64],
    zenith_grid_rad: &[f64],
    config: &TomographyConfig,
    draw: FadingDraw,
) -> Result<FidelityTable> {
    config.validate()?;
    base.validate()?;
    let povm = sic_povm_qubit();
    let cells: Vec<(usize, usize)> = (0..diameters_m.len())
        .flat_map(|d| (0..zenith_grid_rad.len()).map(move |z| (d, z)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(d, z)| {
            let params = channel.with_diameter(diameters_m[d]);
            let geom = base.with_zenith(zenith_grid_rad[z]);
            let det = budget::compose(&params, &geom, 1.0)?;
            let fading = budget::scintillation_at(&params, &geom)?.fading();
            let deterministic = params.fluctuation_mode == FluctuationMode::Deterministic;
            let shared = fading.draw(&mut rng::rng_for(
                config.seed,
                &[PER_ZENITH_STREAM, d as u64, z as u64],
            ));
            let eta_of = |i: f64| {
                TransmittanceBreakdown::from_factors(det.eta_int, det.eta_atm, det.eta_d, i)
                    .eta_total
                    .min(1.0)
            };
            let result = run_members(config, &povm, &[d as u64, z as u64], |rng| {
                Ok(match (deterministic, draw) {
                    (true, _) => det.eta_total,
                    (false, FadingDraw::PerZenith) => eta_of(shared),
                    (false, FadingDraw::PerTrial) => eta_of(fading.draw(rng)),
                })
            })?;
            Ok(FidelityRow {
                zenith_deg: zenith_grid_rad[z].to_degrees(),
                diameter_m: diameters_m[d],
                photons: config.photons,
                mean_fidelity: result.mean_fidelity,
                sd_fidelity: result.sd_fidelity,
                failures: result.failures,
                degenerate: result.degenerate,
                eta_deterministic: det.eta_total,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelityTable {
        altitude_m: base.satellite_altitude_m,
        rows,
    })
}
