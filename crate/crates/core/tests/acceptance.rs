//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use downlink::budget::{self, ChannelParams, FluctuationMode};
use downlink::extinction::{self, ExtinctionParams};
use downlink::fading::{self, FadingModel};
use downlink::geometry::{self, LinkGeometry, EARTH_MU, EARTH_RADIUS_M};
use downlink::qst::{self, CholeskyParams, DensityMatrix, FadingDraw, Mat2, TomographyConfig};
use downlink::rng;
use downlink::turbulence::{self, ApertureModel, TurbulenceProfile};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

const ZENITH_EXTINCTION_TOL: f64 = 1e-3;
const ZENITH_LOSS_DB: f64 = 0.143;
const ZENITH_LOSS_TOL_DB: f64 = 0.002;
const PASS_TIME_REL_TOL: f64 = 0.10;
const LEO_WINDOW_DB: (f64, f64) = (30.0, 45.0);
const MEO_WINDOW_DB: (f64, f64) = (65.0, 80.0);
const QUAD_REL_TOL: f64 = 1e-6;
const MOMENT_SIGMAS: f64 = 3.0;
const ROUND_TRIP_MEAN: f64 = 0.99;
const NOISELESS_MIN: f64 = 0.999;
const MATRIX_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const FIDELITY_TOL: f64 = 1e-10;
const PDF_MASS_TOL: f64 = 1e-6;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn station_geom(h: f64) -> LinkGeometry {
    LinkGeometry::new(h, 65.0, 0.0).expect("valid geometry")
}

fn c1_zenith_extinction() -> Outcome {
    let p = ExtinctionParams {
        alpha0_per_m: 5e-6,
        h0_m: 6600.0,
    };
    let mut worst = String::new();
    for h in [30e3, 420e3, 20_200e3] {
        let eta = extinction::zenith_transmittance(&p, h).map_err(|e| e.to_string())?;
        let loss = budget::loss_db(eta);
        let ok = (eta - 0.9675).abs() <= ZENITH_EXTINCTION_TOL
            && (loss - ZENITH_LOSS_DB).abs() <= ZENITH_LOSS_TOL_DB;
        worst = format!("H={:.0} km eta={eta:.6} loss={loss:.4} dB", h / 1e3);
        if !ok {
            return Err(worst);
        }
    }
    Ok(worst)
}

fn c2_pass_times() -> Outcome {
    let p = geometry::pass_times(500e3, 80f64.to_radians(), EARTH_RADIUS_M, EARTH_MU)
        .map_err(|e| e.to_string())?;
    let msg = format!("total={:.1} s effective={:.1} s", p.total_s, p.effective_s);
    let ok = ((p.total_s - 700.0) / 700.0).abs() <= PASS_TIME_REL_TOL
        && ((p.effective_s - 450.0) / 450.0).abs() <= PASS_TIME_REL_TOL;
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn budget_window(h: f64, window: (f64, f64)) -> Outcome {
    let params = ChannelParams::default().with_mode(FluctuationMode::Deterministic);
    let geom = station_geom(h);
    let mut parts = Vec::new();
    let mut ok = true;
    for d in [0.25, 0.50, 0.75, 1.00] {
        let b = budget::compose(&params.with_diameter(d), &geom, 1.0).map_err(|e| e.to_string())?;
        ok &= b.loss_db >= window.0 && b.loss_db <= window.1;
        parts.push(format!("D={:.0}cm:{:.2}dB", d * 100.0, b.loss_db));
    }
    let msg = format!(
        "{} (window [{}, {}] dB)",
        parts.join(" "),
        window.0,
        window.1
    );
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c5_quadrature() -> Outcome {
    let mut r = rng::rng_for(5, &[]);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let profile = TurbulenceProfile {
            c0: r.random_range(1e-15..1e-13),
            v_rms: r.random_range(10.0..40.0),
            h_ogs_m: r.random_range(0.0..3000.0),
        };
        let h = r.random_range(300e3..36_000e3);
        let lambda = r.random_range(500e-9..2000e-9);
        let zeta: f64 = r.random_range(0.0..1.3);

        let k = 2.0 * std::f64::consts::PI / lambda;
        let brute_56 = common::brute_weighted_cn2(&profile, h, 5.0 / 6.0);
        let brute_rytov = 2.25 * k.powf(7.0 / 6.0) * (1.0 / zeta.cos()).powf(11.0 / 6.0) * brute_56;
        let rytov =
            turbulence::rytov_downlink(&profile, lambda, h, zeta).map_err(|e| e.to_string())?;
        worst = worst.max(((rytov - brute_rytov) / brute_rytov).abs());

        let brute_hs = (common::brute_weighted_cn2(&profile, h, 2.0) / brute_56).powf(6.0 / 7.0);
        let hs = turbulence::yura_scale_height(&profile, h).map_err(|e| e.to_string())?;
        worst = worst.max(((hs - brute_hs) / brute_hs).abs());
    }
    let msg = format!("max relative error {worst:.2e} over 5 configurations");
    if worst <= QUAD_REL_TOL {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c6_fading_moments() -> Outcome {
    let n = 1_000_000;
    let mut parts = Vec::new();
    let mut ok = true;
    for (i, s) in [0.04, 0.25, 1.0].into_iter().enumerate() {
        let model = FadingModel::new(s).map_err(|e| e.to_string())?;
        let xs = fading::sample(&model, 600 + i as u64, n).map_err(|e| e.to_string())?;
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        let v = s.exp_m1();
        // central fourth moment of a unit-mean log-normal
        let mu4 = (6.0 * s).exp() - 4.0 * (3.0 * s).exp() + 6.0 * s.exp() - 3.0;
        let se_mean = (v / nf).sqrt();
        let se_var = ((mu4 - v * v) / nf).sqrt();
        let zm = (mean - 1.0) / se_mean;
        let zv = (var - v) / se_var;
        ok &= zm.abs() <= MOMENT_SIGMAS && zv.abs() <= MOMENT_SIGMAS;
        parts.push(format!("s={s}: z_mean={zm:+.2} z_var={zv:+.2}"));
    }
    let msg = parts.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c7_aperture_ordering() -> Outcome {
    let diameters = [0.25, 0.50, 1.00];
    let grid = budget::zenith_grid(80.0, 1.0);
    let channel = ChannelParams::default();
    let model = ApertureModel::andrews();
    let leo = station_geom(budget::LEO_ALTITUDE_M);
    let meo = station_geom(budget::MEO_ALTITUDE_M);
    let lam = channel.beam.wavelength_m;
    let err = |e: downlink::Error| e.to_string();
    let av_leo = budget::av_vs_zenith(&model, &channel.turbulence, &leo, &diameters, &grid, lam)
        .map_err(err)?;
    let av_meo = budget::av_vs_zenith(&model, &channel.turbulence, &meo, &diameters, &grid, lam)
        .map_err(err)?;
    let mut av_viol = 0;
    for d in 0..diameters.len() {
        for z in 0..grid.len() {
            if av_leo.values[d][z] >= av_meo.values[d][z] {
                av_viol += 1;
            }
        }
    }
    let mut sd_viol = 0;
    let mut cells = 0;
    for base in [&leo, &meo] {
        let isi = budget::sweep_pass(
            &channel.with_mode(FluctuationMode::Isi),
            base,
            &diameters,
            &grid,
            10_000,
            7,
        )
        .map_err(err)?;
        let psi = budget::sweep_pass(
            &channel.with_mode(FluctuationMode::Psi),
            base,
            &diameters,
            &grid,
            10_000,
            7,
        )
        .map_err(err)?;
        for (a, b) in isi.series.iter().zip(&psi.series) {
            for (pa, pb) in a.points.iter().zip(&b.points) {
                cells += 1;
                if pb.sd_db > pa.sd_db {
                    sd_viol += 1;
                }
            }
        }
    }
    let msg = format!(
        "Av violations {av_viol}/{}; PSI>ISI SD violations {sd_viol}/{cells}",
        diameters.len() * grid.len()
    );
    if av_viol == 0 && sd_viol == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c8_round_trip() -> Outcome {
    let povm = qst::sic_povm_qubit();
    let cfg = TomographyConfig {
        photons: 1_000_000,
        transmittance: 1.0,
        ensemble_size: 50,
        seed: 8,
        ..Default::default()
    };
    let noisy = qst::run_ensemble(&cfg, &povm).map_err(|e| e.to_string())?;
    let clean = qst::run_ensemble(
        &TomographyConfig {
            shot_noise: false,
            ..cfg
        },
        &povm,
    )
    .map_err(|e| e.to_string())?;
    let clean_min = clean.fidelities.iter().copied().fold(1.0, f64::min);
    let msg = format!(
        "Poisson mean F={:.5}; noiseless mean F={:.6} (min {clean_min:.6})",
        noisy.mean_fidelity, clean.mean_fidelity
    );
    if noisy.mean_fidelity >= ROUND_TRIP_MEAN && clean.mean_fidelity >= NOISELESS_MIN {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c9_fidelity_trend() -> Outcome {
    let channel = ChannelParams::default();
    let cfg = TomographyConfig {
        photons: 200_000,
        ensemble_size: 50,
        seed: 9,
        ..Default::default()
    };
    let grid = [0.0, 80f64.to_radians()];
    let t = qst::fidelity_vs_zenith(
        &channel,
        &station_geom(budget::LEO_ALTITUDE_M),
        &[1.0],
        &grid,
        &cfg,
        FadingDraw::PerTrial,
    )
    .map_err(|e| e.to_string())?;
    let (a, b) = (&t.rows[0], &t.rows[1]);
    let pooled = (0.5 * (a.sd_fidelity.powi(2) + b.sd_fidelity.powi(2))).sqrt();
    let gap = a.mean_fidelity - b.mean_fidelity;
    let msg = format!(
        "F(0)={:.4}+-{:.4} F(80)={:.4}+-{:.4} gap={gap:.4} pooled SD={pooled:.4}",
        a.mean_fidelity, a.sd_fidelity, b.mean_fidelity, b.sd_fidelity
    );
    if gap > pooled {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c10_invariants() -> Outcome {
    let povm = qst::sic_povm_qubit();
    let e = povm.effects();
    let sum = e.iter().fold(Mat2::zero(), |acc, m| acc + *m);
    let completeness = (sum - Mat2::identity())
        .0
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let mut sic_spread: f64 = 0.0;
    let off = (e[0] * e[1]).trace().re;
    for j in 0..4 {
        for k in 0..4 {
            if j != k {
                sic_spread = sic_spread.max(((e[j] * e[k]).trace().re - off).abs());
            }
        }
    }
    if completeness > MATRIX_TOL || sic_spread > MATRIX_TOL {
        return Err(format!(
            "POVM completeness {completeness:.1e}, SIC spread {sic_spread:.1e}"
        ));
    }

    let mut r = rng::rng_for(10, &[]);
    let mut worst_dm: f64 = 0.0;
    for _ in 0..10_000 {
        let t = CholeskyParams(std::array::from_fn(|_| r.random_range(-1.0..1.0)));
        let rho = qst::cholesky_to_rho(&t).map_err(|e| e.to_string())?;
        let m = rho.matrix();
        let herm = (*m - m.adjoint())
            .0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let tr = (m.trace() - 1.0).norm();
        worst_dm = worst_dm.max(herm).max(tr);
        if common::min_eigenvalue(m) < -PSD_TOL {
            return Err("Cholesky state with a negative eigenvalue".into());
        }
    }
    if worst_dm > MATRIX_TOL {
        return Err(format!("density-matrix defect {worst_dm:.1e}"));
    }

    // mixed pairs: full rank, so the eigendecomposition oracle is well conditioned
    let mut worst_f: f64 = 0.0;
    for _ in 0..100 {
        let a =
            qst::random_state(qst::StateEnsemble::BuresMixed, &mut r).map_err(|e| e.to_string())?;
        let b =
            qst::random_state(qst::StateEnsemble::BuresMixed, &mut r).map_err(|e| e.to_string())?;
        let f = qst::fidelity(&a, &b);
        if !(0.0..=1.0).contains(&f) {
            return Err(format!("fidelity {f} outside [0, 1]"));
        }
        worst_f = worst_f
            .max((f - common::fidelity_oracle(&a, &b)).abs())
            .max((f - qst::fidelity(&b, &a)).abs())
            .max((qst::fidelity(&a, &a) - 1.0).abs());
    }
    // pure pairs: the overlap of the state vectors
    for _ in 0..100 {
        let psi: [Complex64; 2] = std::array::from_fn(|_| {
            Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))
        });
        let phi: [Complex64; 2] = std::array::from_fn(|_| {
            Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))
        });
        let norm = |v: &[Complex64; 2]| v[0].norm_sqr() + v[1].norm_sqr();
        let overlap = (psi[0].conj() * phi[0] + psi[1].conj() * phi[1]).norm_sqr()
            / (norm(&psi) * norm(&phi));
        let a = DensityMatrix::pure(psi).map_err(|e| e.to_string())?;
        let b = DensityMatrix::pure(phi).map_err(|e| e.to_string())?;
        worst_f = worst_f.max((qst::fidelity(&a, &b) - overlap).abs());
    }
    let orthogonal = qst::fidelity(
        &DensityMatrix::from_bloch([0.0, 0.0, 1.0]).map_err(|e| e.to_string())?,
        &DensityMatrix::from_bloch([0.0, 0.0, -1.0]).map_err(|e| e.to_string())?,
    );
    worst_f = worst_f.max(orthogonal);
    if worst_f > FIDELITY_TOL {
        return Err(format!("fidelity deviation {worst_f:.1e}"));
    }

    let mut worst_mass: f64 = 0.0;
    for s in [0.04, 0.25, 1.0] {
        let model = FadingModel::new(s).map_err(|e| e.to_string())?;
        let mass = common::lognormal_pdf_mass(|i| fading::pdf(&model, i).unwrap_or(f64::NAN), s);
        worst_mass = worst_mass.max((mass - 1.0).abs());
    }
    let msg = format!(
        "POVM {completeness:.1e}/{sic_spread:.1e}; DM defect {worst_dm:.1e}; fidelity {worst_f:.1e}; pdf mass {worst_mass:.1e}"
    );
    if worst_mass <= PDF_MASS_TOL {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("zenith extinction", c1_zenith_extinction),
        ("pass times", c2_pass_times),
        ("LEO budget window", || {
            budget_window(budget::LEO_ALTITUDE_M, LEO_WINDOW_DB)
        }),
        ("MEO budget window", || {
            budget_window(budget::MEO_ALTITUDE_M, MEO_WINDOW_DB)
        }),
        ("quadrature oracle", c5_quadrature),
        ("fading moments", c6_fading_moments),
        ("aperture averaging ordering", c7_aperture_ordering),
        ("tomography round trip", c8_round_trip),
        ("fidelity vs zenith trend", c9_fidelity_trend),
        ("invariant suites", c10_invariants),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {:>2} {name} [{secs:.1}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2} {name} [{secs:.1}s]: {detail}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
