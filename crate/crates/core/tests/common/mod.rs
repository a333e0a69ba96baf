//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use downlink::geometry::LinkGeometry;
use downlink::qst::{DensityMatrix, Mat2};
use downlink::turbulence::TurbulenceProfile;
use nalgebra::{Complex, Matrix2};

/// Composite Simpson rule on `n` (even) uniform panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let v = f(a + h * i as f64);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// Hufnagel-Valley profile written out from scratch.
pub fn hv_cn2(p: &TurbulenceProfile, h: f64) -> f64 {
    let v = p.v_rms;
    8.148e-56 * v * v * (h / 1000.0).powi(10) * 1e30 * (-h / 1000.0).exp()
        + 2.7e-16 * (-h / 1500.0).exp()
        + p.c0 * (-p.h_ogs_m / 700.0).exp() * (-(h - p.h_ogs_m) / 100.0).exp()
}

/// `int C_n^2(z) (z - H_OGS)^power dz` up to `min(H, 100 km)` by brute force:
/// substitute `z - H_OGS = t^6` and apply a uniform Simpson rule with 10^6 panels.
pub fn brute_weighted_cn2(p: &TurbulenceProfile, altitude_m: f64, power: f64) -> f64 {
    let top = altitude_m.min(1e5) - p.h_ogs_m;
    let tmax = top.powf(1.0 / 6.0);
    simpson(
        |t| {
            let x = t.powi(6);
            hv_cn2(p, p.h_ogs_m + x) * x.powf(power) * 6.0 * t.powi(5)
        },
        0.0,
        tmax,
        1_000_000,
    )
}

/// Slant range by bisection on the line-of-sight parameter until the ray
/// reaches the satellite shell.
pub fn slant_range_bisection(g: &LinkGeometry) -> f64 {
    let r0 = g.earth_radius_m + g.ogs_altitude_m;
    let rs = g.earth_radius_m + g.satellite_altitude_m;
    let (s, c) = g.zenith_angle_rad.sin_cos();
    let radius = |t: f64| ((t * s).powi(2) + (r0 + t * c).powi(2)).sqrt();
    let (mut lo, mut hi) = (0.0, 2.0 * rs);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if radius(mid) < rs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Pass durations by stepping a circular orbit over the station in time and
/// recording when the zenith angle reaches `limit` (radians).
pub fn pass_time_by_stepping(altitude_m: f64, limit: f64, r_e: f64, mu: f64, dt: f64) -> f64 {
    let r = r_e + altitude_m;
    let omega = (mu / r.powi(3)).sqrt();
    let mut t = 0.0;
    // station at (0, r_e); satellite starts overhead and moves forward
    loop {
        let a = omega * t;
        let (x, y) = (r * a.sin(), r * a.cos() - r_e);
        let zenith = x.atan2(y);
        if zenith >= limit {
            return 2.0 * t;
        }
        t += dt;
    }
}

pub fn to_na(m: &Mat2) -> Matrix2<Complex<f64>> {
    let e = m.0;
    Matrix2::new(e[0][0], e[0][1], e[1][0], e[1][1])
}

fn na_sqrt(m: &Matrix2<Complex<f64>>) -> Matrix2<Complex<f64>> {
    let eig = m.symmetric_eigen();
    let d = eig
        .eigenvalues
        .map(|l| Complex::new(l.max(0.0).sqrt(), 0.0));
    let u = eig.eigenvectors;
    u * Matrix2::from_diagonal(&d) * u.adjoint()
}

/// Uhlmann fidelity via eigendecomposition square roots.
pub fn fidelity_oracle(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let sr = na_sqrt(&to_na(rho.matrix()));
    let inner = sr * to_na(sigma.matrix()) * sr;
    let inner = (inner + inner.adjoint()) * Complex::new(0.5, 0.0);
    na_sqrt(&inner).trace().re.powi(2)
}

pub fn min_eigenvalue(m: &Mat2) -> f64 {
    let na = to_na(m);
    na.symmetric_eigen().eigenvalues.min()
}

/// `int_0^inf p(I) dI` with `u = ln I`.
pub fn lognormal_pdf_mass(pdf: impl Fn(f64) -> f64, sigma2: f64) -> f64 {
    let s = sigma2.sqrt();
    let c = -0.5 * sigma2;
    simpson(
        |u| pdf(u.exp()) * u.exp(),
        c - 14.0 * s,
        c + 14.0 * s,
        200_000,
    )
}
