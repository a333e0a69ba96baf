//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Relative tolerance used by the physics modules.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

const INITIAL_PANELS: usize = 64;
const MAX_DEPTH: u32 = 48;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// The interval is first cut into a fixed number of panels to get a scale
/// estimate and to catch narrow features; each panel is then refined
/// adaptively with Richardson extrapolation. Non-finite samples and panels
/// that hit the depth limit without meeting tolerance are reported as errors.
pub fn integrate<F>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, rel_tol).map(|v| -v);
    }

    let h = (b - a) / INITIAL_PANELS as f64;
    let mut panels = Vec::with_capacity(INITIAL_PANELS);
    let mut fa = f(a);
    let mut estimate = 0.0;
    let mut scale = 0.0;
    for i in 0..INITIAL_PANELS {
        let pa = a + h * i as f64;
        let pb = if i + 1 == INITIAL_PANELS { b } else { pa + h };
        let fm = f(0.5 * (pa + pb));
        let fb = f(pb);
        let whole = simpson(pa, pb, fa, fm, fb);
        estimate += whole;
        scale += simpson(pa, pb, fa.abs(), fm.abs(), fb.abs());
        panels.push(Panel {
            a: pa,
            b: pb,
            fa,
            fm,
            fb,
            whole,
        });
        fa = fb;
    }
    if !estimate.is_finite() {
        return Err(Error::Quadrature("integrand is not finite".into()));
    }
    if scale == 0.0 {
        return Ok(0.0);
    }

    let abs_tol = rel_tol * scale;
    let panel_tol = abs_tol / INITIAL_PANELS as f64;
    let mut total = 0.0;
    for p in panels {
        total += refine(&f, &p, panel_tol, MAX_DEPTH)?;
    }
    Ok(total)
}

fn refine<F>(f: &F, p: &Panel, tol: f64, depth: u32) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (p.a + p.b);
    let flm = f(0.5 * (p.a + m));
    let frm = f(0.5 * (m + p.b));
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let both = left + right;
    let delta = both - p.whole;
    if !delta.is_finite() {
        return Err(Error::Quadrature(format!(
            "non-finite integrand on [{}, {}]",
            p.a, p.b
        )));
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(both + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!(
            "depth limit reached on [{}, {}] (error estimate {:.3e})",
            p.a,
            p.b,
            delta.abs() / 15.0
        )));
    }
    let lp = Panel {
        a: p.a,
        b: m,
        fa: p.fa,
        fm: flm,
        fb: p.fm,
        whole: left,
    };
    let rp = Panel {
        a: m,
        b: p.b,
        fa: p.fm,
        fm: frm,
        fb: p.fb,
        whole: right,
    };
    Ok(refine(f, &lp, 0.5 * tol, depth - 1)? + refine(f, &rp, 0.5 * tol, depth - 1)?)
}

/// Sums the integrals over consecutive breakpoints. Useful when the integrand
/// has features at known locations.
pub fn integrate_pieces<F>(f: F, breaks: &[f64], rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    breaks
        .windows(2)
        .try_fold(0.0, |acc, w| Ok(acc + integrate(&f, w[0], w[1], rel_tol)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 3.0, 1e-12).unwrap();
        assert!((v - (81.0 / 4.0 - 9.0)).abs() < 1e-12);
    }

    #[test]
    fn endpoint_power_singularity() {
        // d/dx of x^(5/6) is unbounded at 0
        let v = integrate(|x: f64| x.powf(5.0 / 6.0), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 6.0 / 11.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn narrow_peak() {
        let v = integrate(|x: f64| (-(x - 0.3).powi(2) / 1e-6).exp(), 0.0, 1.0, 1e-10).unwrap();
        let exact = (std::f64::consts::PI * 1e-6).sqrt();
        assert!(((v - exact) / exact).abs() < 1e-8);
    }

    #[test]
    fn reversed_and_empty_intervals() {
        assert_eq!(integrate(|x| x, 2.0, 2.0, 1e-8).unwrap(), 0.0);
        let v = integrate(|x| x, 1.0, 0.0, 1e-8).unwrap();
        assert!((v + 0.5).abs() < 1e-12);
    }

    #[test]
    fn nan_integrand_is_an_error() {
        assert!(integrate(|_| f64::NAN, 0.0, 1.0, 1e-8).is_err());
    }
}
