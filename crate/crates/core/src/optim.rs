//! Nelder-Mead simplex minimisation.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Stop when the spread of cost values across the simplex falls below
    /// `rel_tol * (|f_best| + abs_floor)`.
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub max_iter: usize,
    /// Edge length of the initial simplex along each axis.
    pub initial_step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            rel_tol: 1e-9,
            abs_floor: 1e-15,
            max_iter: 10_000,
            initial_step: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimises `f` starting from `x0`.
pub fn nelder_mead<F>(f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();

    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        // order best..worst
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = idx.iter().map(|&i| pts[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();

        let spread = vals[n] - vals[0];
        if spread <= opts.rel_tol * (vals[0].abs() + opts.abs_floor) {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let along = |out: &mut Vec<f64>, coef: f64, from: &[f64]| {
            for j in 0..n {
                out[j] = centroid[j] + coef * (from[j] - centroid[j]);
            }
        };

        along(&mut trial, -REFLECT, &pts[n]);
        let fr = f(&trial);
        if fr < vals[0] {
            along(&mut trial2, -REFLECT * EXPAND, &pts[n]);
            let fe = f(&trial2);
            if fe < fr {
                pts[n].copy_from_slice(&trial2);
                vals[n] = fe;
            } else {
                pts[n].copy_from_slice(&trial);
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n].copy_from_slice(&trial);
            vals[n] = fr;
            continue;
        }
        // contraction, outside if the reflection beat the worst point
        let (coef, target) = if fr < vals[n] {
            (-CONTRACT, fr)
        } else {
            (CONTRACT, vals[n])
        };
        along(&mut trial2, coef, &pts[n]);
        let fc = f(&trial2);
        if fc < target {
            pts[n].copy_from_slice(&trial2);
            vals[n] = fc;
            continue;
        }
        let best = pts[0].clone();
        for i in 1..=n {
            for j in 0..n {
                pts[i][j] = best[j] + SHRINK * (pts[i][j] - best[j]);
            }
            vals[i] = f(&pts[i]);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .unwrap_or(0);
    SimplexResult {
        x: pts[best].clone(),
        cost: vals[best],
        iterations,
        converged,
    }
}
