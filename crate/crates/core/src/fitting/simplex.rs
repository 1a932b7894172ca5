//! Derivative-free Nelder–Mead minimization.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Convergence threshold on the simplex diameter (∞-norm from the best vertex).
    pub tol_x: f64,
    /// Convergence threshold on the spread of objective values.
    pub tol_f: f64,
    pub max_iter: usize,
    /// Relative size of the initial simplex edges.
    pub initial_step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            tol_x: 1e-10,
            tol_f: 1e-10,
            max_iter: 2000,
            initial_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// False when `max_iter` ran out before the tolerances were met.
    pub converged: bool,
}

/// Minimizes `objective` starting from `start`.
///
/// Non-finite objective values away from the start are treated as `+∞`,
/// which keeps the simplex out of invalid regions.
pub fn minimize_simplex(
    objective: impl Fn(&[f64]) -> f64,
    start: &[f64],
    options: &SimplexOptions,
) -> Result<SimplexResult> {
    let n = start.len();
    if n == 0 {
        return Err(Error::InvalidParams("simplex needs at least one dimension".into()));
    }
    let f0 = objective(start);
    if !f0.is_finite() {
        return Err(Error::Domain {
            what: "minimize_simplex",
            value: f0,
            reason: "objective is not finite at the start point",
        });
    }
    let eval = |x: &[f64]| {
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
    verts.push(start.to_vec());
    vals.push(f0);
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] = if v[i] != 0.0 {
            v[i] * (1.0 + options.initial_step)
        } else {
            options.initial_step * 5e-3
        };
        vals.push(eval(&v));
        verts.push(v);
    }

    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let mut order: Vec<usize> = (0..=n).collect();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iter {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let diameter = verts
            .iter()
            .flat_map(|v| v.iter().zip(&verts[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        let spread = vals.iter().map(|&f| (f - vals[best]).abs()).fold(0.0f64, f64::max);
        if diameter <= options.tol_x && spread <= options.tol_f {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&verts[i]) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&verts[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(REFLECT);
        let fr = eval(&xr);
        if fr < vals[best] {
            let xe = along(REFLECT * EXPAND);
            let fe = eval(&xe);
            if fe < fr {
                verts[worst] = xe;
                vals[worst] = fe;
            } else {
                verts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second_worst] {
            verts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        // contraction, outside if the reflection helped at all
        let (xc, fc) = if fr < vals[worst] {
            let xc = along(REFLECT * CONTRACT);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-CONTRACT);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < vals[worst].min(fr) {
            verts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        let anchor = verts[best].clone();
        for &i in &order[1..] {
            let v: Vec<f64> = verts[i]
                .iter()
                .zip(&anchor)
                .map(|(x, a)| a + SHRINK * (x - a))
                .collect();
            vals[i] = eval(&v);
            verts[i] = v;
        }
    }

    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    Ok(SimplexResult {
        x: verts.swap_remove(best),
        value: vals[best],
        iterations,
        converged,
    })
}
