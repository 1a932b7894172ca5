//! L2 curve fits of the Rapp and Ghorbani models with multi-start simplex
//! search.
//!
//! Parameters that enter a branch linearly (the Rapp AM-PM scale `A`, the
//! Ghorbani `y1, y4` / `z1, z4`) are eliminated by an inner linear least
//! squares solve, so the simplex only searches the nonlinear shape
//! parameters. Positive parameters are searched in log space.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{minimize_simplex, rms, AmplitudeUnits, FitReport, MeasurementCurve, SimplexOptions};
use crate::error::{Error, Result};
use crate::pa::{GhorbaniParams, ModelParams, PaModel, RappParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Starts per branch; start 0 is the unjittered initial guess.
    pub restarts: usize,
    pub seed: u64,
    /// Standard deviation of the log-space jitter applied to later starts.
    pub jitter: f64,
    pub simplex: SimplexOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            seed: 0x05EE_DF17,
            jitter: 0.35,
            simplex: SimplexOptions::default(),
        }
    }
}

struct BranchFit {
    x: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
    best_restart: usize,
}

/// Runs the simplex from `start` and from jittered copies of it; the lowest
/// objective wins and ties keep the earlier start.
fn multi_start(objective: impl Fn(&[f64]) -> f64, start: &[f64], opts: &FitOptions, stream: u64) -> Result<BranchFit> {
    let restarts = opts.restarts.max(1);
    let normal = Normal::new(0.0, opts.jitter).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let mut best: Option<BranchFit> = None;
    let mut total_iter = 0;
    for k in 0..restarts {
        let x0: Vec<f64> = if k == 0 {
            start.to_vec()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(stream * 1024 + k as u64);
            start.iter().map(|&s| s + normal.sample(&mut rng)).collect()
        };
        if !objective(&x0).is_finite() {
            continue;
        }
        let r = minimize_simplex(&objective, &x0, &opts.simplex)?;
        total_iter += r.iterations;
        if best.as_ref().is_none_or(|b| r.value < b.value) {
            best = Some(BranchFit {
                x: r.x,
                value: r.value,
                iterations: 0,
                converged: r.converged,
                best_restart: k,
            });
        }
    }
    let mut best = best.ok_or_else(|| Error::Numerical("objective not finite at any start".into()))?;
    best.iterations = total_iter;
    Ok(best)
}

/// Minimum-norm least squares `y ≈ Σ c_j·col_j`; returns coefficients and
/// the residual sum of squares.
fn linear_ls(columns: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let rows = y.len();
    let a = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i]);
    if a.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let eps = svd.singular_values.max() * 1e-12;
    let c = svd.solve(&b, eps).ok()?;
    let ss = (a * &c - b).norm_squared();
    Some((c.iter().copied().collect(), ss))
}

/// Fits the Rapp AM-AM branch `(G, V_sat, p)` and AM-PM branch
/// `(A, B, q1, q2)` by minimizing the L2 distance to the curve in the volt
/// and degree domains.
pub fn fit_rapp(curve: &MeasurementCurve, opts: &FitOptions) -> Result<(RappParams, FitReport)> {
    let x = curve.input_volts();
    let d = curve.output_volts();
    let phi = curve.phase_deg();
    if x.len() < 4 {
        return Err(Error::Data("Rapp fit needs at least 4 points".into()));
    }

    let low = x.len().min(5);
    let g0 = x.iter().zip(&d).take(low).map(|(xi, di)| di / xi).sum::<f64>() / low as f64;
    let vsat0 = d.iter().copied().fold(0.0, f64::max);
    if !(g0 > 0.0) || !(vsat0 > 0.0) {
        return Err(Error::Data("curve has no positive small-signal gain".into()));
    }
    let amp_obj = |t: &[f64]| -> f64 {
        let p = RappParams {
            g_lin: t[0].exp(),
            v_sat: t[1].exp(),
            p: t[2].exp(),
            ..RappParams::reference_315ghz()
        };
        x.iter().zip(&d).map(|(&xi, &di)| (di - p.amplitude_unchecked(xi)).powi(2)).sum()
    };
    let amp = multi_start(amp_obj, &[g0.ln(), vsat0.ln(), 0.0], opts, 0)?;

    let phase_basis = |t: &[f64]| -> Vec<f64> {
        let (b, q1, q2) = (t[0].exp(), t[1].exp(), t[2].exp());
        x.iter().map(|&xi| xi.powf(q1) / (1.0 + (xi / b).powf(q2))).collect()
    };
    let phase_obj = |t: &[f64]| -> f64 {
        linear_ls(&[phase_basis(t)], &phi).map_or(f64::INFINITY, |(_, ss)| ss)
    };
    let ext = phi
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(x.len() - 1);
    let ph = multi_start(phase_obj, &[x[ext].ln(), 1.5f64.ln(), 1.5f64.ln()], opts, 1)?;
    let a_pm = linear_ls(&[phase_basis(&ph.x)], &phi)
        .map(|(c, _)| c[0])
        .ok_or_else(|| Error::Numerical("AM-PM scale solve failed".into()))?;

    let params = RappParams {
        g_lin: amp.x[0].exp(),
        v_sat: amp.x[1].exp(),
        p: amp.x[2].exp(),
        a_pm,
        b_pm: ph.x[0].exp(),
        q1: ph.x[1].exp(),
        q2: ph.x[2].exp(),
    };
    params.validate()?;
    let report = FitReport {
        model: PaModel::new(curve.fc_hz, ModelParams::Rapp(params))?,
        residual_amplitude: rms(x.iter().zip(&d).map(|(&xi, &di)| di - params.amplitude_unchecked(xi))),
        residual_phase: rms(x.iter().zip(&phi).map(|(&xi, &pi)| pi - params.phase_unchecked(xi))),
        amplitude_units: AmplitudeUnits::Volt,
        iterations: amp.iterations + ph.iterations,
        converged: amp.converged && ph.converged,
        restarts: opts.restarts.max(1),
        best_restart: [amp.best_restart, ph.best_restart],
        seed: opts.seed,
    };
    debug_assert!(amp.value.is_finite() && ph.value.is_finite());
    Ok((params, report))
}

/// One Ghorbani branch `c1·x^{c2}/(1 + c3·x^{c2}) + c4·x`; `c2` and `c3` are
/// searched in log space, `c1` and `c4` solved linearly.
fn fit_ghorbani_branch(x: &[f64], y: &[f64], knee: f64, opts: &FitOptions, stream: u64) -> Result<([f64; 4], BranchFit)> {
    let columns = |t: &[f64]| -> [Vec<f64>; 2] {
        let (c2, c3) = (t[0].exp(), t[1].exp());
        let f = x
            .iter()
            .map(|&xi| {
                let u = xi.powf(c2);
                u / (1.0 + c3 * u)
            })
            .collect();
        [f, x.to_vec()]
    };
    let objective = |t: &[f64]| -> f64 { linear_ls(&columns(t), y).map_or(f64::INFINITY, |(_, ss)| ss) };
    let c2_0 = 1.5f64;
    let c3_0 = knee.powf(-c2_0);
    let fit = multi_start(objective, &[c2_0.ln(), c3_0.ln()], opts, stream)?;
    let (lin, _) = linear_ls(&columns(&fit.x), y).ok_or_else(|| Error::Numerical("Ghorbani linear solve failed".into()))?;
    Ok(([lin[0], fit.x[0].exp(), fit.x[1].exp(), lin[1]], fit))
}

/// Fits both Ghorbani branches. The problem is underdetermined, so only the
/// residual (not the parameter vector) is meaningful to compare.
pub fn fit_ghorbani(curve: &MeasurementCurve, opts: &FitOptions) -> Result<(GhorbaniParams, FitReport)> {
    let x = curve.input_volts();
    let d = curve.output_volts();
    let phi = curve.phase_deg();
    if x.len() < 5 {
        return Err(Error::Data("Ghorbani fit needs at least 5 points".into()));
    }
    let low = x.len().min(5);
    let g0 = x.iter().zip(&d).take(low).map(|(xi, di)| di / xi).sum::<f64>() / low as f64;
    let vmax = d.iter().copied().fold(0.0, f64::max);
    let knee = if g0 > 0.0 && vmax > 0.0 { vmax / g0 } else { x[x.len() / 2] };

    let (y, fa) = fit_ghorbani_branch(&x, &d, knee, opts, 0)?;
    let (z, fp) = fit_ghorbani_branch(&x, &phi, knee, opts, 1)?;
    let params = GhorbaniParams { y, z };
    let report = FitReport {
        model: PaModel::new(curve.fc_hz, ModelParams::Ghorbani(params))?,
        residual_amplitude: rms(x.iter().zip(&d).map(|(&xi, &di)| di - GhorbaniParams::eval_branch(&y, xi))),
        residual_phase: rms(x.iter().zip(&phi).map(|(&xi, &pi)| pi - GhorbaniParams::eval_branch(&z, xi))),
        amplitude_units: AmplitudeUnits::Volt,
        iterations: fa.iterations + fp.iterations,
        converged: fa.converged && fp.converged,
        restarts: opts.restarts.max(1),
        best_restart: [fa.best_restart, fp.best_restart],
        seed: opts.seed,
    };
    Ok((params, report))
}
