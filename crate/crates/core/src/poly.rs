//! Power-series polynomials: Horner evaluation and (weighted) least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Evaluates `Σ c[k]·x^k` with Horner's scheme.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Least-squares polynomial fit of order `order` with optional nonnegative
/// row weights, returning power-series coefficients in the original abscissa.
///
/// The abscissa is scaled to `[-1, 1]` before the Vandermonde system is
/// solved by SVD, then the coefficients are mapped back.
pub fn fit_weighted(x: &[f64], y: &[f64], weights: Option<&[f64]>, order: usize) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(Error::Data(format!(
            "abscissa/ordinate length mismatch ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if let Some(w) = weights {
        if w.len() != x.len() || w.iter().any(|&wi| !(wi >= 0.0) || !wi.is_finite()) {
            return Err(Error::Data("weights must be finite, nonnegative and aligned".into()));
        }
    }
    let cols = order + 1;
    if x.len() < cols {
        return Err(Error::Data(format!(
            "order {order} needs at least {cols} points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite sample in polynomial fit".into()));
    }

    let scale = x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::Numerical("all abscissae are zero; system is rank deficient".into()));
    }

    let rows = x.len();
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = DVector::<f64>::zeros(rows);
    for i in 0..rows {
        let sw = weights.map_or(1.0, |w| w[i].sqrt());
        let t = x[i] / scale;
        let mut pow = sw;
        for k in 0..cols {
            a[(i, k)] = pow;
            pow *= t;
        }
        b[i] = sw * y[i];
    }

    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let tol = smax * 1e-13 * rows.max(cols) as f64;
    if smin <= tol {
        return Err(Error::Numerical(format!(
            "rank-deficient least-squares system for order {order} (condition ≥ {:.3e}); try a lower order",
            smax / smin.max(f64::MIN_POSITIVE)
        )));
    }
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Numerical(format!("least-squares solve failed: {e}")))?;

    let mut inv = 1.0;
    Ok(sol
        .iter()
        .map(|&c| {
            let v = c * inv;
            inv /= scale;
            v
        })
        .collect())
}

pub fn fit(x: &[f64], y: &[f64], order: usize) -> Result<Vec<f64>> {
    fit_weighted(x, y, None, order)
}

/// Root-mean-square residual of `coeffs` against samples.
pub fn rms_residual(coeffs: &[f64], x: &[f64], y: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - horner(coeffs, xi);
            r * r
        })
        .sum();
    (ss / x.len() as f64).sqrt()
}
