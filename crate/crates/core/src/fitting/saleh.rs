//! Closed-form least-squares fit of Saleh's general form
//! `z(x) = α·x^n / (1 + β·x²)^ν`.
//!
//! With `w = (z/x^n)^{−1/ν}` the model becomes linear, `w = a + b·x²`
//! where `a = α^{−1/ν}` and `b = β·α^{−1/ν}`; the sums below are the
//! normal-equation solution of that line fit.

use super::{rms, AmplitudeUnits, FitReport, MeasurementCurve};
use crate::error::{Error, Result};
use crate::pa::{ModelParams, PaModel, SalehBranch, SalehParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SalehTarget {
    Amplitude,
    Phase,
}

/// Transformed ordinate `w_m` for one sample.
pub(crate) fn transformed(x: f64, z: f64, n: u32, nu: u32) -> Result<f64> {
    let ratio = z / x.powi(n as i32);
    if !ratio.is_finite() || ratio == 0.0 || (nu.is_multiple_of(2) && ratio < 0.0) {
        return Err(Error::Domain {
            what: "fit_saleh",
            value: ratio,
            reason: "z/x^n must be nonzero (and positive for even ν)",
        });
    }
    Ok(ratio.signum() * ratio.abs().powf(-1.0 / nu as f64))
}

/// Closed-form `(α, β)` for samples `(x_m, z_m)`.
pub fn fit_saleh_branch(x: &[f64], z: &[f64], n: u32, nu: u32) -> Result<SalehBranch> {
    if !(1..=3).contains(&n) || !(1..=2).contains(&nu) {
        return Err(Error::InvalidParams(format!("Saleh exponents n={n}, ν={nu} unsupported")));
    }
    if x.len() != z.len() || x.len() < 2 {
        return Err(Error::Data("Saleh fit needs at least two aligned samples".into()));
    }
    if let Some(&bad) = x.iter().find(|&&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain { what: "fit_saleh", value: bad, reason: "inputs must be positive" });
    }

    let count = x.len() as f64;
    let (mut s_x2, mut s_x4, mut s_w, mut s_wx2) = (0.0, 0.0, 0.0, 0.0);
    for (&xm, &zm) in x.iter().zip(z) {
        let w = transformed(xm, zm, n, nu)?;
        let x2 = xm * xm;
        s_x2 += x2;
        s_x4 += x2 * x2;
        s_w += w;
        s_wx2 += w * x2;
    }
    let denom = s_x2 * s_wx2 - s_x4 * s_w;
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::Numerical("degenerate data: Saleh closed-form denominator vanishes".into()));
    }
    let base = (s_x2 * s_x2 - count * s_x4) / denom;
    let alpha = base.powi(nu as i32);
    let beta = (s_x2 * s_w - count * s_wx2) / denom;
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::Numerical("Saleh closed form produced non-finite coefficients".into()));
    }
    Ok(SalehBranch { alpha, beta, n, nu })
}

/// Fits one branch of a measurement curve in the volt domain. Phase samples
/// that are exactly zero (the normalization reference) carry no information
/// about `α/β` and are skipped.
pub fn fit_saleh(curve: &MeasurementCurve, target: SalehTarget, n: u32, nu: u32) -> Result<(SalehBranch, f64)> {
    let xs = curve.input_volts();
    let zs = match target {
        SalehTarget::Amplitude => curve.output_volts(),
        SalehTarget::Phase => curve.phase_deg(),
    };
    let (x, z): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(&zs)
        .filter(|(_, &z)| !(target == SalehTarget::Phase && z == 0.0))
        .map(|(&x, &z)| (x, z))
        .unzip();
    let branch = fit_saleh_branch(&x, &z, n, nu)?;
    let residual = rms(xs.iter().zip(&zs).map(|(&xm, &zm)| zm - branch.eval(xm)));
    Ok((branch, residual))
}

/// Classic Saleh fit: AM-AM with `(n, ν) = (1, 1)`, AM-PM with `(2, 1)`.
pub fn fit_saleh_model(curve: &MeasurementCurve) -> Result<(SalehParams, FitReport)> {
    let (amplitude, ra) = fit_saleh(curve, SalehTarget::Amplitude, 1, 1)?;
    let (phase, rp) = fit_saleh(curve, SalehTarget::Phase, 2, 1)?;
    let params = SalehParams { amplitude, phase };
    let report = FitReport {
        model: PaModel::new(curve.fc_hz, ModelParams::Saleh(params))?,
        residual_amplitude: ra,
        residual_phase: rp,
        amplitude_units: AmplitudeUnits::Volt,
        iterations: 1,
        converged: true,
        restarts: 1,
        best_restart: [0, 0],
        seed: 0,
    };
    Ok((params, report))
}
