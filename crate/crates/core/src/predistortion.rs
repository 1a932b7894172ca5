//! Amplitude/phase predistortion for a Rapp amplifier.
//!
//! The ideal predistorter inverts the Rapp AM-AM curve so that the cascade
//! is linear with the amplifier's small-signal gain,
//! `A_PD(ρ) = ρ / [1 − (G·ρ/V_sat)^{2p}]^{1/(2p)}`, and cancels the AM-PM
//! shift with `Θ(ρ_y) = −F_P(ρ_y)`. The inverse diverges at `ρ = V_sat/G`,
//! so inputs are clipped at `χ < V_sat/G` (output `γ = A_PD(χ)`).
//!
//! A deployable variant replaces both functions with power series fitted by
//! least squares over `[0, χ]` and `[0, γ]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pa::RappParams;
use crate::poly;
use crate::signal::SampleBuffer;

/// Default clipping level as a fraction of `V_sat/G`.
pub const DEFAULT_CHI_FRACTION: f64 = 0.935;

/// Default number of quadrature nodes for the least-squares objectives.
pub const DEFAULT_GRID_POINTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PdMode {
    Ideal,
    Polynomial,
}

/// Fitted power-series approximations of the ideal predistortion functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdPolynomials {
    /// Amplitude coefficients `η_k`, volts in → volts out.
    pub eta: Vec<f64>,
    /// Phase coefficients `ν_k`, volts in → degrees out.
    pub nu: Vec<f64>,
    /// RMS approximation error of the amplitude branch over `[0, χ]` (V).
    pub residual_amplitude: f64,
    /// RMS approximation error of the phase branch over `[0, γ]` (degrees).
    pub residual_phase: f64,
    pub grid_points: usize,
}

impl PdPolynomials {
    pub fn amplitude_order(&self) -> usize {
        self.eta.len().saturating_sub(1)
    }

    pub fn phase_order(&self) -> usize {
        self.nu.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Predistorter {
    pub rapp: RappParams,
    /// Input clipping level (V).
    pub chi: f64,
    /// Output clipping level `A_PD(χ)` (V).
    pub gamma: f64,
    pub mode: PdMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomials: Option<PdPolynomials>,
}

/// Output of [`Predistorter::apply`].
#[derive(Debug, Clone, PartialEq)]
pub struct Predistorted {
    pub buffer: SampleBuffer,
    /// Samples whose amplitude exceeded `χ`.
    pub clipped: usize,
}

fn inverse_rapp(rapp: &RappParams, rho: f64) -> f64 {
    let two_p = 2.0 * rapp.p;
    let u = rapp.g_lin * rho / rapp.v_sat;
    rho / (1.0 - u.powf(two_p)).powf(1.0 / two_p)
}

impl Predistorter {
    /// Ideal predistorter with input clipping at `chi`.
    pub fn ideal(rapp: RappParams, chi: f64) -> Result<Self> {
        rapp.validate()?;
        let limit = rapp.saturation_input();
        if !(chi > 0.0 && chi < limit) {
            return Err(Error::InvalidParams(format!(
                "clipping level {chi} V must lie in (0, Vsat/G = {limit:.6e} V)"
            )));
        }
        Ok(Self {
            rapp,
            chi,
            gamma: inverse_rapp(&rapp, chi),
            mode: PdMode::Ideal,
            polynomials: None,
        })
    }

    /// Ideal predistorter at the default clipping fraction of `V_sat/G`.
    pub fn ideal_default(rapp: RappParams) -> Result<Self> {
        Self::ideal(rapp, DEFAULT_CHI_FRACTION * rapp.saturation_input())
    }

    /// Switches to polynomial mode with freshly fitted approximations.
    pub fn with_polynomials(mut self, n_a: usize, n_theta: usize, grid_points: usize) -> Result<Self> {
        self.polynomials = Some(fit_pd_polynomials(&self, n_a, n_theta, grid_points)?);
        self.mode = PdMode::Polynomial;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let reference = Self::ideal(self.rapp, self.chi)?;
        if (reference.gamma - self.gamma).abs() > 1e-12 * reference.gamma.max(1.0) {
            return Err(Error::InvalidParams(format!(
                "gamma {} inconsistent with A_PD(chi) = {}",
                self.gamma, reference.gamma
            )));
        }
        match (&self.mode, &self.polynomials) {
            (PdMode::Polynomial, None) => Err(Error::InvalidParams(
                "polynomial mode requires eta and nu coefficient vectors".into(),
            )),
            (PdMode::Polynomial, Some(p)) if p.eta.is_empty() || p.nu.is_empty() => Err(
                Error::InvalidParams("polynomial coefficient vectors must be nonempty".into()),
            ),
            _ => Ok(()),
        }
    }

    /// Ideal amplitude function with clipping at `χ`.
    pub fn ideal_amplitude(&self, rho_x: f64) -> f64 {
        inverse_rapp(&self.rapp, rho_x.clamp(0.0, self.chi))
    }

    /// Ideal phase correction (degrees), `Θ(ρ_y) = −F_P(ρ_y)`.
    pub fn ideal_phase(&self, rho_y: f64) -> f64 {
        -self.rapp.phase_unchecked(rho_y.max(0.0))
    }

    /// Amplitude function of the active mode (input clipped at `χ`).
    pub fn amplitude(&self, rho_x: f64) -> f64 {
        match (&self.mode, &self.polynomials) {
            (PdMode::Polynomial, Some(p)) => poly::horner(&p.eta, rho_x.clamp(0.0, self.chi)).max(0.0),
            _ => self.ideal_amplitude(rho_x),
        }
    }

    /// Phase function of the active mode (degrees).
    pub fn phase(&self, rho_y: f64) -> f64 {
        match (&self.mode, &self.polynomials) {
            (PdMode::Polynomial, Some(p)) => poly::horner(&p.nu, rho_y),
            _ => self.ideal_phase(rho_y),
        }
    }

    /// Predistorts one envelope sample; returns the output and whether the
    /// input was clipped.
    pub fn apply_sample(&self, x: Complex64) -> (Complex64, bool) {
        let rho_x = x.norm();
        if rho_x == 0.0 {
            return (Complex64::new(0.0, 0.0), false);
        }
        let rho_y = self.amplitude(rho_x);
        let theta_y = x.arg() + self.phase(rho_y).to_radians();
        (Complex64::from_polar(rho_y, theta_y), rho_x > self.chi)
    }

    pub fn apply(&self, buffer: &SampleBuffer) -> Predistorted {
        let mut clipped = 0;
        let samples = buffer
            .samples
            .iter()
            .map(|&x| {
                let (y, c) = self.apply_sample(x);
                clipped += c as usize;
                y
            })
            .collect();
        Predistorted {
            buffer: SampleBuffer { samples, sample_rate: buffer.sample_rate },
            clipped,
        }
    }
}

/// Trapezoid-weighted uniform grid on `[0, upper]`.
fn trapezoid_grid(upper: f64, points: usize) -> (Vec<f64>, Vec<f64>) {
    let h = upper / (points - 1) as f64;
    let x = (0..points).map(|i| i as f64 * h).collect();
    let w = (0..points)
        .map(|i| if i == 0 || i == points - 1 { 0.5 * h } else { h })
        .collect();
    (x, w)
}

fn weighted_rms(coeffs: &[f64], x: &[f64], y: &[f64], w: &[f64]) -> f64 {
    let (num, den) = x.iter().zip(y).zip(w).fold((0.0, 0.0), |(n, d), ((&xi, &yi), &wi)| {
        let r = yi - poly::horner(coeffs, xi);
        (n + wi * r * r, d + wi)
    });
    (num / den).sqrt()
}

/// Least-squares fits of `A_PD` over `[0, χ]` (order `n_a`) and `Θ` over
/// `[0, γ]` (order `n_theta`), the integrals discretized by the composite
/// trapezoid rule on `grid_points` uniform nodes.
pub fn fit_pd_polynomials(pd: &Predistorter, n_a: usize, n_theta: usize, grid_points: usize) -> Result<PdPolynomials> {
    if n_a < 1 || n_theta < 1 {
        return Err(Error::Config("predistorter polynomial orders must be ≥ 1".into()));
    }
    let needed = 10 * n_a.max(n_theta);
    if grid_points < needed {
        return Err(Error::Config(format!(
            "grid_points must be ≥ 10·max(N_A, N_θ) = {needed}, got {grid_points}"
        )));
    }
    let (xa, wa) = trapezoid_grid(pd.chi, grid_points);
    let ya: Vec<f64> = xa.iter().map(|&r| pd.ideal_amplitude(r)).collect();
    let (xp, wp) = trapezoid_grid(pd.gamma, grid_points);
    let yp: Vec<f64> = xp.iter().map(|&r| pd.ideal_phase(r)).collect();

    let eta = poly::fit_weighted(&xa, &ya, Some(&wa), n_a)?;
    let nu = poly::fit_weighted(&xp, &yp, Some(&wp), n_theta)?;
    Ok(PdPolynomials {
        residual_amplitude: weighted_rms(&eta, &xa, &ya, &wa),
        residual_phase: weighted_rms(&nu, &xp, &yp, &wp),
        eta,
        nu,
        grid_points,
    })
}
