//! Parameter extraction from AM-AM / AM-PM measurement curves.

mod measurement;
mod nonlinear;
mod polynomial;
mod saleh;
mod simplex;

pub use measurement::{
    normalize_phase, unwrap_degrees, MeasurementCurve, MeasurementPoint, PhaseCurve, RawPhase,
    DEFAULT_REFERENCE_PIN_DBM, REFERENCE_PIN_SLACK_DB,
};
pub use nonlinear::{fit_ghorbani, fit_rapp, FitOptions};
pub use polynomial::{fit_error_vs_order, fit_polynomial, OrderError};
pub use saleh::{fit_saleh, fit_saleh_branch, fit_saleh_model, SalehTarget};
pub use simplex::{minimize_simplex, SimplexOptions, SimplexResult};

use serde::Serialize;

use crate::pa::PaModel;

/// Unit of the amplitude residual in a [`FitReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AmplitudeUnits {
    /// Output power error, dB (polynomial model).
    #[serde(rename = "dB")]
    Decibel,
    /// Output envelope error, volts (volt-domain models).
    #[serde(rename = "V")]
    Volt,
}

/// Outcome of a fit. Residuals are root-mean-square errors over the curve;
/// the phase residual is always in degrees.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub model: PaModel,
    pub residual_amplitude: f64,
    pub residual_phase: f64,
    pub amplitude_units: AmplitudeUnits,
    pub iterations: usize,
    pub converged: bool,
    /// Number of starts tried per branch (1 for closed-form fits).
    pub restarts: usize,
    /// Winning start index for the amplitude and phase branches.
    pub best_restart: [usize; 2],
    /// Seed of the jitter generator used for restarts.
    pub seed: u64,
}

pub(crate) fn rms(residuals: impl Iterator<Item = f64>) -> f64 {
    let (ss, n) = residuals.fold((0.0, 0usize), |(s, n), r| (s + r * r, n + 1));
    if n == 0 {
        0.0
    } else {
        (ss / n as f64).sqrt()
    }
}
