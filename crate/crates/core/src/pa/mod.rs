//! Quasi-memoryless AM-AM / AM-PM power-amplifier models.
//!
//! Volt-domain models (Rapp, Saleh, Ghorbani, linear) map an envelope
//! amplitude in volts to an output amplitude in volts and a phase shift in
//! degrees. The polynomial model works in dBm and is bridged to volts with
//! the conversions in [`crate::units`].

mod models;

pub use models::{
    GhorbaniParams, LinearGain, PolyParams, RangePolicy, RappParams, SalehBranch, SalehParams,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampleBuffer;

/// Common interface of the volt-domain characteristics.
pub trait AmplitudePhase {
    /// Output envelope amplitude (V) for input amplitude `rho` (V).
    fn amplitude(&self, rho: f64) -> Result<f64>;
    /// Output phase shift (degrees) for input amplitude `rho` (V).
    fn phase_deg(&self, rho: f64) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Polynomial,
    Ghorbani,
    Saleh,
    Rapp,
    Linear,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelKind::Polynomial => "polynomial",
            ModelKind::Ghorbani => "ghorbani",
            ModelKind::Saleh => "saleh",
            ModelKind::Rapp => "rapp",
            ModelKind::Linear => "linear",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Polynomial(PolyParams),
    Ghorbani(GhorbaniParams),
    Saleh(SalehParams),
    Rapp(RappParams),
    Linear(LinearGain),
}

/// A behavioral model together with the carrier frequency it was extracted at.
#[derive(Debug, Clone, PartialEq)]
pub struct PaModel {
    pub fc_hz: f64,
    pub params: ModelParams,
}

impl PaModel {
    pub fn new(fc_hz: f64, params: ModelParams) -> Result<Self> {
        let m = Self { fc_hz, params };
        m.validate()?;
        Ok(m)
    }

    pub fn rapp(fc_hz: f64, params: RappParams) -> Result<Self> {
        Self::new(fc_hz, ModelParams::Rapp(params))
    }

    pub fn linear(gain: f64) -> Self {
        Self {
            fc_hz: 1.0,
            params: ModelParams::Linear(LinearGain { gain }),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self.params {
            ModelParams::Polynomial(_) => ModelKind::Polynomial,
            ModelParams::Ghorbani(_) => ModelKind::Ghorbani,
            ModelParams::Saleh(_) => ModelKind::Saleh,
            ModelParams::Rapp(_) => ModelKind::Rapp,
            ModelParams::Linear(_) => ModelKind::Linear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fc_hz > 0.0) || !self.fc_hz.is_finite() {
            return Err(Error::InvalidParams(format!("fc must be positive, got {}", self.fc_hz)));
        }
        match &self.params {
            ModelParams::Polynomial(p) => p.validate(),
            ModelParams::Ghorbani(p) => p.validate(),
            ModelParams::Saleh(p) => p.validate(),
            ModelParams::Rapp(p) => p.validate(),
            ModelParams::Linear(p) => p.validate(),
        }
    }

    fn characteristic(&self) -> &dyn AmplitudePhase {
        match &self.params {
            ModelParams::Polynomial(p) => p,
            ModelParams::Ghorbani(p) => p,
            ModelParams::Saleh(p) => p,
            ModelParams::Rapp(p) => p,
            ModelParams::Linear(p) => p,
        }
    }

    /// Input amplitude (V) of the 1-dB compression point: closed form for
    /// Rapp, bisection from a small-signal reference otherwise.
    pub fn compression_point_1db(&self) -> Result<f64> {
        match &self.params {
            ModelParams::Rapp(p) => Ok(p.compression_point_1db()),
            ModelParams::Linear(_) => Err(Error::Config(
                "a linear model has no compression point; give the IBO reference explicitly".into(),
            )),
            ModelParams::Polynomial(p) => {
                compression_point_bisect(self, crate::units::dbm_to_volts(p.valid_range[0]).max(1e-6), 1.0)
            }
            _ => compression_point_bisect(self, 1e-6, 1.0),
        }
    }

    pub fn as_rapp(&self) -> Option<&RappParams> {
        match &self.params {
            ModelParams::Rapp(p) => Some(p),
            _ => None,
        }
    }
}

impl AmplitudePhase for PaModel {
    fn amplitude(&self, rho: f64) -> Result<f64> {
        self.characteristic().amplitude(rho)
    }

    fn phase_deg(&self, rho: f64) -> Result<f64> {
        self.characteristic().phase_deg(rho)
    }
}

/// Applies the model sample by sample: `z = F_A(|y|)·exp(j(arg y + F_P(|y|)))`.
///
/// Zero-amplitude samples map to zero for every model.
pub fn apply_pa(buffer: &SampleBuffer, model: &impl AmplitudePhase) -> Result<SampleBuffer> {
    let samples = apply_pa_samples(&buffer.samples, model)?;
    Ok(SampleBuffer {
        samples,
        sample_rate: buffer.sample_rate,
    })
}

pub fn apply_pa_samples(samples: &[Complex64], model: &impl AmplitudePhase) -> Result<Vec<Complex64>> {
    samples
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let rho = y.norm();
            if rho == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let amp = model.amplitude(rho).map_err(|e| e.at_sample(i))?;
            let phi = model.phase_deg(rho).map_err(|e| e.at_sample(i))?.to_radians();
            Ok(y / rho * Complex64::from_polar(amp, phi))
        })
        .collect()
}

/// Saturation voltage trend over frequency, `V_sat(f) = −2.5585e−13·f + 0.1345`.
pub fn vsat_trend(f_hz: f64) -> Result<f64> {
    if !(f_hz > 0.0) || !f_hz.is_finite() {
        return Err(Error::Domain {
            what: "vsat_trend",
            value: f_hz,
            reason: "frequency must be positive and finite",
        });
    }
    const SLOPE: f64 = -2.5585e-13;
    const INTERCEPT: f64 = 0.1345;
    let v = SLOPE * f_hz + INTERCEPT;
    if v <= 0.0 {
        return Err(Error::Range {
            what: "vsat_trend",
            value: f_hz,
            bound: -INTERCEPT / SLOPE,
            side: crate::error::Bound::Upper,
        });
    }
    Ok(v)
}

/// Gain change of a band-power measurement relative to the small-signal
/// `S21`: `ΔG = P_out − P_in − S21` (all dB/dBm).
pub fn gain_drop(p_out_dbm: f64, p_in_dbm: f64, s21_db: f64) -> f64 {
    p_out_dbm - p_in_dbm - s21_db
}

/// Input amplitude where the gain has dropped by `drop_db` relative to the
/// gain measured at `reference_rho`, found by bisection.
///
/// Works for any monotone-compressing characteristic; for the Rapp model it
/// agrees with [`RappParams::compression_point_1db`] when `reference_rho`
/// is deep in the linear region.
pub fn compression_point_bisect(
    model: &impl AmplitudePhase,
    reference_rho: f64,
    drop_db: f64,
) -> Result<f64> {
    if !(reference_rho > 0.0) || !(drop_db > 0.0) {
        return Err(Error::Domain {
            what: "compression_point_bisect",
            value: reference_rho,
            reason: "reference amplitude and drop must be positive",
        });
    }
    let g_ref = model.amplitude(reference_rho)? / reference_rho;
    if !(g_ref > 0.0) {
        return Err(Error::Numerical("non-positive small-signal gain at reference".into()));
    }
    let excess = |x: f64| -> Result<f64> {
        let g = model.amplitude(x)? / x;
        Ok(20.0 * (g / g_ref).log10() + drop_db)
    };

    let mut lo = reference_rho;
    let mut hi = reference_rho * 2.0;
    let mut expansions = 0;
    while excess(hi)? > 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::Numerical(format!(
                "gain never drops by {drop_db} dB; no compression point"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
