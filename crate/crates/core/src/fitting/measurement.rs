use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::dbm_to_volts;

/// Input power at which phase curves are referenced by default (dBm).
pub const DEFAULT_REFERENCE_PIN_DBM: f64 = -40.0;

/// How far (dB) the reference input power may sit from the nearest sample.
pub const REFERENCE_PIN_SLACK_DB: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPoint {
    pub p_in_dbm: f64,
    pub p_out_dbm: f64,
    pub phase_deg: f64,
}

/// CW AM-AM / AM-PM sweep at one carrier frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementCurve {
    pub fc_hz: f64,
    pub points: Vec<MeasurementPoint>,
}

impl MeasurementCurve {
    pub fn new(fc_hz: f64, points: Vec<MeasurementPoint>) -> Result<Self> {
        if !(fc_hz > 0.0) || !fc_hz.is_finite() {
            return Err(Error::Data(format!("curve frequency must be positive, got {fc_hz}")));
        }
        if points.len() < 2 {
            return Err(Error::Data(format!(
                "curve at {fc_hz} Hz has {} point(s); at least 2 required",
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.p_in_dbm.is_finite() || !p.p_out_dbm.is_finite() || !p.phase_deg.is_finite() {
                return Err(Error::Data(format!("curve at {fc_hz} Hz: non-finite value in point {i}")));
            }
        }
        if let Some(i) = points.windows(2).position(|w| w[1].p_in_dbm <= w[0].p_in_dbm) {
            return Err(Error::Data(format!(
                "curve at {fc_hz} Hz: input power not strictly increasing at point {}",
                i + 1
            )));
        }
        Ok(Self { fc_hz, points })
    }

    /// Builds a curve by sampling a characteristic at the given input powers.
    pub fn from_fn(fc_hz: f64, pins_dbm: &[f64], f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let points = pins_dbm
            .iter()
            .map(|&p_in_dbm| {
                let (p_out_dbm, phase_deg) = f(p_in_dbm);
                MeasurementPoint { p_in_dbm, p_out_dbm, phase_deg }
            })
            .collect();
        Self::new(fc_hz, points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn p_in_dbm(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.p_in_dbm).collect()
    }

    pub fn p_out_dbm(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.p_out_dbm).collect()
    }

    pub fn phase_deg(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.phase_deg).collect()
    }

    /// Input envelope amplitudes (V) under the 1-Ω convention.
    pub fn input_volts(&self) -> Vec<f64> {
        self.points.iter().map(|p| dbm_to_volts(p.p_in_dbm)).collect()
    }

    pub fn output_volts(&self) -> Vec<f64> {
        self.points.iter().map(|p| dbm_to_volts(p.p_out_dbm)).collect()
    }

    /// Re-references the phase column to its value at `reference_pin_dbm`.
    pub fn normalize_phase(&mut self, reference_pin_dbm: f64) -> Result<()> {
        let pins = self.p_in_dbm();
        let phases = self.phase_deg();
        let normalized = normalize_one(self.fc_hz, &pins, &phases, reference_pin_dbm)?;
        for (p, phi) in self.points.iter_mut().zip(normalized) {
            p.phase_deg = phi;
        }
        Ok(())
    }
}

/// Raw phase sample `φ21(f, Pin)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawPhase {
    pub fc_hz: f64,
    pub p_in_dbm: f64,
    pub phase_deg: f64,
}

/// Normalized phase `Φ(f, Pin)` on the input-power axis of one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCurve {
    pub fc_hz: f64,
    pub p_in_dbm: Vec<f64>,
    pub phase_deg: Vec<f64>,
}

/// Unwraps a phase sequence (degrees) so consecutive samples differ by less
/// than 180°.
pub fn unwrap_degrees(phase: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(phase.len());
    let mut offset = 0.0f64;
    for (i, &p) in phase.iter().enumerate() {
        if i > 0 {
            let d = p + offset - out[i - 1];
            offset -= 360.0 * (d / 360.0).round();
        }
        out.push(p + offset);
    }
    out
}

/// `Φ(f, Pin) = φ21(f, Pin) − φ21(f, Pin_ref)` per frequency, after unwrapping
/// along input power.
pub fn normalize_phase(raw: &[RawPhase], reference_pin_dbm: f64) -> Result<Vec<PhaseCurve>> {
    let mut groups: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for r in raw {
        if !r.fc_hz.is_finite() || r.fc_hz <= 0.0 {
            return Err(Error::Data(format!("invalid frequency {}", r.fc_hz)));
        }
        groups.entry(r.fc_hz.to_bits()).or_default().push((r.p_in_dbm, r.phase_deg));
    }
    let mut curves: Vec<PhaseCurve> = groups
        .into_iter()
        .map(|(bits, mut rows)| {
            let fc_hz = f64::from_bits(bits);
            rows.sort_by(|a, b| a.0.total_cmp(&b.0));
            let pins: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let phases: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let phase_deg = normalize_one(fc_hz, &pins, &phases, reference_pin_dbm)?;
            Ok(PhaseCurve { fc_hz, p_in_dbm: pins, phase_deg })
        })
        .collect::<Result<_>>()?;
    curves.sort_by(|a, b| a.fc_hz.total_cmp(&b.fc_hz));
    Ok(curves)
}

fn normalize_one(fc_hz: f64, pins: &[f64], phases: &[f64], reference: f64) -> Result<Vec<f64>> {
    let unwrapped = unwrap_degrees(phases);
    let missing = || {
        Error::Data(format!(
            "no phase sample within {REFERENCE_PIN_SLACK_DB} dB of reference {reference} dBm at {fc_hz} Hz"
        ))
    };
    let nearest = pins
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - reference).abs().total_cmp(&(b.1 - reference).abs()))
        .ok_or_else(missing)?;
    if (nearest.1 - reference).abs() > REFERENCE_PIN_SLACK_DB {
        return Err(missing());
    }
    let reference_phase = if *nearest.1 == reference {
        unwrapped[nearest.0]
    } else {
        match pins.windows(2).position(|w| w[0] <= reference && reference <= w[1]) {
            Some(i) => {
                let t = (reference - pins[i]) / (pins[i + 1] - pins[i]);
                unwrapped[i] + t * (unwrapped[i + 1] - unwrapped[i])
            }
            None => unwrapped[nearest.0],
        }
    };
    Ok(unwrapped.iter().map(|p| p - reference_phase).collect())
}
