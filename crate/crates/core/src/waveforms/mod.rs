//! Baseband waveforms: QAM mapping, root-raised-cosine single carrier,
//! OFDM, and the measurements taken on them (PAPR, EVM).

mod equalizer;
mod ofdm;
mod qam;
mod single_carrier;

pub use equalizer::{equalize, equalize_streams, one_tap, EqualizerKind};
pub use ofdm::{ofdm_demodulate, ofdm_modulate};
pub use qam::Qam;
pub use single_carrier::{matched_filter, raised_cosine_spectrum, sc_demodulate, sc_modulate};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pa::RappParams;
use crate::signal::SampleBuffer;

/// Lowest EVM reported, in dB.
pub const EVM_FLOOR_DB: f64 = -150.0;

fn default_rolloff() -> f64 {
    0.5
}
fn default_cp_fraction() -> f64 {
    0.125
}
fn default_symbol_rate() -> f64 {
    1e9
}
fn default_block_symbols() -> usize {
    1024
}
fn default_n_symbols() -> usize {
    20_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformConfig {
    pub modulation_order: u32,
    /// 1 selects single-carrier transmission.
    pub n_subcarriers: usize,
    #[serde(default = "default_rolloff")]
    pub rolloff: f64,
    /// Samples per symbol (single carrier) or IFFT size over `n_subcarriers`
    /// (OFDM). Defaults to 8 and 4 respectively.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oversampling: Option<usize>,
    /// Cyclic prefix length as a fraction of the OFDM symbol duration.
    #[serde(default = "default_cp_fraction")]
    pub cp_fraction: f64,
    /// Number of QAM symbols per frame.
    #[serde(default = "default_n_symbols")]
    pub n_symbols: usize,
    /// Symbol rate of the single-carrier signal, equal to the occupied
    /// bandwidth of the OFDM signal (Hz).
    #[serde(default = "default_symbol_rate")]
    pub symbol_rate_hz: f64,
    /// Single-carrier shaping block length in symbols.
    #[serde(default = "default_block_symbols")]
    pub block_symbols: usize,
}

impl WaveformConfig {
    pub fn new(modulation_order: u32, n_subcarriers: usize) -> Self {
        Self {
            modulation_order,
            n_subcarriers,
            rolloff: default_rolloff(),
            oversampling: None,
            cp_fraction: default_cp_fraction(),
            n_symbols: default_n_symbols(),
            symbol_rate_hz: default_symbol_rate(),
            block_symbols: default_block_symbols(),
        }
    }

    pub fn with_symbols(mut self, n_symbols: usize) -> Self {
        self.n_symbols = n_symbols;
        self
    }

    pub fn is_single_carrier(&self) -> bool {
        self.n_subcarriers == 1
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling.unwrap_or(if self.is_single_carrier() { 8 } else { 4 })
    }

    pub fn sample_rate(&self) -> f64 {
        self.symbol_rate_hz * self.oversampling() as f64
    }

    /// Symbols actually carried by one frame: `n_symbols` rounded up to a
    /// whole number of OFDM symbols.
    pub fn frame_symbols(&self) -> usize {
        self.n_symbols.div_ceil(self.n_subcarriers) * self.n_subcarriers
    }

    pub fn cp_len(&self) -> usize {
        (self.cp_fraction * (self.n_subcarriers * self.oversampling()) as f64).round() as usize
    }

    pub fn qam(&self) -> Result<Qam> {
        Qam::new(self.modulation_order)
    }

    pub fn validate(&self) -> Result<()> {
        self.qam()?;
        let n = self.n_subcarriers;
        if n == 0 || (n > 1 && !n.is_power_of_two()) {
            return Err(Error::Config(format!(
                "n_subcarriers must be 1 or a power of two, got {n}"
            )));
        }
        if self.oversampling() < 2 {
            return Err(Error::Config(format!("oversampling must be ≥ 2, got {}", self.oversampling())));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::Config(format!("rolloff must lie in [0, 1], got {}", self.rolloff)));
        }
        if !(0.0..1.0).contains(&self.cp_fraction) {
            return Err(Error::Config(format!("cp_fraction must lie in [0, 1), got {}", self.cp_fraction)));
        }
        if self.n_symbols == 0 || self.block_symbols == 0 {
            return Err(Error::Config("n_symbols and block_symbols must be positive".into()));
        }
        if !(self.symbol_rate_hz > 0.0) || !self.symbol_rate_hz.is_finite() {
            return Err(Error::Config(format!("symbol_rate_hz must be positive, got {}", self.symbol_rate_hz)));
        }
        Ok(())
    }
}

/// Modulates with the scheme selected by `config.n_subcarriers`.
pub fn modulate(symbols: &[Complex64], config: &WaveformConfig) -> Result<SampleBuffer> {
    if config.is_single_carrier() {
        sc_modulate(symbols, config)
    } else {
        ofdm_modulate(symbols, config)
    }
}

pub fn demodulate(buffer: &SampleBuffer, config: &WaveformConfig) -> Result<Vec<Complex64>> {
    if config.is_single_carrier() {
        sc_demodulate(buffer, config)
    } else {
        ofdm_demodulate(buffer, config)
    }
}

fn nonzero_power(samples: &[Complex64], what: &'static str) -> Result<f64> {
    let p = crate::signal::mean_power(samples);
    if p > 0.0 && p.is_finite() {
        Ok(p)
    } else {
        Err(Error::Domain { what, value: p, reason: "buffer has zero or non-finite power" })
    }
}

/// Peak-to-average power ratio in dB.
pub fn papr(buffer: &SampleBuffer) -> Result<f64> {
    let mean = nonzero_power(&buffer.samples, "papr")?;
    let peak = buffer.samples.iter().map(|s| s.norm_sqr()).fold(0.0, f64::max);
    Ok(10.0 * (peak / mean).log10())
}

/// Scales `buffer` to the given mean envelope power (V²).
pub fn scale_to_power(buffer: &SampleBuffer, mean_power: f64) -> Result<SampleBuffer> {
    let p = nonzero_power(&buffer.samples, "scale_to_power")?;
    Ok(buffer.scaled((mean_power / p).sqrt()))
}

/// Scales `buffer` so its mean power sits `ibo_db` below the square of the
/// amplifier's 1-dB compression input amplitude.
pub fn scale_to_ibo(buffer: &SampleBuffer, rapp: &RappParams, ibo_db: f64) -> Result<SampleBuffer> {
    rapp.validate()?;
    ibo_scale(buffer, rapp.compression_point_1db(), ibo_db)
}

/// As [`scale_to_ibo`] with an explicit compression amplitude `x_1db` (V).
pub fn ibo_scale(buffer: &SampleBuffer, x_1db: f64, ibo_db: f64) -> Result<SampleBuffer> {
    if !ibo_db.is_finite() {
        return Err(Error::Domain { what: "ibo", value: ibo_db, reason: "must be finite" });
    }
    scale_to_power(buffer, x_1db * x_1db / 10f64.powf(ibo_db / 10.0))
}

/// EVM in dB, normalised to the largest reference magnitude.
pub fn evm(measured: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    let peak = reference.iter().map(|r| r.norm()).fold(0.0, f64::max);
    evm_with_peak(measured, reference, peak)
}

/// EVM in dB, normalised to `peak` (usually the constellation's corner
/// magnitude).
pub fn evm_with_peak(measured: &[Complex64], reference: &[Complex64], peak: f64) -> Result<f64> {
    if measured.is_empty() || measured.len() != reference.len() {
        return Err(Error::Data(format!(
            "EVM needs equal nonzero lengths, got {} and {}",
            measured.len(),
            reference.len()
        )));
    }
    if !(peak > 0.0) {
        return Err(Error::Domain { what: "evm", value: peak, reason: "reference peak must be positive" });
    }
    let ms = measured.iter().zip(reference).map(|(m, r)| (m - r).norm_sqr()).sum::<f64>()
        / measured.len() as f64;
    let db = 10.0 * (ms / (peak * peak)).log10();
    Ok(if db.is_nan() { db } else { db.max(EVM_FLOOR_DB) })
}
