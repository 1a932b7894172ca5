//! modulate → IBO scaling → [predistortion] → PA → AWGN → demodulate →
//! equalize → metrics.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pa::{apply_pa, PaModel};
use crate::predistortion::Predistorter;
use crate::signal::SampleBuffer;
use crate::units::volts_to_dbm;
use crate::waveforms::{self, EqualizerKind, WaveformConfig};

/// Additive noise at the receiver, referred to the PA output.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "value")]
pub enum Noise {
    #[default]
    None,
    /// `E_s/N_0` in dB relative to the measured PA output power.
    SnrDb(f64),
    /// In-band noise power (V²) at the PA output reference plane.
    InBandPower(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub waveform: WaveformConfig,
    pub model: PaModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predistorter: Option<Predistorter>,
    pub ibo_db: f64,
    /// Input amplitude (V) that IBO is measured against. Defaults to the
    /// model's 1-dB compression point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ibo_reference: Option<f64>,
    #[serde(default)]
    pub noise: Noise,
    #[serde(default)]
    pub equalizer: EqualizerKind,
    pub seed: u64,
}

impl ChainConfig {
    pub fn new(waveform: WaveformConfig, model: PaModel, ibo_db: f64, seed: u64) -> Self {
        Self {
            waveform,
            model,
            predistorter: None,
            ibo_db,
            ibo_reference: None,
            noise: Noise::None,
            equalizer: EqualizerKind::default(),
            seed,
        }
    }

    pub fn with_predistorter(mut self, pd: Option<Predistorter>) -> Self {
        self.predistorter = pd;
        self
    }

    pub fn with_noise(mut self, noise: Noise) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_ibo_reference(mut self, x_1db: f64) -> Self {
        self.ibo_reference = Some(x_1db);
        self
    }

    /// IBO reference amplitude in volts.
    pub fn x_1db(&self) -> Result<f64> {
        match self.ibo_reference {
            Some(x) if x > 0.0 && x.is_finite() => Ok(x),
            Some(x) => Err(Error::Config(format!("ibo_reference must be positive, got {x}"))),
            None => self.model.compression_point_1db(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.waveform.validate()?;
        self.model.validate()?;
        if let Some(pd) = &self.predistorter {
            pd.validate()?;
        }
        if !self.ibo_db.is_finite() {
            return Err(Error::Config(format!("ibo_db must be finite, got {}", self.ibo_db)));
        }
        match self.noise {
            Noise::SnrDb(s) if !s.is_finite() => {
                return Err(Error::Config(format!("snr must be finite, got {s}")))
            }
            Noise::InBandPower(p) if !(p > 0.0) || !p.is_finite() => {
                return Err(Error::Config(format!("noise power must be positive, got {p}")))
            }
            _ => {}
        }
        self.x_1db().map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMetrics {
    pub evm_db: f64,
    /// Mean squared error vector over the squared constellation peak.
    pub evm_ratio: f64,
    pub symbols: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub mean_pa_input_dbm: f64,
    pub mean_pa_output_dbm: f64,
    pub clip_rate: f64,
    /// Realized PA-output power over in-band noise power.
    pub measured_snr_db: Option<f64>,
}

impl ChainMetrics {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.bits as f64
    }
}

/// Transmit side up to the PA input, cached so the drive level can be
/// changed without regenerating the waveform.
pub(crate) struct Frame {
    pub bits: Vec<u8>,
    pub symbols: Vec<Complex64>,
    pub waveform: SampleBuffer,
}

pub(crate) fn make_frame(cfg: &ChainConfig) -> Result<Frame> {
    let qam = cfg.waveform.qam()?;
    let n_bits = cfg.waveform.frame_symbols() * qam.bits_per_symbol();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bits: Vec<u8> = (0..n_bits).map(|_| rng.random_range(0..2u8)).collect();
    let symbols = qam.map(&bits)?;
    let waveform = waveforms::modulate(&symbols, &cfg.waveform)?;
    Ok(Frame { bits, symbols, waveform })
}

pub(crate) struct Transmitted {
    pub pa_input: SampleBuffer,
    pub pa_output: SampleBuffer,
    pub clipped: usize,
}

pub(crate) fn transmit(cfg: &ChainConfig, frame: &Frame, x_1db: f64, ibo_db: f64) -> Result<Transmitted> {
    let x = waveforms::ibo_scale(&frame.waveform, x_1db, ibo_db)?;
    let (pa_input, clipped) = match &cfg.predistorter {
        Some(pd) => {
            let out = pd.apply(&x);
            (out.buffer, out.clipped)
        }
        None => (x, 0),
    };
    let pa_output = apply_pa(&pa_input, &cfg.model)?;
    Ok(Transmitted { pa_input, pa_output, clipped })
}

/// Adds circular Gaussian noise whose realized mean power is exactly
/// `variance`; returns that power.
fn add_noise(buffer: &mut SampleBuffer, variance: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let noise: Vec<Complex64> = (0..buffer.len())
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let scale = (variance / crate::signal::mean_power(&noise)).sqrt();
    for (s, n) in buffer.samples.iter_mut().zip(&noise) {
        *s += n * scale;
    }
    crate::signal::mean_power(&noise) * scale * scale
}

pub(crate) fn receive(cfg: &ChainConfig, frame: &Frame, tx: Transmitted) -> Result<ChainMetrics> {
    let qam = cfg.waveform.qam()?;
    let l = cfg.waveform.oversampling() as f64;
    let mut rx = tx.pa_output;
    let p_out = rx.mean_power();
    let variance = match cfg.noise {
        Noise::None => None,
        Noise::SnrDb(s) => Some(l * p_out / 10f64.powf(s / 10.0)),
        Noise::InBandPower(p) => Some(l * p),
    };
    let measured_snr_db = variance.map(|v| {
        let injected = add_noise(&mut rx, v, cfg.seed);
        10.0 * (l * p_out / injected).log10()
    });

    let demod = waveforms::demodulate(&rx, &cfg.waveform)?;
    let equalized = waveforms::equalize_streams(
        &demod,
        &frame.symbols,
        cfg.waveform.n_subcarriers,
        cfg.equalizer,
    )?;
    let peak = qam.peak_amplitude();
    let evm_ratio = equalized
        .iter()
        .zip(&frame.symbols)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        / (equalized.len() as f64 * peak * peak);
    let evm_db = waveforms::evm_with_peak(&equalized, &frame.symbols, peak)?;
    let decided = qam.demap(&equalized);
    let bit_errors = decided.iter().zip(&frame.bits).filter(|(a, b)| a != b).count() as u64;

    Ok(ChainMetrics {
        evm_db,
        evm_ratio,
        symbols: frame.symbols.len() as u64,
        bits: frame.bits.len() as u64,
        bit_errors,
        mean_pa_input_dbm: volts_to_dbm(tx.pa_input.mean_power().sqrt()),
        mean_pa_output_dbm: volts_to_dbm(p_out.sqrt()),
        clip_rate: tx.clipped as f64 / tx.pa_input.len() as f64,
        measured_snr_db,
    })
}

/// Runs one frame through the chain. Deterministic in `cfg.seed`.
pub fn run_chain(cfg: &ChainConfig) -> Result<ChainMetrics> {
    cfg.validate()?;
    let x_1db = cfg.x_1db()?;
    let frame = make_frame(cfg)?;
    let tx = transmit(cfg, &frame, x_1db, cfg.ibo_db)?;
    receive(cfg, &frame, tx)
}
