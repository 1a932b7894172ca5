//! Parameter sweeps over independent chain runs.
//!
//! Each axis point gets its own seed derived from the master seed and the
//! axis value, so results do not depend on evaluation order or thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::{make_frame, receive, transmit, ChainConfig, ChainMetrics, Noise};
use super::{noise_power, required_tx_power, LinkConfig};
use crate::error::{Error, Result};
use crate::units::volts_to_dbm;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the sweep point at `axis_value`.
pub fn point_seed(master: u64, axis_value: f64) -> u64 {
    splitmix64(master ^ splitmix64(axis_value.to_bits()))
}

/// Seed for Monte-Carlo frame `index` of a point.
pub fn frame_seed(point: u64, index: u64) -> u64 {
    splitmix64(point.wrapping_add(splitmix64(index)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    IboDb,
    SnrDb,
    NSubcarriers,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::IboDb => "ibo_db",
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::NSubcarriers => "n_subcarriers",
        }
    }
}

/// How the SNR axis of a BER sweep relates to the drive level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SnrMode {
    /// SNR is set directly; the drive stays at the configured IBO.
    Direct,
    /// SNR follows from the transmit power through the link budget; the
    /// drive level is solved so the PA delivers that power.
    LinkBudget { link: LinkConfig },
}

fn default_min_errors() -> u64 {
    100
}
fn default_max_bits() -> u64 {
    10_000_000
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerOptions {
    #[serde(default = "default_min_errors")]
    pub min_errors: u64,
    #[serde(default = "default_max_bits")]
    pub max_bits: u64,
}

impl Default for BerOptions {
    fn default() -> Self {
        Self { min_errors: default_min_errors(), max_bits: default_max_bits() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub ibo_db: Option<f64>,
    pub snr_db: Option<f64>,
    pub evm_db: Option<f64>,
    pub ber: Option<f64>,
    pub ber_std_err: Option<f64>,
    pub bit_errors: u64,
    pub bits: u64,
    pub mean_pa_input_dbm: Option<f64>,
    pub mean_pa_output_dbm: Option<f64>,
    pub clip_rate: Option<f64>,
    /// No bit errors were observed within the bit budget.
    pub below_resolution: bool,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(axis_value: f64, e: &Error) -> Self {
        Self { axis_value, error: Some(e.to_string()), ..Self::default() }
    }
}

/// Everything needed to rerun the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub axis: SweepAxis,
    pub axis_values: Vec<f64>,
    pub base: ChainConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_mode: Option<SnrMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ber_options: Option<BerOptions>,
    pub seed: u64,
    pub total_bits: u64,
    pub total_bit_errors: u64,
    pub symbols_per_frame: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    fn new(
        axis: SweepAxis,
        axis_values: &[f64],
        base: &ChainConfig,
        snr_mode: Option<SnrMode>,
        ber_options: Option<BerOptions>,
        rows: Vec<SweepRow>,
    ) -> Self {
        Self {
            metadata: SweepMetadata {
                axis,
                axis_values: axis_values.to_vec(),
                base: base.clone(),
                snr_mode,
                ber_options,
                seed: base.seed,
                total_bits: rows.iter().map(|r| r.bits).sum(),
                total_bit_errors: rows.iter().map(|r| r.bit_errors).sum(),
                symbols_per_frame: base.waveform.frame_symbols() as u64,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            rows,
        }
    }
}

fn require_axis<T>(values: &[T]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Config("sweep axis is empty".into()));
    }
    Ok(())
}

fn row_from(axis_value: f64, ibo_db: f64, snr_db: Option<f64>, m: &ChainMetrics) -> SweepRow {
    SweepRow {
        axis_value,
        ibo_db: Some(ibo_db),
        snr_db,
        evm_db: Some(m.evm_db),
        ber: Some(m.ber()),
        ber_std_err: Some((m.ber() * (1.0 - m.ber()) / m.bits as f64).sqrt()),
        bit_errors: m.bit_errors,
        bits: m.bits,
        mean_pa_input_dbm: Some(m.mean_pa_input_dbm),
        mean_pa_output_dbm: Some(m.mean_pa_output_dbm),
        clip_rate: Some(m.clip_rate),
        below_resolution: false,
        error: None,
    }
}

fn run_point(cfg: &ChainConfig, x_1db: f64) -> Result<ChainMetrics> {
    let frame = make_frame(cfg)?;
    let tx = transmit(cfg, &frame, x_1db, cfg.ibo_db)?;
    receive(cfg, &frame, tx)
}

/// Noiseless EVM for each subcarrier count (1 = single carrier).
pub fn sweep_evm_vs_nsc(base: &ChainConfig, n_subcarriers: &[usize]) -> Result<SweepResult> {
    require_axis(n_subcarriers)?;
    let base = ChainConfig { noise: Noise::None, ..base.clone() };
    for &n in n_subcarriers {
        let mut cfg = base.clone();
        cfg.waveform.n_subcarriers = n;
        cfg.validate()?;
    }
    let x_1db = base.x_1db()?;
    let axis: Vec<f64> = n_subcarriers.iter().map(|&n| n as f64).collect();
    let rows = n_subcarriers
        .par_iter()
        .zip(&axis)
        .map(|(&n, &a)| {
            let mut cfg = base.clone();
            cfg.waveform.n_subcarriers = n;
            cfg.seed = point_seed(base.seed, a);
            match run_point(&cfg, x_1db) {
                Ok(m) => row_from(a, cfg.ibo_db, None, &m),
                Err(e) => SweepRow::failed(a, &e),
            }
        })
        .collect();
    Ok(SweepResult::new(SweepAxis::NSubcarriers, &axis, &base, None, None, rows))
}

/// Noiseless run at each IBO, reporting mean PA input power and EVM.
pub fn sweep_pa_input_vs_ibo(base: &ChainConfig, ibos_db: &[f64]) -> Result<SweepResult> {
    require_axis(ibos_db)?;
    let base = ChainConfig { noise: Noise::None, ..base.clone() };
    base.validate()?;
    if let Some(v) = ibos_db.iter().find(|v| !v.is_finite()) {
        return Err(Error::Config(format!("IBO values must be finite, got {v}")));
    }
    let x_1db = base.x_1db()?;
    let rows = ibos_db
        .par_iter()
        .map(|&ibo| {
            let cfg = ChainConfig { ibo_db: ibo, seed: point_seed(base.seed, ibo), ..base.clone() };
            match run_point(&cfg, x_1db) {
                Ok(m) => row_from(ibo, ibo, None, &m),
                Err(e) => SweepRow::failed(ibo, &e),
            }
        })
        .collect();
    Ok(SweepResult::new(SweepAxis::IboDb, ibos_db, &base, None, None, rows))
}

/// IBO lower search limit for link-budget mode (dB).
const IBO_SEARCH_MIN: f64 = -30.0;
/// IBO upper search limit for link-budget mode (dB).
const IBO_SEARCH_MAX: f64 = 80.0;

/// Finds the IBO at which the PA delivers `target_dbm` mean output power.
fn solve_ibo(cfg: &ChainConfig, x_1db: f64, target_dbm: f64) -> Result<f64> {
    let frame = make_frame(cfg)?;
    let excess = |ibo: f64| -> Result<f64> {
        let tx = transmit(cfg, &frame, x_1db, ibo)?;
        Ok(volts_to_dbm(tx.pa_output.mean_power().sqrt()) - target_dbm)
    };
    let (mut lo, mut hi) = (IBO_SEARCH_MIN, IBO_SEARCH_MAX);
    let top = excess(lo)?;
    if top < 0.0 {
        return Err(Error::Numerical(format!(
            "PA cannot deliver {target_dbm:.3} dBm (maximum {:.3} dBm)",
            top + target_dbm
        )));
    }
    if excess(hi)? > 0.0 {
        return Err(Error::Numerical(format!("{target_dbm:.3} dBm needs more than {hi} dB back-off")));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn ber_point(base: &ChainConfig, x_1db: f64, snr_db: f64, mode: &SnrMode, opts: &BerOptions) -> Result<SweepRow> {
    let seed = point_seed(base.seed, snr_db);
    let mut cfg = ChainConfig { seed: frame_seed(seed, 0), ..base.clone() };
    match mode {
        SnrMode::Direct => cfg.noise = Noise::SnrDb(snr_db),
        SnrMode::LinkBudget { link } => {
            let p_t = required_tx_power(snr_db, link);
            cfg.ibo_db = solve_ibo(&cfg, x_1db, p_t)?;
            let in_band = noise_power(link) - link.net_gain_db();
            cfg.noise = Noise::InBandPower(10f64.powf((in_band - 30.0) / 10.0));
        }
    }

    let (mut errors, mut bits, mut err_sum, mut symbols) = (0u64, 0u64, 0.0, 0u64);
    let (mut p_in, mut p_out, mut clip) = (0.0, 0.0, 0.0);
    let mut frames = 0u64;
    while errors < opts.min_errors && bits < opts.max_bits {
        cfg.seed = frame_seed(seed, frames);
        let m = run_point(&cfg, x_1db)?;
        errors += m.bit_errors;
        bits += m.bits;
        err_sum += m.evm_ratio * m.symbols as f64;
        symbols += m.symbols;
        p_in += 10f64.powf(m.mean_pa_input_dbm / 10.0);
        p_out += 10f64.powf(m.mean_pa_output_dbm / 10.0);
        clip += m.clip_rate;
        frames += 1;
    }
    let f = frames as f64;
    let ber = errors as f64 / bits as f64;
    let below = errors == 0;
    Ok(SweepRow {
        axis_value: snr_db,
        ibo_db: Some(cfg.ibo_db),
        snr_db: Some(snr_db),
        evm_db: Some(10.0 * (err_sum / symbols as f64).log10()),
        ber: (!below).then_some(ber),
        ber_std_err: (!below).then(|| (ber * (1.0 - ber) / bits as f64).sqrt()),
        bit_errors: errors,
        bits,
        mean_pa_input_dbm: Some(10.0 * (p_in / f).log10()),
        mean_pa_output_dbm: Some(10.0 * (p_out / f).log10()),
        clip_rate: Some(clip / f),
        below_resolution: below,
        error: None,
    })
}

/// Monte-Carlo BER at each SNR. Frames are accumulated until
/// `min_errors` bit errors or `max_bits` bits.
pub fn sweep_ber_vs_snr(
    base: &ChainConfig,
    snrs_db: &[f64],
    mode: &SnrMode,
    opts: &BerOptions,
) -> Result<SweepResult> {
    require_axis(snrs_db)?;
    base.validate()?;
    if let SnrMode::LinkBudget { link } = mode {
        link.validate()?;
    }
    if let Some(v) = snrs_db.iter().find(|v| !v.is_finite()) {
        return Err(Error::Config(format!("SNR values must be finite, got {v}")));
    }
    if opts.min_errors == 0 || opts.max_bits == 0 {
        return Err(Error::Config("min_errors and max_bits must be positive".into()));
    }
    let x_1db = base.x_1db()?;
    let rows = snrs_db
        .par_iter()
        .map(|&snr| ber_point(base, x_1db, snr, mode, opts).unwrap_or_else(|e| SweepRow::failed(snr, &e)))
        .collect();
    Ok(SweepResult::new(SweepAxis::SnrDb, snrs_db, base, Some(mode.clone()), Some(*opts), rows))
}

/// Repeats a sweep from the metadata stored with its result.
pub fn rerun(metadata: &SweepMetadata) -> Result<SweepResult> {
    let values = &metadata.axis_values;
    match metadata.axis {
        SweepAxis::NSubcarriers => {
            let n: Vec<usize> = values
                .iter()
                .map(|&v| {
                    if v >= 1.0 && v.fract() == 0.0 {
                        Ok(v as usize)
                    } else {
                        Err(Error::Config(format!("subcarrier count must be a positive integer, got {v}")))
                    }
                })
                .collect::<Result<_>>()?;
            sweep_evm_vs_nsc(&metadata.base, &n)
        }
        SweepAxis::IboDb => sweep_pa_input_vs_ibo(&metadata.base, values),
        SweepAxis::SnrDb => {
            let mode = metadata
                .snr_mode
                .as_ref()
                .ok_or_else(|| Error::Config("BER sweep metadata lacks snr_mode".into()))?;
            sweep_ber_vs_snr(&metadata.base, values, mode, &metadata.ber_options.unwrap_or_default())
        }
    }
}
