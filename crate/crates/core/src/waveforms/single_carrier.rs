//! Root-raised-cosine single-carrier modulation.
//!
//! Shaping and matched filtering are done blockwise in the frequency domain
//! with circular convolution, so the cascade is exactly Nyquist and has no
//! group delay to compensate. Each block of `n` symbols becomes `n·L`
//! samples.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::WaveformConfig;
use crate::error::{Error, Result};
use crate::signal::SampleBuffer;

/// Raised-cosine spectrum at frequency `f` (cycles per symbol), normalised
/// so its periodic repetitions sum to one.
pub fn raised_cosine_spectrum(f: f64, rolloff: f64) -> f64 {
    let a = f.abs();
    let lo = 0.5 * (1.0 - rolloff);
    let hi = 0.5 * (1.0 + rolloff);
    if a <= lo {
        1.0
    } else if a >= hi {
        0.0
    } else {
        0.5 * (1.0 + (PI / rolloff * (a - lo)).cos())
    }
}

/// Square root of the raised-cosine spectrum on the `n·L` DFT bins of a
/// block of `n` symbols.
fn rrc_bins(n: usize, oversampling: usize, rolloff: f64) -> Vec<f64> {
    let k_total = n * oversampling;
    (0..k_total)
        .map(|k| {
            let signed = if 2 * k < k_total { k as f64 } else { k as f64 - k_total as f64 };
            raised_cosine_spectrum(signed / n as f64, rolloff).sqrt()
        })
        .collect()
}

fn blocks(total: usize, block: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..total.div_ceil(block)).map(move |b| (b * block, block.min(total - b * block)))
}

pub fn sc_modulate(symbols: &[Complex64], config: &WaveformConfig) -> Result<SampleBuffer> {
    config.validate()?;
    if symbols.is_empty() {
        return Err(Error::Data("no symbols to modulate".into()));
    }
    let l = config.oversampling();
    let mut planner = FftPlanner::new();
    let mut out = Vec::with_capacity(symbols.len() * l);
    for (start, n) in blocks(symbols.len(), config.block_symbols) {
        let k_total = n * l;
        let mut spectrum = symbols[start..start + n].to_vec();
        planner.plan_fft_forward(n).process(&mut spectrum);
        let h = rrc_bins(n, l, config.rolloff);
        let gain = l as f64 / k_total as f64;
        let mut x: Vec<Complex64> = (0..k_total).map(|k| spectrum[k % n] * (h[k] * gain)).collect();
        planner.plan_fft_inverse(k_total).process(&mut x);
        out.extend(x);
    }
    SampleBuffer::new(out, config.sample_rate())
}

/// Matched-filtered waveform at the full sample rate. Symbol `m` of each
/// block sits at sample `m·L`.
pub fn matched_filter(buffer: &SampleBuffer, config: &WaveformConfig) -> Result<Vec<Complex64>> {
    let spectra = filtered_spectra(buffer, config)?;
    let mut planner = FftPlanner::new();
    Ok(spectra
        .into_iter()
        .flat_map(|(mut y, _)| {
            let k_total = y.len();
            planner.plan_fft_inverse(k_total).process(&mut y);
            y.iter_mut().for_each(|v| *v /= k_total as f64);
            y
        })
        .collect())
}

/// Per-block matched-filter spectra and block symbol counts.
fn filtered_spectra(buffer: &SampleBuffer, config: &WaveformConfig) -> Result<Vec<(Vec<Complex64>, usize)>> {
    config.validate()?;
    let l = config.oversampling();
    let len = buffer.len();
    if len < l || !len.is_multiple_of(l) {
        return Err(Error::Data(format!(
            "buffer of {len} samples is not a whole number of {l}-sample symbols"
        )));
    }
    let mut planner = FftPlanner::new();
    Ok(blocks(len / l, config.block_symbols)
        .map(|(start, n)| {
            let k_total = n * l;
            let mut y = buffer.samples[start * l..start * l + k_total].to_vec();
            planner.plan_fft_forward(k_total).process(&mut y);
            for (v, h) in y.iter_mut().zip(rrc_bins(n, l, config.rolloff)) {
                *v *= h;
            }
            (y, n)
        })
        .collect())
}

/// Matched filter followed by symbol-rate sampling.
pub fn sc_demodulate(buffer: &SampleBuffer, config: &WaveformConfig) -> Result<Vec<Complex64>> {
    let l = config.oversampling();
    let mut planner = FftPlanner::new();
    let mut out = Vec::with_capacity(buffer.len() / l.max(1));
    for (y, n) in filtered_spectra(buffer, config)? {
        // sampling every L-th output sample folds the L spectral images
        let mut folded: Vec<Complex64> = (0..n)
            .map(|k| (0..l).map(|r| y[k + r * n]).sum::<Complex64>() / (l * n) as f64)
            .collect();
        planner.plan_fft_inverse(n).process(&mut folded);
        out.extend(folded);
    }
    Ok(out)
}
