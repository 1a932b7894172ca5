//! OFDM with `N` centred active subcarriers in an `N·L`-point IFFT.
//!
//! Subcarrier `j` (0-based, in symbol order) occupies the signed bin
//! `j − N/2`. The IFFT is scaled so the mean envelope power equals the mean
//! symbol energy whatever `N` and `L` are.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::WaveformConfig;
use crate::error::{Error, Result};
use crate::signal::SampleBuffer;

fn bin(j: usize, n: usize, k_total: usize) -> usize {
    (j + k_total - n / 2) % k_total
}

fn check(config: &WaveformConfig) -> Result<()> {
    config.validate()?;
    if config.is_single_carrier() {
        return Err(Error::Config("OFDM requires n_subcarriers > 1".into()));
    }
    Ok(())
}

pub fn ofdm_modulate(symbols: &[Complex64], config: &WaveformConfig) -> Result<SampleBuffer> {
    check(config)?;
    let n = config.n_subcarriers;
    if symbols.is_empty() || !symbols.len().is_multiple_of(n) {
        return Err(Error::Data(format!(
            "symbol count {} is not a positive multiple of {n} subcarriers",
            symbols.len()
        )));
    }
    let k_total = n * config.oversampling();
    let cp = config.cp_len();
    let scale = 1.0 / (n as f64).sqrt();
    let ifft = FftPlanner::new().plan_fft_inverse(k_total);
    let mut out = Vec::with_capacity(symbols.len() / n * (k_total + cp));
    let mut grid = vec![Complex64::new(0.0, 0.0); k_total];
    for block in symbols.chunks_exact(n) {
        grid.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (j, &s) in block.iter().enumerate() {
            grid[bin(j, n, k_total)] = s * scale;
        }
        ifft.process(&mut grid);
        out.extend_from_slice(&grid[k_total - cp..]);
        out.extend_from_slice(&grid);
    }
    SampleBuffer::new(out, config.sample_rate())
}

pub fn ofdm_demodulate(buffer: &SampleBuffer, config: &WaveformConfig) -> Result<Vec<Complex64>> {
    check(config)?;
    let n = config.n_subcarriers;
    let k_total = n * config.oversampling();
    let period = k_total + config.cp_len();
    if buffer.is_empty() || !buffer.len().is_multiple_of(period) {
        return Err(Error::Data(format!(
            "buffer of {} samples is not a whole number of {period}-sample OFDM symbols",
            buffer.len()
        )));
    }
    let scale = (n as f64).sqrt() / k_total as f64;
    let fft = FftPlanner::new().plan_fft_forward(k_total);
    let mut out = Vec::with_capacity(buffer.len() / period * n);
    for chunk in buffer.samples.chunks_exact(period) {
        let mut grid = chunk[period - k_total..].to_vec();
        fft.process(&mut grid);
        out.extend((0..n).map(|j| grid[bin(j, n, k_total)] * scale));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::mean_power;
    use crate::waveforms::{evm, Qam};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn symbols(m: u32, n: usize, seed: u64) -> Vec<Complex64> {
        let q = Qam::new(m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits: Vec<u8> = (0..n * q.bits_per_symbol()).map(|_| rng.random_range(0..2u8)).collect();
        q.map(&bits).unwrap()
    }

    #[test]
    fn roundtrip_all_sizes() {
        for n in [2, 16, 32, 64, 128, 256] {
            let cfg = WaveformConfig::new(64, n);
            let s = symbols(64, n * 20, n as u64);
            let x = ofdm_modulate(&s, &cfg).unwrap();
            assert_eq!(x.len(), 20 * (4 * n + cfg.cp_len()));
            let r = ofdm_demodulate(&x, &cfg).unwrap();
            assert!(evm(&r, &s).unwrap() <= -100.0);
        }
    }

    #[test]
    fn parseval_without_prefix() {
        let mut cfg = WaveformConfig::new(16, 64);
        cfg.cp_fraction = 0.0;
        let s = symbols(16, 64 * 50, 1);
        let x = ofdm_modulate(&s, &cfg).unwrap();
        assert_relative_eq!(x.mean_power(), mean_power(&s), max_relative = 1e-10);
    }

    #[test]
    fn power_independent_of_size() {
        let s = symbols(64, 256 * 80, 4);
        let p: Vec<f64> = [16, 32, 64, 128, 256]
            .iter()
            .map(|&n| ofdm_modulate(&s, &WaveformConfig::new(64, n)).unwrap().mean_power())
            .collect();
        for v in &p {
            assert!((10.0 * (v / p[0]).log10()).abs() < 0.01);
        }
    }

    #[test]
    fn single_subcarrier_is_constant_envelope() {
        let cfg = WaveformConfig::new(4, 32);
        let mut s = vec![Complex64::new(0.0, 0.0); 32];
        s[5] = Complex64::new(1.0, 0.0);
        let x = ofdm_modulate(&s, &cfg).unwrap();
        let a = 1.0 / 32f64.sqrt();
        assert!(x.samples.iter().all(|v| (v.norm() - a).abs() < 1e-12));
    }

    #[test]
    fn size_errors() {
        let cfg = WaveformConfig::new(4, 16);
        assert!(matches!(ofdm_modulate(&symbols(4, 20, 0), &cfg), Err(Error::Data(_))));
        let b = SampleBuffer::new(vec![Complex64::new(0.0, 0.0); 70], 1.0).unwrap();
        assert!(matches!(ofdm_demodulate(&b, &cfg), Err(Error::Data(_))));
        assert!(matches!(ofdm_modulate(&symbols(4, 20, 0), &WaveformConfig::new(4, 1)), Err(Error::Config(_))));
    }
}
