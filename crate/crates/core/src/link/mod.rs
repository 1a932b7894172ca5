//! Link budget, the end-to-end transmit/receive chain, and parameter sweeps.

mod chain;
mod sweep;

pub use chain::{run_chain, ChainConfig, ChainMetrics, Noise};
pub use sweep::{
    frame_seed, point_seed, rerun, sweep_ber_vs_snr, sweep_evm_vs_nsc, sweep_pa_input_vs_ibo, BerOptions, SnrMode,
    SweepAxis, SweepMetadata, SweepResult, SweepRow,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{BOLTZMANN, SPEED_OF_LIGHT};

/// Specific gaseous attenuation assumed at 315 GHz for a standard
/// atmosphere (dB/km).
pub const DEFAULT_ATTENUATION_DB_PER_KM: f64 = 6.5;

fn default_g_t() -> f64 {
    45.0
}
fn default_g_r() -> f64 {
    14.0
}
fn default_distance() -> f64 {
    35.0
}
fn default_fc() -> f64 {
    315e9
}
fn default_bandwidth() -> f64 {
    1e9
}
fn default_noise_temp() -> f64 {
    290.0
}
fn default_atten() -> f64 {
    DEFAULT_ATTENUATION_DB_PER_KM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    #[serde(default = "default_g_t")]
    pub g_t_dbi: f64,
    #[serde(default = "default_g_r")]
    pub g_r_dbi: f64,
    #[serde(default = "default_distance")]
    pub distance_m: f64,
    #[serde(default = "default_fc")]
    pub fc_hz: f64,
    #[serde(default = "default_bandwidth")]
    pub bandwidth_hz: f64,
    #[serde(default = "default_noise_temp")]
    pub noise_temp_k: f64,
    #[serde(default = "default_atten")]
    pub atten_db_per_km: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            g_t_dbi: default_g_t(),
            g_r_dbi: default_g_r(),
            distance_m: default_distance(),
            fc_hz: default_fc(),
            bandwidth_hz: default_bandwidth(),
            noise_temp_k: default_noise_temp(),
            atten_db_per_km: default_atten(),
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("distance_m", self.distance_m),
            ("fc_hz", self.fc_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("noise_temp_k", self.noise_temp_k),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("link.{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("g_t_dbi", self.g_t_dbi), ("g_r_dbi", self.g_r_dbi), ("atten_db_per_km", self.atten_db_per_km)] {
            if !v.is_finite() {
                return Err(Error::Config(format!("link.{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Net gain from PA output to receiver input (dB).
    pub fn net_gain_db(&self) -> f64 {
        self.g_t_dbi + self.g_r_dbi
            - free_space_loss_db(self.distance_m, self.fc_hz)
            - self.atten_db_per_km * self.distance_m / 1000.0
    }
}

/// `20·log10(4πd/λ)`.
pub fn free_space_loss_db(distance_m: f64, fc_hz: f64) -> f64 {
    let lambda = SPEED_OF_LIGHT / fc_hz;
    20.0 * (4.0 * std::f64::consts::PI * distance_m / lambda).log10()
}

pub fn received_power(p_t_dbm: f64, cfg: &LinkConfig) -> f64 {
    p_t_dbm + cfg.net_gain_db()
}

/// Thermal noise `k·T·B` in dBm.
pub fn noise_power(cfg: &LinkConfig) -> f64 {
    10.0 * (BOLTZMANN * cfg.noise_temp_k * cfg.bandwidth_hz).log10() + 30.0
}

pub fn link_snr_db(p_t_dbm: f64, cfg: &LinkConfig) -> f64 {
    received_power(p_t_dbm, cfg) - noise_power(cfg)
}

/// Transmit power (dBm) giving the requested receiver SNR.
pub fn required_tx_power(snr_db: f64, cfg: &LinkConfig) -> f64 {
    snr_db + noise_power(cfg) - cfg.net_gain_db()
}

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Approximate bit error rate of Gray-mapped square M-QAM in AWGN at the
/// given `E_s/N_0` (dB).
pub fn gray_qam_ber(order: u32, es_n0_db: f64) -> f64 {
    let m = order as f64;
    let snr = 10f64.powf(es_n0_db / 10.0);
    4.0 / m.log2() * (1.0 - 1.0 / m.sqrt()) * q_function((3.0 * snr / (m - 1.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn no_gain() -> LinkConfig {
        LinkConfig { g_t_dbi: 0.0, g_r_dbi: 0.0, atten_db_per_km: 0.0, ..LinkConfig::default() }
    }

    #[test]
    fn free_space_at_35m() {
        assert!((free_space_loss_db(35.0, 315e9) - 113.2954).abs() < 1e-3);
    }

    #[test]
    fn unity_path_loss_distance() {
        let lambda = SPEED_OF_LIGHT / 315e9;
        let cfg = LinkConfig { distance_m: lambda / (4.0 * std::f64::consts::PI), ..no_gain() };
        assert!((received_power(3.0, &cfg) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_distance() {
        let a = free_space_loss_db(10.0, 315e9);
        let b = free_space_loss_db(20.0, 315e9);
        assert_relative_eq!(b - a, 20.0 * 2f64.log10(), epsilon = 1e-12);
    }

    #[test]
    fn thermal_noise() {
        let cfg = LinkConfig::default();
        assert!((noise_power(&cfg) - -83.9752).abs() < 1e-3);
        let wide = LinkConfig { bandwidth_hz: 1e10, ..cfg.clone() };
        assert_relative_eq!(noise_power(&wide) - noise_power(&cfg), 10.0, epsilon = 1e-12);
        let hz = LinkConfig { bandwidth_hz: 1.0, ..cfg };
        assert!((noise_power(&hz) - -173.9752).abs() < 1e-3);
    }

    #[test]
    fn snr_and_required_power_are_inverse() {
        let cfg = LinkConfig::default();
        for p in [-20.0, 0.0, 4.0] {
            assert_relative_eq!(required_tx_power(link_snr_db(p, &cfg), &cfg), p, epsilon = 1e-12);
        }
    }

    #[test]
    fn validation() {
        assert!(LinkConfig::default().validate().is_ok());
        assert!(LinkConfig { distance_m: 0.0, ..LinkConfig::default() }.validate().is_err());
        assert!(LinkConfig { g_t_dbi: f64::NAN, ..LinkConfig::default() }.validate().is_err());
    }

    /// Exact Gray-coded PAM bit error probability by enumeration.
    fn exact_gray_qam_ber(order: u32, es_n0_db: f64) -> f64 {
        let side = (order as f64).sqrt() as i64;
        let k = side.trailing_zeros();
        let snr = 10f64.powf(es_n0_db / 10.0);
        let d = (1.5 / (order as f64 - 1.0)).sqrt(); // half spacing
        let sigma = (1.0 / (2.0 * snr)).sqrt();
        let gray = |i: i64| i ^ (i >> 1);
        let mut total = 0.0;
        for tx in 0..side {
            for rx in 0..side {
                if rx == tx {
                    continue;
                }
                let level = |i: i64| (2 * i - (side - 1)) as f64 * d;
                let lo = if rx == 0 { f64::NEG_INFINITY } else { level(rx) - d };
                let hi = if rx == side - 1 { f64::INFINITY } else { level(rx) + d };
                let x = level(tx);
                let p = q_function((lo - x) / sigma) - q_function((hi - x) / sigma);
                total += p * (gray(tx) ^ gray(rx)).count_ones() as f64;
            }
        }
        total / (side as f64 * k as f64)
    }

    #[test]
    fn approximation_tracks_exact_ber() {
        for m in [4, 16, 64] {
            for snr in [14.0, 18.0, 22.0, 26.0] {
                let approx = gray_qam_ber(m, snr);
                let exact = exact_gray_qam_ber(m, snr);
                if exact > 1e-6 {
                    assert!(((approx - exact) / exact).abs() < 0.05, "M={m} snr={snr}: {approx} vs {exact}");
                }
            }
        }
        assert_relative_eq!(gray_qam_ber(4, 10.0), exact_gray_qam_ber(4, 10.0), max_relative = 1e-12);
    }
}
