//! Power and amplitude conversions.
//!
//! Envelope amplitudes are RMS volts across a 1-Ω reference, so the power
//! carried by an amplitude `ρ` is `ρ²` watts and `20·log10(ρ) + 30` dBm.

/// Reference impedance (Ω) of the amplitude/power convention.
pub const REFERENCE_OHMS: f64 = 1.0;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub fn volts_to_watts(rho: f64) -> f64 {
    rho * rho / REFERENCE_OHMS
}

pub fn watts_to_volts(p: f64) -> f64 {
    (p * REFERENCE_OHMS).sqrt()
}

pub fn volts_to_dbm(rho: f64) -> f64 {
    watts_to_dbm(volts_to_watts(rho))
}

pub fn dbm_to_volts(dbm: f64) -> f64 {
    watts_to_volts(dbm_to_watts(dbm))
}

pub fn watts_to_dbm(p: f64) -> f64 {
    10.0 * p.log10() + 30.0
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn one_milliwatt_is_zero_dbm() {
        assert_relative_eq!(watts_to_dbm(1e-3), 0.0, epsilon = 1e-12);
        assert_relative_eq!(dbm_to_volts(0.0), 1e-3f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn saturation_voltage_maps_near_five_dbm() {
        // 0.0559 V across 1 Ω
        assert_relative_eq!(volts_to_dbm(0.0559), 4.9482, epsilon = 1e-3);
    }

    #[test]
    fn volts_dbm_roundtrip() {
        for &v in &[1e-6, 3.2e-4, 0.05, 2.0] {
            assert_relative_eq!(dbm_to_volts(volts_to_dbm(v)), v, max_relative = 1e-12);
        }
    }
}
