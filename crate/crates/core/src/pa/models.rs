use serde::{Deserialize, Serialize};

use super::AmplitudePhase;
use crate::error::{Bound, Error, Result};
use crate::poly::horner;
use crate::units::{dbm_to_volts, volts_to_dbm};

fn check_amplitude(what: &'static str, rho: f64) -> Result<()> {
    if !rho.is_finite() {
        return Err(Error::Domain {
            what,
            value: rho,
            reason: "amplitude must be finite",
        });
    }
    if rho < 0.0 {
        return Err(Error::Domain {
            what,
            value: rho,
            reason: "amplitude must be nonnegative",
        });
    }
    Ok(())
}

fn all_finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

/// Modified Rapp model: smooth limiter for AM-AM plus a rational AM-PM term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RappParams {
    /// Small-signal voltage gain.
    pub g_lin: f64,
    /// Saturation voltage (V).
    pub v_sat: f64,
    /// Smoothness factor.
    pub p: f64,
    /// AM-PM scale (degrees·V^−q1).
    pub a_pm: f64,
    /// AM-PM knee (V).
    pub b_pm: f64,
    pub q1: f64,
    pub q2: f64,
}

impl RappParams {
    /// Parameters extracted at 315 GHz.
    pub const fn reference_315ghz() -> Self {
        Self {
            g_lin: 13.0732,
            v_sat: 0.0559,
            p: 0.878,
            a_pm: -1.7204e5,
            b_pm: 8.5695e-3,
            q1: 1.6949,
            q2: 1.7404,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !all_finite(&[self.g_lin, self.v_sat, self.p, self.a_pm, self.b_pm, self.q1, self.q2]) {
            return Err(Error::InvalidParams("Rapp parameters must be finite".into()));
        }
        if self.g_lin <= 0.0 || self.v_sat <= 0.0 || self.p <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "Rapp requires g_lin, v_sat, p > 0 (got {}, {}, {})",
                self.g_lin, self.v_sat, self.p
            )));
        }
        if self.b_pm <= 0.0 || self.q2 <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "Rapp requires b_pm, q2 > 0 (got {}, {})",
                self.b_pm, self.q2
            )));
        }
        Ok(())
    }

    /// `G·x / (1 + |G·x/Vsat|^{2p})^{1/(2p)}`, rearranged above saturation
    /// so large inputs cannot overflow.
    pub fn amplitude_unchecked(&self, rho: f64) -> f64 {
        let two_p = 2.0 * self.p;
        let u = self.g_lin * rho / self.v_sat;
        if u <= 1.0 {
            self.g_lin * rho / (1.0 + u.powf(two_p)).powf(1.0 / two_p)
        } else {
            self.v_sat / (1.0 + u.powf(-two_p)).powf(1.0 / two_p)
        }
    }

    pub fn phase_unchecked(&self, rho: f64) -> f64 {
        self.a_pm * rho.powf(self.q1) / (1.0 + (rho / self.b_pm).abs().powf(self.q2))
    }

    /// Input amplitude of the 1-dB compression point, in closed form
    /// `(Vsat/G)·(10^{p/10} − 1)^{1/(2p)}`.
    pub fn compression_point_1db(&self) -> f64 {
        let a = self.p / 10.0;
        // ln(10^a − 1) without overflow for large p
        let ln_term = a * std::f64::consts::LN_10 + (-(10f64.powf(-a))).ln_1p();
        self.v_sat / self.g_lin * (ln_term / (2.0 * self.p)).exp()
    }

    /// Input amplitude at which the ideal inverse diverges, `Vsat/G`.
    pub fn saturation_input(&self) -> f64 {
        self.v_sat / self.g_lin
    }
}

impl AmplitudePhase for RappParams {
    fn amplitude(&self, rho: f64) -> Result<f64> {
        check_amplitude("rapp_amplitude", rho)?;
        Ok(self.amplitude_unchecked(rho))
    }

    fn phase_deg(&self, rho: f64) -> Result<f64> {
        check_amplitude("rapp_phase", rho)?;
        Ok(self.phase_unchecked(rho))
    }
}

/// One branch of Saleh's general form `α·x^n / (1 + β·x²)^ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SalehBranch {
    pub alpha: f64,
    pub beta: f64,
    pub n: u32,
    pub nu: u32,
}

impl SalehBranch {
    pub fn eval(&self, x: f64) -> f64 {
        self.alpha * x.powi(self.n as i32) / (1.0 + self.beta * x * x).powi(self.nu as i32)
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !all_finite(&[self.alpha, self.beta]) {
            return Err(Error::InvalidParams(format!("Saleh {name} branch must be finite")));
        }
        if self.beta <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "Saleh {name} branch requires beta > 0, got {}",
                self.beta
            )));
        }
        if !(1..=3).contains(&self.n) || !(1..=2).contains(&self.nu) {
            return Err(Error::InvalidParams(format!(
                "Saleh {name} branch exponents must satisfy n ∈ {{1,2,3}}, ν ∈ {{1,2}} (got n={}, ν={})",
                self.n, self.nu
            )));
        }
        Ok(())
    }
}

/// Saleh model. The classic form uses `n = 1` for AM-AM and `n = 2` for
/// AM-PM, both with `ν = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SalehParams {
    pub amplitude: SalehBranch,
    pub phase: SalehBranch,
}

impl SalehParams {
    pub const fn classic(alpha1: f64, beta1: f64, alpha2: f64, beta2: f64) -> Self {
        Self {
            amplitude: SalehBranch { alpha: alpha1, beta: beta1, n: 1, nu: 1 },
            phase: SalehBranch { alpha: alpha2, beta: beta2, n: 2, nu: 1 },
        }
    }

    pub const fn reference_315ghz() -> Self {
        Self::classic(10.127, 5.995e3, -595_236.026, 11_640.052)
    }

    pub fn validate(&self) -> Result<()> {
        self.amplitude.validate("amplitude")?;
        self.phase.validate("phase")
    }
}

impl AmplitudePhase for SalehParams {
    fn amplitude(&self, rho: f64) -> Result<f64> {
        check_amplitude("saleh_amplitude", rho)?;
        Ok(self.amplitude.eval(rho))
    }

    fn phase_deg(&self, rho: f64) -> Result<f64> {
        check_amplitude("saleh_phase", rho)?;
        Ok(self.phase.eval(rho))
    }
}

/// Ghorbani model, `y1·x^{y2}/(1 + y3·x^{y2}) + y4·x` and likewise for `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhorbaniParams {
    pub y: [f64; 4],
    pub z: [f64; 4],
}

impl GhorbaniParams {
    pub const fn reference_315ghz() -> Self {
        Self {
            y: [101.934, 1.26, 1728.859, -0.0174],
            z: [-1.667e5, 1.678, 2.981e3, 1.418e2],
        }
    }

    pub fn eval_branch(c: &[f64; 4], x: f64) -> f64 {
        let t = x.powf(c[1]);
        c[0] * t / (1.0 + c[2] * t) + c[3] * x
    }

    pub fn validate(&self) -> Result<()> {
        if !all_finite(&self.y) || !all_finite(&self.z) {
            return Err(Error::InvalidParams("Ghorbani parameters must be finite".into()));
        }
        for (name, c) in [("y", &self.y), ("z", &self.z)] {
            if c[1] > 0.0 && c[2] < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "Ghorbani {name}3 must be nonnegative when {name}2 > 0 (got {})",
                    c[2]
                )));
            }
        }
        Ok(())
    }
}

impl AmplitudePhase for GhorbaniParams {
    fn amplitude(&self, rho: f64) -> Result<f64> {
        check_amplitude("ghorbani_amplitude", rho)?;
        Ok(Self::eval_branch(&self.y, rho))
    }

    fn phase_deg(&self, rho: f64) -> Result<f64> {
        check_amplitude("ghorbani_phase", rho)?;
        Ok(Self::eval_branch(&self.z, rho))
    }
}

/// How the polynomial model treats input powers outside its fitted range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangePolicy {
    #[default]
    Error,
    /// Below the range the small-signal gain and phase at the lower edge
    /// are extended; above it the edge output power and phase are held.
    Clamp,
}

/// Power-series AM-AM (dBm → dBm) and AM-PM (dBm → degrees) model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyParams {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub valid_range: [f64; 2],
    #[serde(default)]
    pub range_policy: RangePolicy,
}

impl PolyParams {
    /// Order-9 coefficients extracted at 315 GHz over `[-40, 0]` dBm.
    pub fn table_315ghz() -> Self {
        Self {
            a: vec![
                4.93685,
                -0.0137525,
                -0.0376565,
                -0.00671547,
                -0.000751183,
                -4.90554e-05,
                -2.02848e-06,
                -5.08754e-08,
                -6.93973e-10,
                -3.92275e-12,
            ],
            b: vec![
                -46.00981,
                -0.475385,
                0.172884,
                0.029412,
                0.00550807,
                0.000508238,
                2.42772e-05,
                6.33498e-07,
                8.63223e-09,
                4.82313e-11,
            ],
            valid_range: [-40.0, 0.0],
            range_policy: RangePolicy::Error,
        }
    }

    pub fn order(&self) -> usize {
        self.a.len().max(self.b.len()).saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.len() < 2 || self.b.len() < 2 {
            return Err(Error::InvalidParams("polynomial model needs order ≥ 1".into()));
        }
        if !all_finite(&self.a) || !all_finite(&self.b) || !all_finite(&self.valid_range) {
            return Err(Error::InvalidParams("polynomial coefficients must be finite".into()));
        }
        if self.valid_range[0] >= self.valid_range[1] {
            return Err(Error::InvalidParams(format!(
                "valid_range must be increasing, got {:?}",
                self.valid_range
            )));
        }
        Ok(())
    }

    fn check_range(&self, what: &'static str, alpha_i: f64) -> Result<()> {
        let [lo, hi] = self.valid_range;
        if alpha_i.is_nan() {
            return Err(Error::Domain { what, value: alpha_i, reason: "input power is NaN" });
        }
        if alpha_i < lo {
            return Err(Error::Range { what, value: alpha_i, bound: lo, side: Bound::Lower });
        }
        if alpha_i > hi {
            return Err(Error::Range { what, value: alpha_i, bound: hi, side: Bound::Upper });
        }
        Ok(())
    }

    /// Output power (dBm) for input power `alpha_i` (dBm).
    pub fn amplitude_dbm(&self, alpha_i: f64) -> Result<f64> {
        match self.range_policy {
            RangePolicy::Error => {
                self.check_range("poly_amplitude", alpha_i)?;
                Ok(horner(&self.a, alpha_i))
            }
            RangePolicy::Clamp => {
                let [lo, hi] = self.valid_range;
                if alpha_i.is_nan() {
                    return self.check_range("poly_amplitude", alpha_i).map(|_| f64::NAN);
                }
                if alpha_i < lo {
                    Ok(horner(&self.a, lo) + (alpha_i - lo))
                } else if alpha_i > hi {
                    Ok(horner(&self.a, hi))
                } else {
                    Ok(horner(&self.a, alpha_i))
                }
            }
        }
    }

    /// Output phase shift (degrees) for input power `alpha_i` (dBm).
    pub fn phase_dbm(&self, alpha_i: f64) -> Result<f64> {
        match self.range_policy {
            RangePolicy::Error => {
                self.check_range("poly_phase", alpha_i)?;
                Ok(horner(&self.b, alpha_i))
            }
            RangePolicy::Clamp => {
                if alpha_i.is_nan() {
                    return self.check_range("poly_phase", alpha_i).map(|_| f64::NAN);
                }
                let [lo, hi] = self.valid_range;
                Ok(horner(&self.b, alpha_i.clamp(lo, hi)))
            }
        }
    }
}

impl AmplitudePhase for PolyParams {
    fn amplitude(&self, rho: f64) -> Result<f64> {
        check_amplitude("poly_amplitude", rho)?;
        if rho == 0.0 {
            return Ok(0.0);
        }
        Ok(dbm_to_volts(self.amplitude_dbm(volts_to_dbm(rho))?))
    }

    fn phase_deg(&self, rho: f64) -> Result<f64> {
        check_amplitude("poly_phase", rho)?;
        if rho == 0.0 {
            return Ok(0.0);
        }
        self.phase_dbm(volts_to_dbm(rho))
    }
}

/// Distortion-free amplifier `z = G·y`, used as the ideal reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGain {
    pub gain: f64,
}

impl LinearGain {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain > 0.0) || !self.gain.is_finite() {
            return Err(Error::InvalidParams(format!("linear gain must be positive, got {}", self.gain)));
        }
        Ok(())
    }
}

impl AmplitudePhase for LinearGain {
    fn amplitude(&self, rho: f64) -> Result<f64> {
        check_amplitude("linear_amplitude", rho)?;
        Ok(self.gain * rho)
    }

    fn phase_deg(&self, rho: f64) -> Result<f64> {
        check_amplitude("linear_phase", rho)?;
        Ok(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const RAPP: RappParams = RappParams::reference_315ghz();

    #[test]
    fn rapp_amplitude_examples() {
        assert_eq!(RAPP.amplitude(0.0).unwrap(), 0.0);
        assert_relative_eq!(RAPP.amplitude(10.0).unwrap(), 0.0559, max_relative = 1e-3);
        assert_relative_eq!(RAPP.amplitude(1e-4).unwrap(), 1.3073e-3, max_relative = 1e-3);
        assert!(RAPP.amplitude(-1e-3).is_err());
        assert!(RAPP.amplitude(f64::NAN).is_err());
        assert!(RAPP.amplitude(f64::INFINITY).is_err());
    }

    #[test]
    fn rapp_amplitude_scalar_oracle() {
        // direct transcription of the formula, no overflow guard
        let oracle = |x: f64| {
            let p = RAPP;
            p.g_lin * x / (1.0 + (p.g_lin * x / p.v_sat).abs().powf(2.0 * p.p)).powf(1.0 / (2.0 * p.p))
        };
        for &x in &[1e-6, 1e-4, 1.823e-3, 4e-3, 0.02, 0.5] {
            assert_relative_eq!(RAPP.amplitude(x).unwrap(), oracle(x), max_relative = 1e-13);
        }
    }

    #[test]
    fn rapp_phase_examples() {
        assert_eq!(RAPP.phase_deg(0.0).unwrap(), 0.0);
        assert_relative_eq!(RAPP.phase_deg(8.5695e-3).unwrap(), -26.97, max_relative = 1e-3);
        // at ρ = B the denominator is exactly 2
        let at_b = RAPP.a_pm * RAPP.b_pm.powf(RAPP.q1) / 2.0;
        assert_relative_eq!(RAPP.phase_deg(RAPP.b_pm).unwrap(), at_b, max_relative = 1e-14);
        // independent high-precision evaluation at the compression input
        assert_relative_eq!(RAPP.phase_deg(1.823e-3).unwrap(), -3.668_722_380_203_04, max_relative = 1e-9);
    }

    #[test]
    fn compression_point_closed_form() {
        assert_relative_eq!(RAPP.compression_point_1db(), 1.823e-3, max_relative = 1e-3);
    }

    #[test]
    fn compression_point_scaling() {
        let mut doubled = RAPP;
        doubled.g_lin *= 2.0;
        doubled.v_sat *= 2.0;
        assert_relative_eq!(doubled.compression_point_1db(), RAPP.compression_point_1db(), max_relative = 1e-14);
        let mut g2 = RAPP;
        g2.g_lin *= 2.0;
        assert_relative_eq!(g2.compression_point_1db(), 0.5 * RAPP.compression_point_1db(), max_relative = 1e-14);
    }

    #[test]
    fn saleh_examples() {
        let s = SalehParams::reference_315ghz();
        assert_eq!(s.amplitude(0.0).unwrap(), 0.0);
        assert_eq!(s.phase_deg(0.0).unwrap(), 0.0);
        let x_peak = 1.0 / s.amplitude.beta.sqrt();
        assert_relative_eq!(x_peak, 1.2916e-2, max_relative = 1e-4);
        let peak = s.amplitude(x_peak).unwrap();
        assert_relative_eq!(peak, s.amplitude.alpha / (2.0 * s.amplitude.beta.sqrt()), max_relative = 1e-14);
        assert_relative_eq!(peak, 6.540e-2, max_relative = 1e-3);
        assert!(s.amplitude(x_peak * 1.01).unwrap() < peak);
        assert!(s.amplitude(x_peak * 0.99).unwrap() < peak);
        assert_relative_eq!(s.phase_deg(1e4).unwrap(), -51.14, max_relative = 1e-3);
        assert!(s.amplitude(f64::NAN).is_err());
    }

    #[test]
    fn ghorbani_examples() {
        let g = GhorbaniParams::reference_315ghz();
        assert_eq!(g.amplitude(0.0).unwrap(), 0.0);
        assert_eq!(g.phase_deg(0.0).unwrap(), 0.0);
        let x = 1e6;
        let asym = g.amplitude(x).unwrap() - g.y[3] * x;
        assert_relative_eq!(asym, 5.896e-2, max_relative = 1e-3);
        // high-precision scalar evaluation at 2 mV
        assert_relative_eq!(g.amplitude(2e-3).unwrap(), 2.397_899_479_172_98e-2, max_relative = 1e-9);
        assert_relative_eq!(g.phase_deg(2e-3).unwrap(), -4.249_063_202_633_72, max_relative = 1e-9);
        assert!(g.amplitude(-1e-3).is_err());
    }

    #[test]
    fn ghorbani_rejects_negative_denominator_coefficient() {
        let mut g = GhorbaniParams::reference_315ghz();
        g.y[2] = -1.0;
        assert!(g.validate().is_err());
    }

    #[test]
    fn poly_examples() {
        let p = PolyParams::table_315ghz();
        assert_eq!(p.amplitude_dbm(0.0).unwrap(), 4.93685);
        assert_eq!(p.phase_dbm(0.0).unwrap(), -46.00981);
        match p.amplitude_dbm(-45.0) {
            Err(Error::Range { bound, side, .. }) => {
                assert_eq!(bound, -40.0);
                assert_eq!(side, Bound::Lower);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(p.amplitude_dbm(0.5).is_err());
    }

    #[test]
    fn poly_horner_against_extended_sum() {
        // compensated (Kahan-Babuska) power sum as the independent route
        let p = PolyParams::table_315ghz();
        let x = -20.0f64;
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut pow = 1.0f64;
        for &c in &p.a {
            let term = c * pow;
            let t = sum + term;
            comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
            sum = t;
            pow *= x;
        }
        assert_relative_eq!(p.amplitude_dbm(x).unwrap(), sum + comp, max_relative = 1e-12);
    }

    #[test]
    fn poly_clamp_policy() {
        let mut p = PolyParams::table_315ghz();
        p.range_policy = RangePolicy::Clamp;
        let edge = p.amplitude_dbm(-40.0).unwrap();
        assert_relative_eq!(p.amplitude_dbm(-50.0).unwrap(), edge - 10.0, epsilon = 1e-12);
        assert_eq!(p.amplitude_dbm(5.0).unwrap(), p.amplitude_dbm(0.0).unwrap());
        assert_eq!(p.phase_dbm(-60.0).unwrap(), p.phase_dbm(-40.0).unwrap());
    }

    #[test]
    fn poly_agrees_with_rapp_mid_range() {
        // two independent extractions of the same device should be close
        let p = PolyParams::table_315ghz();
        let rho = dbm_to_volts(-10.0);
        let d = volts_to_dbm(p.amplitude(rho).unwrap()) - volts_to_dbm(RAPP.amplitude(rho).unwrap());
        assert!(d.abs() < 0.3, "{d}");
    }

    #[test]
    fn volt_models_finite_on_dense_grid() {
        let s = SalehParams::reference_315ghz();
        let g = GhorbaniParams::reference_315ghz();
        let n = 1_000_000;
        for i in 0..=n {
            let x = i as f64 / n as f64;
            for v in [
                RAPP.amplitude(x).unwrap(),
                RAPP.phase_deg(x).unwrap(),
                s.amplitude(x).unwrap(),
                s.phase_deg(x).unwrap(),
                g.amplitude(x).unwrap(),
                g.phase_deg(x).unwrap(),
            ] {
                assert!(v.is_finite(), "non-finite at x={x}");
            }
        }
    }
}
