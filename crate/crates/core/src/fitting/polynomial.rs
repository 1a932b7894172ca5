use serde::Serialize;

use super::{AmplitudeUnits, FitReport, MeasurementCurve};
use crate::error::{Error, Result};
use crate::pa::{ModelParams, PaModel, PolyParams, RangePolicy};
use crate::poly;

/// Least-squares order-`order` polynomial for AM-AM (dBm → dBm) and AM-PM
/// (dBm → degrees), fitted independently. Residuals are RMS dB and degrees.
pub fn fit_polynomial(curve: &MeasurementCurve, order: usize) -> Result<(PolyParams, FitReport)> {
    if order < 1 {
        return Err(Error::InvalidParams("polynomial order must be ≥ 1".into()));
    }
    if curve.len() <= order {
        return Err(Error::Data(format!(
            "order {order} needs more than {order} points, curve has {}",
            curve.len()
        )));
    }
    let x = curve.p_in_dbm();
    let y_amp = curve.p_out_dbm();
    let y_ph = curve.phase_deg();
    let a = poly::fit(&x, &y_amp, order)?;
    let b = poly::fit(&x, &y_ph, order)?;
    let residual_amplitude = poly::rms_residual(&a, &x, &y_amp);
    let residual_phase = poly::rms_residual(&b, &x, &y_ph);
    let params = PolyParams {
        a,
        b,
        valid_range: [x[0], x[x.len() - 1]],
        range_policy: RangePolicy::Error,
    };
    let report = FitReport {
        model: PaModel::new(curve.fc_hz, ModelParams::Polynomial(params.clone()))?,
        residual_amplitude,
        residual_phase,
        amplitude_units: AmplitudeUnits::Decibel,
        iterations: 1,
        converged: true,
        restarts: 1,
        best_restart: [0, 0],
        seed: 0,
    };
    Ok((params, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderError {
    pub order: usize,
    /// RMS AM-AM error (dB); `None` when the fit was numerically impossible.
    pub amplitude_db: Option<f64>,
    /// RMS AM-PM error (degrees).
    pub phase_deg: Option<f64>,
}

/// Fit residual as a function of polynomial order. Orders whose system is
/// rank deficient are reported with empty residuals rather than failing
/// the whole table.
pub fn fit_error_vs_order(curve: &MeasurementCurve, orders: &[usize]) -> Vec<OrderError> {
    orders
        .iter()
        .map(|&order| match fit_polynomial(curve, order) {
            Ok((_, r)) => OrderError {
                order,
                amplitude_db: Some(r.residual_amplitude),
                phase_deg: Some(r.residual_phase),
            },
            Err(_) => OrderError { order, amplitude_db: None, phase_deg: None },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pa::PolyParams;
    use approx::assert_relative_eq;

    fn grid() -> Vec<f64> {
        (0..=80).map(|i| -40.0 + 0.5 * i as f64).collect()
    }

    fn table_curve() -> MeasurementCurve {
        let t = PolyParams::table_315ghz();
        MeasurementCurve::from_fn(315e9, &grid(), |p| {
            (poly::horner(&t.a, p), poly::horner(&t.b, p))
        })
        .unwrap()
    }

    #[test]
    fn recovers_generating_order_nine_polynomial() {
        let t = PolyParams::table_315ghz();
        let (fit, report) = fit_polynomial(&table_curve(), 9).unwrap();
        for (got, want) in fit.a.iter().zip(&t.a).chain(fit.b.iter().zip(&t.b)) {
            assert_relative_eq!(*got, *want, max_relative = 1e-6);
        }
        assert!(report.residual_amplitude < 1e-9);
        assert_eq!(fit.valid_range, [-40.0, 0.0]);
    }

    #[test]
    fn higher_order_never_fits_worse() {
        let c = table_curve();
        let (_, r3) = fit_polynomial(&c, 3).unwrap();
        let (_, r9) = fit_polynomial(&c, 9).unwrap();
        assert!(r9.residual_amplitude <= r3.residual_amplitude);
        assert!(r9.residual_phase <= r3.residual_phase);
    }

    #[test]
    fn residual_is_orthogonal_to_columns() {
        // perturb an exact curve so the residual is nonzero
        let c = table_curve();
        let x = c.p_in_dbm();
        let y: Vec<f64> = c.p_out_dbm().iter().enumerate().map(|(i, v)| v + 0.05 * (i as f64).sin()).collect();
        let coef = poly::fit(&x, &y, 5).unwrap();
        let r: Vec<f64> = x.iter().zip(&y).map(|(&xi, &yi)| yi - poly::horner(&coef, xi)).collect();
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        for k in 0..=5 {
            let col: Vec<f64> = x.iter().map(|v| (v / 40.0).powi(k)).collect();
            let cn = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            let dot: f64 = col.iter().zip(&r).map(|(a, b)| a * b).sum();
            assert!(dot.abs() / (cn * rn) < 1e-8, "column {k}: {}", dot / (cn * rn));
        }
    }

    #[test]
    fn error_table_is_nonincreasing_and_exact_at_generating_order() {
        let q = [1.0, 0.3, -0.02, 0.004, 1e-4, 2e-6];
        let c = MeasurementCurve::from_fn(3e11, &grid(), |p| (poly::horner(&q, p), -poly::horner(&q, p))).unwrap();
        let table = fit_error_vs_order(&c, &[1, 2, 3, 4, 5, 6, 7, 9]);
        for w in table.windows(2) {
            assert!(w[1].amplitude_db.unwrap() <= w[0].amplitude_db.unwrap() + 1e-12);
        }
        for row in table.iter().filter(|r| r.order >= 5) {
            assert!(row.amplitude_db.unwrap() < 1e-10, "{row:?}");
        }
        assert!(table[table.len() - 1].amplitude_db <= table[0].amplitude_db);
    }

    #[test]
    fn rejects_bad_orders() {
        let c = table_curve();
        assert!(fit_polynomial(&c, 0).is_err());
        let short = MeasurementCurve::from_fn(3e11, &[-40.0, -30.0, -20.0], |p| (p, 0.0)).unwrap();
        assert!(matches!(fit_polynomial(&short, 3), Err(Error::Data(_))));
    }
}
