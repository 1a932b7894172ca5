//! Measurement CSV reader.
//!
//! One row per CW sample with header `freq_hz,pin_dbm,pout_dbm,phase_deg`.
//! Columns may appear in any order; extra columns are ignored.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fitting::{MeasurementCurve, MeasurementPoint};

pub const MEASUREMENT_HEADER: [&str; 4] = ["freq_hz", "pin_dbm", "pout_dbm", "phase_deg"];

/// Parses measurement rows into one curve per distinct frequency, sorted by
/// frequency, each sorted by input power. With `reference_pin_dbm` set, the
/// phase of every curve is unwrapped and referenced to that input power.
pub fn parse_measurement_csv(input: impl Read, reference_pin_dbm: Option<f64>) -> Result<Vec<MeasurementCurve>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .clone();
    let mut columns = [0usize; 4];
    for (slot, name) in columns.iter_mut().zip(MEASUREMENT_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse { line: 1, message: format!("missing column `{name}`") })?;
    }

    let mut groups: BTreeMap<u64, Vec<MeasurementPoint>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut values = [0.0; 4];
        for ((v, &col), name) in values.iter_mut().zip(&columns).zip(MEASUREMENT_HEADER) {
            let field = record.get(col).unwrap_or("");
            *v = field.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| Error::Parse {
                line,
                message: format!("column `{name}`: cannot parse `{field}` as a finite number"),
            })?;
        }
        let [freq, p_in_dbm, p_out_dbm, phase_deg] = values;
        if freq <= 0.0 {
            return Err(Error::Parse { line, message: format!("frequency must be positive, got {freq}") });
        }
        groups.entry(freq.to_bits()).or_default().push(MeasurementPoint { p_in_dbm, p_out_dbm, phase_deg });
    }
    if groups.is_empty() {
        return Err(Error::Data("measurement file contains no rows".into()));
    }

    let mut curves = groups
        .into_iter()
        .map(|(bits, mut points)| {
            points.sort_by(|a, b| a.p_in_dbm.total_cmp(&b.p_in_dbm));
            let mut curve = MeasurementCurve::new(f64::from_bits(bits), points)?;
            if let Some(reference) = reference_pin_dbm {
                curve.normalize_phase(reference)?;
            }
            Ok(curve)
        })
        .collect::<Result<Vec<_>>>()?;
    curves.sort_by(|a, b| a.fc_hz.total_cmp(&b.fc_hz));
    Ok(curves)
}

pub fn read_measurement_csv(path: &Path, reference_pin_dbm: Option<f64>) -> Result<Vec<MeasurementCurve>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_measurement_csv(std::io::BufReader::new(file), reference_pin_dbm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<MeasurementCurve>> {
        parse_measurement_csv(text.as_bytes(), None)
    }

    #[test]
    fn single_row_values() {
        let c = parse("freq_hz,pin_dbm,pout_dbm,phase_deg\n3.15e11,-40,-17.7,0.0\n3.15e11,-30,-7.7,0.1\n").unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].fc_hz, 315e9);
        let p = c[0].points[0];
        assert_eq!((p.p_in_dbm, p.p_out_dbm, p.phase_deg), (-40.0, -17.7, 0.0));
    }

    #[test]
    fn groups_by_frequency_and_sorts() {
        let text = "freq_hz,pin_dbm,pout_dbm,phase_deg\n\
                    3.0e11,-20,1,2\n3.15e11,-30,0,0\n3.0e11,-40,-18,0\n3.15e11,-40,-17,0\n";
        let c = parse(text).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].fc_hz, 300e9);
        assert_eq!(c[0].p_in_dbm(), vec![-40.0, -20.0]);
        assert_eq!(c[1].p_in_dbm(), vec![-40.0, -30.0]);
    }

    #[test]
    fn column_order_is_free() {
        let c = parse("pin_dbm,phase_deg,freq_hz,pout_dbm\n-40,1,1e9,-20\n-30,2,1e9,-10\n").unwrap();
        assert_eq!(c[0].points[1].p_out_dbm, -10.0);
        assert_eq!(c[0].points[1].phase_deg, 2.0);
    }

    #[test]
    fn missing_column_is_named() {
        let err = parse("freq_hz,pin_dbm,phase_deg\n1e9,-40,0\n").unwrap_err();
        match err {
            Error::Parse { line: 1, message } => assert!(message.contains("pout_dbm"), "{message}"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = parse("freq_hz,pin_dbm,pout_dbm,phase_deg\n1e9,-40,-20,0\n1e9,abc,-10,0\n").unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("pin_dbm"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn duplicate_input_power_is_data_error() {
        let err = parse("freq_hz,pin_dbm,pout_dbm,phase_deg\n1e9,-40,-20,0\n1e9,-40,-19,0\n").unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn optional_phase_normalization() {
        let text = "freq_hz,pin_dbm,pout_dbm,phase_deg\n1e9,-40,-20,170\n1e9,-30,-10,-170\n";
        let c = parse_measurement_csv(text.as_bytes(), Some(-40.0)).unwrap();
        assert_eq!(c[0].phase_deg(), vec![0.0, 20.0]);
    }

    #[test]
    fn empty_file_is_data_error() {
        assert!(matches!(parse("freq_hz,pin_dbm,pout_dbm,phase_deg\n"), Err(Error::Data(_))));
    }
}
