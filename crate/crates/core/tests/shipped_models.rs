use std::path::PathBuf;

use approx::assert_relative_eq;
use subthz_pa::io::load_model;
use subthz_pa::pa::{AmplitudePhase, ModelKind, ModelParams, RappParams};
use subthz_pa::units::{dbm_to_volts, volts_to_dbm};

fn model_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/models").join(name)
}

#[test]
fn polynomial_table_constant_terms() {
    let (m, meta) = load_model(model_path("poly_315ghz.json")).unwrap();
    assert_eq!(m.kind(), ModelKind::Polynomial);
    assert!(meta.source.is_some());
    let ModelParams::Polynomial(p) = &m.params else { unreachable!() };
    assert_eq!(p.order(), 9);
    assert_eq!(p.amplitude_dbm(0.0).unwrap(), 4.93685);
    assert_eq!(p.phase_dbm(0.0).unwrap(), -46.00981);
}

#[test]
fn rapp_file_matches_reference() {
    let (m, _) = load_model(model_path("rapp_315ghz.json")).unwrap();
    assert_eq!(m.as_rapp(), Some(&RappParams::reference_315ghz()));
    let out = volts_to_dbm(m.amplitude(dbm_to_volts(-40.0)).unwrap());
    assert!((out - -17.7).abs() < 0.05, "{out}");
}

#[test]
fn models_agree_in_mid_range() {
    // all four fits describe the same amplifier; within the fitted range they
    // should stay within a few dB of each other
    let models: Vec<_> = ["poly", "rapp", "saleh", "ghorbani"]
        .iter()
        .map(|k| load_model(model_path(&format!("{k}_315ghz.json"))).unwrap().0)
        .collect();
    for pin in [-35.0, -25.0, -15.0, -5.0] {
        let rho = dbm_to_volts(pin);
        let outs: Vec<f64> = models.iter().map(|m| volts_to_dbm(m.amplitude(rho).unwrap())).collect();
        let spread = outs.iter().cloned().fold(f64::MIN, f64::max) - outs.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 3.0, "pin {pin}: {outs:?}");
    }
}

#[test]
fn saleh_and_ghorbani_anchor_values() {
    let (s, _) = load_model(model_path("saleh_315ghz.json")).unwrap();
    let peak_rho = 1.29153e-2;
    assert_relative_eq!(s.amplitude(peak_rho).unwrap(), 6.53968e-2, max_relative = 1e-4);
    let (g, _) = load_model(model_path("ghorbani_315ghz.json")).unwrap();
    assert_relative_eq!(g.amplitude(2e-3).unwrap(), 2.39789947917298e-2, max_relative = 1e-12);
    assert_relative_eq!(g.phase_deg(2e-3).unwrap(), -4.24906320263372, max_relative = 1e-12);
}
