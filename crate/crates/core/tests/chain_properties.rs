use subthz_pa::link::{
    run_chain, sweep_ber_vs_snr, sweep_pa_input_vs_ibo, BerOptions, ChainConfig, Noise, SnrMode,
};
use subthz_pa::pa::{PaModel, RappParams};
use subthz_pa::predistortion::Predistorter;
use subthz_pa::waveforms::WaveformConfig;

fn rapp() -> RappParams {
    RappParams::reference_315ghz()
}

fn ideal_pd() -> Predistorter {
    Predistorter::ideal(rapp(), 4e-3).unwrap()
}

#[test]
fn ideal_predistortion_matches_linear_chain_at_high_backoff() {
    let r = rapp();
    for n in [1, 64] {
        let wf = WaveformConfig::new(64, n).with_symbols(8192);
        let noise = Noise::SnrDb(30.0);
        let lin = ChainConfig::new(wf.clone(), PaModel::linear(r.g_lin), 10.0, 3)
            .with_ibo_reference(r.compression_point_1db())
            .with_noise(noise);
        let pd = ChainConfig::new(wf, PaModel::rapp(315e9, r).unwrap(), 10.0, 3)
            .with_predistorter(Some(ideal_pd()))
            .with_noise(noise);
        let a = run_chain(&lin).unwrap().evm_db;
        let b = run_chain(&pd).unwrap().evm_db;
        assert!((a - b).abs() < 1.0, "N={n}: linear {a} vs predistorted {b}");
    }
}

#[test]
fn predistortion_needs_more_input_power_near_compression() {
    let m = PaModel::rapp(315e9, rapp()).unwrap();
    let wf = WaveformConfig::new(64, 256).with_symbols(8192);
    let none = sweep_pa_input_vs_ibo(&ChainConfig::new(wf.clone(), m.clone(), 0.0, 1), &[0.0, 10.0]).unwrap();
    let pd = sweep_pa_input_vs_ibo(&ChainConfig::new(wf, m, 0.0, 1).with_predistorter(Some(ideal_pd())), &[0.0, 10.0])
        .unwrap();
    let p = |r: &subthz_pa::link::SweepResult, i: usize| r.rows[i].mean_pa_input_dbm.unwrap();
    assert!(p(&pd, 0) > p(&none, 0));
    // the expansion grows as the drive approaches compression
    assert!(p(&pd, 0) - p(&pd, 1) > 10.0 + 1.0);
    assert!((p(&pd, 1) - p(&none, 1)).abs() < 0.5);
}

#[test]
fn independent_seeds_agree_statistically() {
    let m = PaModel::rapp(315e9, rapp()).unwrap();
    let base = ChainConfig::new(WaveformConfig::new(16, 1), m, 6.0, 10);
    let opts = BerOptions { min_errors: 400, max_bits: 4_000_000 };
    let a = sweep_ber_vs_snr(&base, &[14.0], &SnrMode::Direct, &opts).unwrap().rows.remove(0);
    let other = ChainConfig { seed: 11, ..base };
    let b = sweep_ber_vs_snr(&other, &[14.0], &SnrMode::Direct, &opts).unwrap().rows.remove(0);
    let (ba, bb) = (a.ber.unwrap(), b.ber.unwrap());
    let se = a.ber_std_err.unwrap().hypot(b.ber_std_err.unwrap());
    assert_ne!(a.bit_errors, b.bit_errors);
    assert!((ba - bb).abs() <= 3.0 * se, "{ba} vs {bb} (se {se})");
}

#[test]
fn evm_is_flat_without_predistortion() {
    let m = PaModel::rapp(315e9, rapp()).unwrap();
    let base = ChainConfig::new(WaveformConfig::new(64, 16), m, 10.0, 4);
    let r = subthz_pa::link::sweep_evm_vs_nsc(&base, &[16, 64, 256]).unwrap();
    let e: Vec<f64> = r.rows.iter().map(|r| r.evm_db.unwrap()).collect();
    let spread = e.iter().cloned().fold(f64::MIN, f64::max) - e.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 2.0, "{e:?}");
}
