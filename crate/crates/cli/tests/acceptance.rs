//! Acceptance checks, one line per criterion. Run with
//! `cargo test -p subthz-pa-cli --test acceptance`.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subthz_pa::fitting::fit_saleh_branch;
use subthz_pa::link::{
    free_space_loss_db, gray_qam_ber, noise_power, sweep_ber_vs_snr, sweep_evm_vs_nsc, BerOptions, ChainConfig,
    LinkConfig, SnrMode, SweepRow,
};
use subthz_pa::pa::{apply_pa_samples, compression_point_bisect, PaModel, RappParams};
use subthz_pa::predistortion::{Predistorter, DEFAULT_GRID_POINTS};
use subthz_pa::waveforms::WaveformConfig;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn rapp() -> RappParams {
    RappParams::reference_315ghz()
}

fn rapp_model() -> PaModel {
    PaModel::rapp(315e9, rapp()).unwrap()
}

fn pd(orders: Option<usize>) -> Predistorter {
    let ideal = Predistorter::ideal(rapp(), 4e-3).unwrap();
    match orders {
        Some(n) => ideal.with_polynomials(n, n, DEFAULT_GRID_POINTS).unwrap(),
        None => ideal,
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_subthz-pa"))
        .args(["eval-model", "--model"])
        .arg(data_dir().join("models/poly_315ghz.json"))
        .args(["--pin", "0"])
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    let text = String::from_utf8_lossy(&out.stdout);
    let field = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(key))
            .and_then(|v| v.parse().ok())
            .unwrap_or(f64::NAN)
    };
    let (a, th) = (field("pout_dbm="), field("phase_deg="));
    let pass = out.status.success()
        && (a - 4.93685).abs() <= 1e-9
        && (th + 46.00981).abs() <= 1e-9
        && within(elapsed, 1.0);
    outcome(pass, format!("pout={a} dBm phase={th} deg in {:.3} s", elapsed.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let p = pd(None);
    let r = rapp();
    let n = 10_000;
    let (mut worst_amp, mut worst_phase) = (0.0f64, 0.0f64);
    let x: Vec<Complex64> = (0..n)
        .map(|i| {
            let rho = 1e-6 + (0.99 * 4e-3 - 1e-6) * i as f64 / (n - 1) as f64;
            Complex64::from_polar(rho, 0.001 * i as f64)
        })
        .collect();
    let y: Vec<Complex64> = x.iter().map(|&v| p.apply_sample(v).0).collect();
    let z = apply_pa_samples(&y, &r).unwrap();
    for (xi, zi) in x.iter().zip(&z) {
        let g_rho = r.g_lin * xi.norm();
        worst_amp = worst_amp.max((zi.norm() - g_rho).abs() / g_rho);
        worst_phase = worst_phase.max((zi / xi).arg().to_degrees().abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst_amp < 1e-9 && worst_phase < 1e-6 && within(elapsed, 1.0),
        format!("max amplitude rel err {worst_amp:.2e}, max phase err {worst_phase:.2e} deg, {:.3} s", elapsed.as_secs_f64()),
    )
}

fn criterion_3() -> Outcome {
    let r = rapp();
    let closed = r.compression_point_1db();
    let bisect = compression_point_bisect(&r, 1e-7, 1.0).unwrap();
    let rel_anchor = (closed - 1.823e-3).abs() / 1.823e-3;
    let rel_bisect = (closed - bisect).abs() / closed;
    outcome(
        rel_anchor <= 1e-3 && rel_bisect <= 1e-4,
        format!("closed form {closed:.6e} V ({:.3}% from 1.823e-3), bisection {bisect:.6e} V (rel {rel_bisect:.1e})", 100.0 * rel_anchor),
    )
}

/// Minimizes `Σ (w − a − b·u)²` by compass search, `u = x²/max x²`.
fn compass_line_fit(u: &[f64], w: &[f64]) -> (f64, f64) {
    let f = |a: f64, b: f64| u.iter().zip(w).map(|(&u, &w)| (w - a - b * u).powi(2)).sum::<f64>();
    let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let (mut a, mut b) = (0.0, 0.0);
    let mut step = scale;
    let mut best = f(a, b);
    while step > 1e-15 * scale {
        let mut improved = false;
        for (da, db) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step), (step, -step), (-step, step)] {
            let v = f(a + da, b + db);
            if v < best {
                best = v;
                a += da;
                b += db;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (a, b)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5A1E);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let (n, nu) = [(1u32, 1u32), (2, 1), (1, 2), (3, 2)][k % 4];
        let alpha = rng.random_range(2.0..20.0);
        let beta = rng.random_range(1e3..2e4);
        let x: Vec<f64> = (1..=60).map(|i| 2e-4 * i as f64).collect();
        let z: Vec<f64> = x
            .iter()
            .map(|&x| alpha * x.powi(n as i32) / (1.0 + beta * x * x).powi(nu as i32) * (1.0 + rng.random_range(-0.02..0.02)))
            .collect();
        let fit = fit_saleh_branch(&x, &z, n, nu).unwrap();

        let x2max = x.iter().map(|v| v * v).fold(0.0, f64::max);
        let u: Vec<f64> = x.iter().map(|v| v * v / x2max).collect();
        let w: Vec<f64> = x
            .iter()
            .zip(&z)
            .map(|(&x, &z)| (z / x.powi(n as i32)).powf(-1.0 / nu as f64))
            .collect();
        let (a, b_scaled) = compass_line_fit(&u, &w);
        let b = b_scaled / x2max;
        let (alpha_bf, beta_bf) = (a.powi(-(nu as i32)), b / a);
        worst = worst
            .max(((fit.alpha - alpha_bf) / alpha_bf).abs())
            .max(((fit.beta - beta_bf) / beta_bf).abs());
    }
    outcome(worst <= 1e-3, format!("20 curves, worst coefficient rel diff {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let r = rapp();
    let linear = PaModel::linear(r.g_lin);
    let mut worst = f64::NEG_INFINITY;
    for n in [1, 16, 32, 64, 128, 256] {
        let cfg = ChainConfig::new(WaveformConfig::new(64, n), linear.clone(), 0.0, 5)
            .with_ibo_reference(r.compression_point_1db());
        let m = subthz_pa::link::run_chain(&cfg).unwrap();
        worst = worst.max(m.evm_db);
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= -100.0 && within(elapsed, 10.0),
        format!("worst EVM {worst:.1} dB over N_sc in {{1,16,...,256}}, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn evm_at(n_sc: &[usize], predistorter: Option<Predistorter>, symbols: usize) -> Vec<f64> {
    let base = ChainConfig::new(WaveformConfig::new(64, 256).with_symbols(symbols), rapp_model(), 0.0, 2024)
        .with_predistorter(predistorter);
    sweep_evm_vs_nsc(&base, n_sc).unwrap().rows.iter().map(|r| r.evm_db.unwrap()).collect()
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let none = evm_at(&[256], None, 20_000)[0];
    let pd4 = evm_at(&[256], Some(pd(Some(4))), 20_000)[0];
    let pd8 = evm_at(&[256], Some(pd(Some(8))), 20_000)[0];
    let (g4, g8) = (none - pd4, none - pd8);
    let elapsed = start.elapsed();
    outcome(
        (5.0..=15.0).contains(&g4) && g8 >= g4 && within(elapsed, 120.0),
        format!(
            "EVM no-PD {none:.2} dB, PD4 {pd4:.2} dB (gain {g4:.2}), PD8 {pd8:.2} dB (gain {g8:.2}), {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_7() -> Outcome {
    let n_sc = [16, 32, 64, 128, 256];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, p) in [("no-PD", None), ("PD4", Some(pd(Some(4)))), ("PD8", Some(pd(Some(8))))] {
        let e = evm_at(&n_sc, p, 500_000);
        let spread = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - e.iter().cloned().fold(f64::INFINITY, f64::min);
        pass &= spread < 2.0;
        parts.push(format!("{name} spread {spread:.2} dB"));
    }
    outcome(pass, format!("IBO 0 dB, 64-QAM, N_sc 16..256: {}", parts.join(", ")))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    // SNR where the closed-form BER equals 1e-3
    let (mut lo, mut hi) = (10.0, 30.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if gray_qam_ber(64, mid) > 1e-3 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let snr = 0.5 * (lo + hi);
    let theory = gray_qam_ber(64, snr);
    let r = rapp();
    let mut parts = Vec::new();
    let mut pass = true;
    for n in [1, 256] {
        let base = ChainConfig::new(WaveformConfig::new(64, n), PaModel::linear(r.g_lin), 10.0, 8)
            .with_ibo_reference(r.compression_point_1db());
        let opts = BerOptions { min_errors: 1000, max_bits: 10_000_000 };
        let row = sweep_ber_vs_snr(&base, &[snr], &SnrMode::Direct, &opts).unwrap().rows.remove(0);
        let (ber, se) = (row.ber.unwrap_or(0.0), row.ber_std_err.unwrap_or(f64::INFINITY));
        let z = (ber - theory) / se;
        pass &= z.abs() <= 3.0 && row.bit_errors >= 100;
        parts.push(format!("N_sc={n}: {ber:.3e} ({} errors, {:+.2} SE)", row.bit_errors, z));
    }
    let elapsed = start.elapsed();
    pass &= within(elapsed, 300.0);
    outcome(
        pass,
        format!("SNR {snr:.3} dB, theory {theory:.3e}; {}; {:.1} s", parts.join("; "), elapsed.as_secs_f64()),
    )
}

/// SNR where log10(BER) first falls through `target`, by linear
/// interpolation between bracketing points.
fn crossing(rows: &[SweepRow], target: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.axis_value, r.ber.map_or(f64::NEG_INFINITY, |b| b.log10())))
        .collect();
    let t = target.log10();
    pts.windows(2).find_map(|w| {
        let ((s0, b0), (s1, b1)) = (w[0], w[1]);
        (b0 > t && b1 <= t).then(|| if b1.is_finite() { s0 + (s1 - s0) * (b0 - t) / (b0 - b1) } else { s1 })
    })
}

fn ber(r: &SweepRow) -> (f64, f64) {
    (r.ber.unwrap_or(0.0), r.ber_std_err.unwrap_or(0.0))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let snrs: Vec<f64> = (10..=26).map(f64::from).collect();
    let r = rapp();
    let mode = SnrMode::LinkBudget { link: LinkConfig::default() };
    let opts = BerOptions::default();
    let run = |model: PaModel, p: Option<Predistorter>| {
        let base = ChainConfig::new(WaveformConfig::new(64, 256), model, 0.0, 99)
            .with_predistorter(p)
            .with_ibo_reference(r.compression_point_1db());
        sweep_ber_vs_snr(&base, &snrs, &mode, &opts).unwrap().rows
    };
    let ideal = run(PaModel::linear(r.g_lin), None);
    let none = run(rapp_model(), None);
    let pd8 = run(rapp_model(), Some(pd(Some(8))));

    // interior minimum of the uncompensated curve, followed by a significant rise
    let none_ber: Vec<(f64, f64)> = none.iter().map(ber).collect();
    let imin = (0..none_ber.len()).min_by(|&a, &b| none_ber[a].0.total_cmp(&none_ber[b].0)).unwrap();
    let (bmin, smin) = none_ber[imin];
    let (blast, slast) = ber(none.last().unwrap());
    let interior = imin > 0 && imin + 1 < none.len() && blast - bmin > 3.0 * (smin.hypot(slast));

    let monotone = pd8.windows(2).all(|w| {
        let ((b0, s0), (b1, s1)) = (ber(&w[0]), ber(&w[1]));
        b1 <= b0 + 3.0 * s0.hypot(s1)
    });
    let c_pd = crossing(&pd8, 1e-3);
    let c_ideal = crossing(&ideal, 1e-3);
    let near_ideal = matches!((c_pd, c_ideal), (Some(a), Some(b)) if (a - b).abs() <= 2.0);
    let c4 = crossing(&pd8, 1e-4);
    let anchor = matches!(c4, Some(s) if (s - 23.5).abs() <= 2.0);
    let elapsed = start.elapsed();
    let fmt = |c: Option<f64>| c.map_or("none".to_string(), |v| format!("{v:.2}"));
    outcome(
        interior && monotone && near_ideal && anchor && within(elapsed, 900.0),
        format!(
            "no-PD min {bmin:.2e} at {} dB (interior {interior}); PD8 monotone {monotone}; \
             BER 1e-3 at PD8 {} / ideal {} dB; PD8 BER 1e-4 at {} dB; {:.0} s",
            snrs[imin],
            fmt(c_pd),
            fmt(c_ideal),
            fmt(c4),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_10() -> Outcome {
    let fspl = free_space_loss_db(35.0, 315e9);
    let ktb = noise_power(&LinkConfig { noise_temp_k: 290.0, bandwidth_hz: 1e9, ..LinkConfig::default() });
    outcome(
        (fspl - 113.29).abs() <= 0.01 && (ktb + 83.97).abs() <= 0.01,
        format!("free-space loss {fspl:.4} dB, kTB {ktb:.4} dBm"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("polynomial constant-term anchor via eval-model", criterion_1),
        ("Rapp inverse identity", criterion_2),
        ("1-dB compression point", criterion_3),
        ("Saleh closed form vs brute force", criterion_4),
        ("linear chain EVM floor", criterion_5),
        ("EVM improvement with predistortion", criterion_6),
        ("EVM flatness over N_sc", criterion_7),
        ("BER vs Gray-QAM theory", criterion_8),
        ("BER curve shapes", criterion_9),
        ("link budget arithmetic", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!("criterion {:>2} [{}] {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
