use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use subthz_pa::fitting::{fit_ghorbani, fit_polynomial, fit_rapp, fit_saleh_model, FitOptions, FitReport};
use subthz_pa::io::{
    emit_results, load_model, read_measurement_csv, read_results_json, results_to_csv, save_model, FitResiduals,
    ModelMeta, ResultFormat,
};
use subthz_pa::link::{rerun, sweep_ber_vs_snr, sweep_evm_vs_nsc, sweep_pa_input_vs_ibo, SweepResult};
use subthz_pa::pa::{AmplitudePhase, ModelParams, PaModel};
use subthz_pa::predistortion::DEFAULT_GRID_POINTS;
use subthz_pa::units::{dbm_to_volts, volts_to_dbm};
use subthz_pa::{Error, ErrorClass, Result};

mod config;

use config::{design_predistorter, SweepFile};

#[derive(Parser)]
#[command(name = "subthz-pa", version, about = "Sub-THz PA modeling, predistortion and link simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitKind {
    Poly,
    Rapp,
    Saleh,
    Ghorbani,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a behavioral model to a measurement CSV.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        model: FitKind,
        /// Polynomial order.
        #[arg(long, default_value_t = 9)]
        order: usize,
        /// Carrier frequency to fit (Hz); required when the file holds several.
        #[arg(long)]
        fc: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Reference the phase of each curve to this input power (dBm).
        #[arg(long, allow_hyphen_values = true)]
        phase_reference: Option<f64>,
        #[arg(long, default_value_t = FitOptions::default().restarts)]
        restarts: usize,
        #[arg(long, default_value_t = FitOptions::default().seed)]
        seed: u64,
    },
    /// Design an amplitude/phase predistorter for a Rapp model.
    PdDesign {
        #[arg(long)]
        model: PathBuf,
        /// Clipping level (V); defaults to 0.935·Vsat/G.
        #[arg(long)]
        chi: Option<f64>,
        /// Amplitude polynomial order; omit both orders for the ideal inverse.
        #[arg(long, requires = "ntheta")]
        na: Option<usize>,
        #[arg(long, requires = "na")]
        ntheta: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Noiseless EVM versus number of subcarriers.
    EvmSweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Monte-Carlo BER versus SNR.
    BerSweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Mean PA input power and EVM versus input back-off.
    IboSweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Repeat a sweep from the metadata in its JSON result.
    Replay {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a model at one input level.
    EvalModel {
        #[arg(long)]
        model: PathBuf,
        /// Input level in dBm, or in volts with a trailing `V`.
        #[arg(long, allow_hyphen_values = true)]
        pin: String,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Config => 2,
        ErrorClass::Data => 3,
        ErrorClass::Numerical => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Fit { data, model, order, fc, out, phase_reference, restarts, seed } => {
            let opts = FitOptions { restarts, seed, ..FitOptions::default() };
            fit(&data, model, order, fc, &out, phase_reference, &opts)
        }
        Command::PdDesign { model, chi, na, ntheta, grid_points, out } => {
            let (m, _) = load_model(&model)?;
            let pd = design_predistorter(&m, chi, na.zip(ntheta), grid_points)?;
            let text = serde_json::to_string_pretty(&pd).expect("predistorter serializes");
            std::fs::write(&out, text + "\n").map_err(|e| Error::Data(format!("{}: {e}", out.display())))?;
            println!("chi={} gamma={}", pd.chi, pd.gamma);
            if let Some(p) = &pd.polynomials {
                println!("residual_amplitude_v={} residual_phase_deg={}", p.residual_amplitude, p.residual_phase);
            }
            Ok(())
        }
        Command::EvmSweep { config } => sweep(&config, SweepKind::Evm),
        Command::BerSweep { config } => sweep(&config, SweepKind::Ber),
        Command::IboSweep { config } => sweep(&config, SweepKind::Ibo),
        Command::Replay { results, out } => {
            let file = std::fs::File::open(&results).map_err(|e| Error::Config(format!("{}: {e}", results.display())))?;
            let previous = read_results_json(std::io::BufReader::new(file))?;
            let result = rerun(&previous.metadata)?;
            let output = out.map(|p| {
                let f = ResultFormat::from_path(&p);
                (p, f)
            });
            write_output(&result, output)
        }
        Command::EvalModel { model, pin } => eval_model(&model, &pin),
    }
}

fn fit(
    data: &Path,
    kind: FitKind,
    order: usize,
    fc: Option<f64>,
    out: &Path,
    phase_reference: Option<f64>,
    opts: &FitOptions,
) -> Result<()> {
    let curves = read_measurement_csv(data, phase_reference)?;
    let curve = match fc {
        Some(f) => curves
            .iter()
            .find(|c| (c.fc_hz - f).abs() <= 1e-9 * f.abs())
            .ok_or_else(|| {
                let have: Vec<String> = curves.iter().map(|c| c.fc_hz.to_string()).collect();
                Error::Data(format!("no curve at {f} Hz; file has {}", have.join(", ")))
            })?,
        None if curves.len() == 1 => &curves[0],
        None => return Err(Error::Config("file holds several frequencies; choose one with --fc".into())),
    };
    let report: FitReport = match kind {
        FitKind::Poly => fit_polynomial(curve, order)?.1,
        FitKind::Rapp => fit_rapp(curve, opts)?.1,
        FitKind::Saleh => fit_saleh_model(curve)?.1,
        FitKind::Ghorbani => fit_ghorbani(curve, opts)?.1,
    };
    let meta = ModelMeta {
        source: Some(data.display().to_string()),
        fit_residuals: Some(FitResiduals {
            amplitude: report.residual_amplitude,
            phase: report.residual_phase,
            amplitude_units: serde_json::to_value(report.amplitude_units)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
        }),
    };
    save_model(out, &report.model, &meta)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

enum SweepKind {
    Evm,
    Ber,
    Ibo,
}

fn sweep(config: &Path, kind: SweepKind) -> Result<()> {
    let file = SweepFile::load(config)?;
    let s = file.resolve(config)?;
    let result = match kind {
        SweepKind::Evm => {
            let n = s
                .axis
                .iter()
                .map(|&v| {
                    if v >= 1.0 && v.fract() == 0.0 {
                        Ok(v as usize)
                    } else {
                        Err(Error::Config(format!("sweep.values must be subcarrier counts, got {v}")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            sweep_evm_vs_nsc(&s.base, &n)?
        }
        SweepKind::Ber => sweep_ber_vs_snr(&s.base, &s.axis, &s.snr_mode, &s.ber)?,
        SweepKind::Ibo => sweep_pa_input_vs_ibo(&s.base, &s.axis)?,
    };
    write_output(&result, s.output)
}

/// Writes the requested file; CSV output is accompanied by a JSON file with
/// the same stem carrying the metadata. Without a path, CSV goes to stdout.
fn write_output(result: &SweepResult, output: Option<(PathBuf, ResultFormat)>) -> Result<()> {
    match output {
        None => print!("{}", results_to_csv(result)?),
        Some((path, format)) => {
            emit_results(result, &path, format)?;
            if format == ResultFormat::Csv {
                emit_results(result, &path.with_extension("json"), ResultFormat::Json)?;
            }
        }
    }
    for row in &result.rows {
        if let Some(e) = &row.error {
            eprintln!("warning: point {} failed: {e}", row.axis_value);
        }
    }
    Ok(())
}

/// Parses `-3.5` (dBm) or `1.2e-3V` (volts) into dBm.
fn parse_level(text: &str) -> Result<f64> {
    let t = text.trim();
    let bad = || Error::Config(format!("cannot parse input level `{text}`"));
    let value = match t.strip_suffix(['V', 'v']) {
        Some(v) => {
            let volts: f64 = v.trim().parse().map_err(|_| bad())?;
            if volts.is_nan() || volts <= 0.0 {
                return Err(Error::Config(format!("input amplitude must be positive, got {volts} V")));
            }
            volts_to_dbm(volts)
        }
        None => t.strip_suffix("dBm").unwrap_or(t).trim().parse().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

fn eval_model(path: &Path, pin: &str) -> Result<()> {
    let (model, _) = load_model(path)?;
    let p_in = parse_level(pin)?;
    let (p_out, phase) = evaluate(&model, p_in)?;
    println!("pin_dbm={p_in}");
    println!("pout_dbm={p_out}");
    println!("phase_deg={phase}");
    Ok(())
}

fn evaluate(model: &PaModel, p_in_dbm: f64) -> Result<(f64, f64)> {
    match &model.params {
        ModelParams::Polynomial(p) => Ok((p.amplitude_dbm(p_in_dbm)?, p.phase_dbm(p_in_dbm)?)),
        _ => {
            let rho = dbm_to_volts(p_in_dbm);
            Ok((volts_to_dbm(model.amplitude(rho)?), model.phase_deg(rho)?))
        }
    }
}
