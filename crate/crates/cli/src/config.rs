//! Sweep configuration files (TOML or JSON).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use subthz_pa::io::{load_model, ResultFormat};
use subthz_pa::link::{BerOptions, ChainConfig, LinkConfig, SnrMode};
use subthz_pa::pa::{AmplitudePhase, ModelParams, PaModel};
use subthz_pa::predistortion::{Predistorter, DEFAULT_GRID_POINTS};
use subthz_pa::waveforms::{EqualizerKind, WaveformConfig};
use subthz_pa::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PaChoice {
    /// The loaded behavioral model.
    #[default]
    Model,
    /// A distortion-free amplifier with the model's small-signal gain.
    Linear,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdSection {
    /// Predistorter JSON written by `pd-design`. Excludes the other keys.
    pub file: Option<PathBuf>,
    pub chi: Option<f64>,
    pub na: Option<usize>,
    pub ntheta: Option<usize>,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrModeName {
    #[default]
    Direct,
    LinkBudget,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerSection {
    #[serde(default)]
    pub mode: SnrModeName,
    pub min_errors: Option<u64>,
    pub max_bits: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: PathBuf,
    pub format: Option<ResultFormat>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub seed: u64,
    /// PA model JSON file.
    pub model: PathBuf,
    #[serde(default)]
    pub pa: PaChoice,
    /// IBO reference amplitude (V); defaults to the model's 1-dB point.
    pub ibo_reference_v: Option<f64>,
    #[serde(default)]
    pub ibo_db: f64,
    pub waveform: WaveformConfig,
    #[serde(default)]
    pub equalizer: EqualizerKind,
    pub predistorter: Option<PdSection>,
    pub sweep: AxisSection,
    pub ber: Option<BerSection>,
    pub link: Option<LinkConfig>,
    pub output: Option<OutputSection>,
}

/// A sweep file with every referenced file loaded.
pub struct ResolvedSweep {
    pub base: ChainConfig,
    pub axis: Vec<f64>,
    pub snr_mode: SnrMode,
    pub ber: BerOptions,
    pub output: Option<(PathBuf, ResultFormat)>,
}

fn schema_error(e: serde_path_to_error::Error<impl std::fmt::Display>) -> Error {
    Error::Schema { path: e.path().to_string(), message: e.inner().to_string() }
}

/// Parses TOML, or JSON when `path` ends in `.json`, rejecting unknown keys.
pub fn parse_file<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    let value: serde_json::Value = if ResultFormat::from_path(path) == ResultFormat::Json {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
    } else {
        let t: toml::Value = toml::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::to_value(t).map_err(|e| Error::Config(e.to_string()))?
    };
    serde_path_to_error::deserialize(value).map_err(schema_error)
}

fn resolve_path(base_dir: &Path, p: &Path) -> Result<PathBuf> {
    let full = if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };
    if !full.is_file() {
        return Err(Error::Config(format!("referenced file {} does not exist", full.display())));
    }
    Ok(full)
}

/// Small-signal gain of a model.
pub fn small_signal_gain(model: &PaModel) -> Result<f64> {
    match &model.params {
        ModelParams::Rapp(r) => Ok(r.g_lin),
        ModelParams::Linear(l) => Ok(l.gain),
        _ => {
            let rho = 1e-6;
            Ok(model.amplitude(rho)? / rho)
        }
    }
}

pub fn load_predistorter(path: &Path) -> Result<Predistorter> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let pd: Predistorter = serde_path_to_error::deserialize(&mut de).map_err(schema_error)?;
    pd.validate()?;
    Ok(pd)
}

/// Builds a predistorter for `model` from explicit design parameters.
pub fn design_predistorter(
    model: &PaModel,
    chi: Option<f64>,
    orders: Option<(usize, usize)>,
    grid_points: usize,
) -> Result<Predistorter> {
    let rapp = *model
        .as_rapp()
        .ok_or_else(|| Error::Config(format!("predistortion needs a rapp model, got {}", model.kind())))?;
    let pd = match chi {
        Some(c) => Predistorter::ideal(rapp, c)?,
        None => Predistorter::ideal_default(rapp)?,
    };
    match orders {
        Some((na, nt)) => pd.with_polynomials(na, nt, grid_points),
        None => Ok(pd),
    }
}

impl SweepFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        parse_file(path, &text)
    }

    pub fn resolve(&self, config_path: &Path) -> Result<ResolvedSweep> {
        let dir = config_path.parent().unwrap_or(Path::new("."));
        let (model, _) = load_model(resolve_path(dir, &self.model)?)?;
        let x_1db = match self.ibo_reference_v {
            Some(v) => v,
            None => model.compression_point_1db()?,
        };
        let predistorter = match &self.predistorter {
            None => None,
            Some(PdSection { file: Some(f), chi: None, na: None, ntheta: None, grid_points: None }) => {
                Some(load_predistorter(&resolve_path(dir, f)?)?)
            }
            Some(PdSection { file: Some(_), .. }) => {
                return Err(Error::Config("predistorter.file excludes chi/na/ntheta/grid_points".into()))
            }
            Some(s) => {
                let orders = match (s.na, s.ntheta) {
                    (Some(a), Some(t)) => Some((a, t)),
                    (None, None) => None,
                    _ => return Err(Error::Config("predistorter.na and predistorter.ntheta go together".into())),
                };
                Some(design_predistorter(&model, s.chi, orders, s.grid_points.unwrap_or(DEFAULT_GRID_POINTS))?)
            }
        };
        let pa = match self.pa {
            PaChoice::Model => model.clone(),
            PaChoice::Linear => PaModel::linear(small_signal_gain(&model)?),
        };
        let mut base = ChainConfig::new(self.waveform.clone(), pa, self.ibo_db, self.seed)
            .with_predistorter(predistorter)
            .with_ibo_reference(x_1db);
        base.equalizer = self.equalizer;
        base.validate()?;

        let ber = self.ber.clone().unwrap_or_default();
        let defaults = BerOptions::default();
        let snr_mode = match ber.mode {
            SnrModeName::Direct => SnrMode::Direct,
            SnrModeName::LinkBudget => SnrMode::LinkBudget { link: self.link.clone().unwrap_or_default() },
        };
        let output = self.output.as_ref().map(|o| {
            let path = if o.path.is_absolute() { o.path.clone() } else { dir.join(&o.path) };
            let format = o.format.unwrap_or_else(|| ResultFormat::from_path(&path));
            (path, format)
        });
        Ok(ResolvedSweep {
            base,
            axis: self.sweep.values.clone(),
            snr_mode,
            ber: BerOptions {
                min_errors: ber.min_errors.unwrap_or(defaults.min_errors),
                max_bits: ber.max_bits.unwrap_or(defaults.max_bits),
            },
            output,
        })
    }
}
