//! JSON model files: `{kind, fc_hz, params: {...}, meta: {source, fit_residuals}}`.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::pa::{ModelKind, ModelParams, PaModel};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitResiduals {
    pub amplitude: f64,
    pub phase: f64,
    /// Unit of the amplitude residual, `"dB"` or `"V"`.
    pub amplitude_units: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_residuals: Option<FitResiduals>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub kind: ModelKind,
    pub fc_hz: f64,
    pub params: serde_json::Value,
    #[serde(default)]
    pub meta: ModelMeta,
}

fn params_to_value(params: &ModelParams) -> serde_json::Value {
    let v = match params {
        ModelParams::Polynomial(p) => serde_json::to_value(p),
        ModelParams::Ghorbani(p) => serde_json::to_value(p),
        ModelParams::Saleh(p) => serde_json::to_value(p),
        ModelParams::Rapp(p) => serde_json::to_value(p),
        ModelParams::Linear(p) => serde_json::to_value(p),
    };
    v.expect("parameter structs serialize infallibly")
}

fn parse_at<T: DeserializeOwned>(value: &serde_json::Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| Error::Schema {
        path: format!("{prefix}.{}", e.path()),
        message: e.inner().to_string(),
    })
}

impl ModelDocument {
    pub fn from_model(model: &PaModel, meta: ModelMeta) -> Self {
        Self {
            kind: model.kind(),
            fc_hz: model.fc_hz,
            params: params_to_value(&model.params),
            meta,
        }
    }

    pub fn to_model(&self) -> Result<PaModel> {
        let params = match self.kind {
            ModelKind::Polynomial => ModelParams::Polynomial(parse_at(&self.params, "params")?),
            ModelKind::Ghorbani => ModelParams::Ghorbani(parse_at(&self.params, "params")?),
            ModelKind::Saleh => ModelParams::Saleh(parse_at(&self.params, "params")?),
            ModelKind::Rapp => ModelParams::Rapp(parse_at(&self.params, "params")?),
            ModelKind::Linear => ModelParams::Linear(parse_at(&self.params, "params")?),
        };
        let model = PaModel { fc_hz: self.fc_hz, params };
        model.validate()?;
        Ok(model)
    }
}

impl Serialize for PaModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            kind: ModelKind,
            fc_hz: f64,
            params: &'a serde_json::Value,
        }
        let params = params_to_value(&self.params);
        Repr { kind: self.kind(), fc_hz: self.fc_hz, params: &params }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PaModel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = ModelDocument::deserialize(deserializer)?;
        doc.to_model().map_err(serde::de::Error::custom)
    }
}

/// Parses a model document from JSON text, reporting schema violations
/// with the JSON path of the offending field.
pub fn parse_model(text: &str) -> Result<(PaModel, ModelMeta)> {
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: ModelDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    Ok((doc.to_model()?, doc.meta))
}

pub fn model_to_json(model: &PaModel, meta: &ModelMeta) -> String {
    serde_json::to_string_pretty(&ModelDocument::from_model(model, meta.clone()))
        .expect("model documents serialize infallibly")
}

pub fn save_model(path: impl AsRef<Path>, model: &PaModel, meta: &ModelMeta) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_json(model, meta) + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(PaModel, ModelMeta)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text)
}
