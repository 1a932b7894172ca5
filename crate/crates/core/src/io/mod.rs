//! File formats: measurement CSV input, model JSON, sweep results.

mod measurement_csv;
mod model_file;
mod results;

pub use measurement_csv::{parse_measurement_csv, read_measurement_csv, MEASUREMENT_HEADER};
pub use model_file::{
    load_model, model_to_json, parse_model, save_model, FitResiduals, ModelDocument, ModelMeta,
};
pub use results::{
    emit_results, read_results_csv, read_results_json, results_to_csv, results_to_json, ResultFormat, CSV_COLUMNS,
};
