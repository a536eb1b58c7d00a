//! Config-driven experiments: bound assessment, weight comparison, sample
//! imbalance and distribution disparity sweeps, and the real-data protocol.
//!
//! Each (sweep point, repeat) job owns an [`RngStream`](crate::rng::RngStream)
//! derived from the config seed, so output does not depend on the number of
//! workers.

mod config;
mod results;
mod run;

use serde::{Deserialize, Serialize};

pub use config::{
    Experiment, ExperimentConfig, PredictorKind, RealDataConfig, SampleDesign, Sweep, Training,
    WeightMethod, CONFIG_VERSION,
};
pub use results::{
    read_results, sort_rows, summarize, summarize_file, write_results, CellSummary, ResultRow,
    Summary, COLUMNS, RESULTS_SCHEMA_VERSION,
};
pub use run::{prepare_points, run, write_outputs, Manifest, PointSetup, RunOutput};

use crate::bounds::{evaluate, BoundInputs, BoundReport};
use crate::error::Result;

/// Input document of the `bounds` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRequest {
    #[serde(flatten)]
    pub inputs: BoundInputs,
    #[serde(default)]
    pub delta_hat: Option<f64>,
}

pub fn evaluate_request(text: &str) -> Result<BoundReport> {
    let req: BoundsRequest = serde_json::from_str(text)?;
    evaluate(&req.inputs, req.delta_hat)
}
