use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{CsvSchema, SyntheticSpec, Task};
use crate::error::{Error, Result};
use crate::forest::ForestConfig;
use crate::missingness::MissingnessSpec;
use crate::predictors::SvmConfig;
use crate::propensity::LogisticConfig;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    UpperCoverage,
    LowerAssessment,
    WeightComparison,
    ImbalanceSweep,
    DisparitySweep,
    RealData,
}

impl Experiment {
    pub fn id(self) -> &'static str {
        match self {
            Experiment::UpperCoverage => "upper_coverage",
            Experiment::LowerAssessment => "lower_assessment",
            Experiment::WeightComparison => "weight_comparison",
            Experiment::ImbalanceSweep => "imbalance_sweep",
            Experiment::DisparitySweep => "disparity_sweep",
            Experiment::RealData => "real_data",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMethod {
    Unweighted,
    TrueWeights,
    Logistic,
    LogisticMisspecified,
    RandomForest,
}

impl WeightMethod {
    pub const ALL: [WeightMethod; 5] = [
        WeightMethod::Unweighted,
        WeightMethod::TrueWeights,
        WeightMethod::Logistic,
        WeightMethod::LogisticMisspecified,
        WeightMethod::RandomForest,
    ];

    pub fn id(self) -> &'static str {
        match self {
            WeightMethod::Unweighted => "unweighted",
            WeightMethod::TrueWeights => "true_weights",
            WeightMethod::Logistic => "logistic",
            WeightMethod::LogisticMisspecified => "logistic_misspecified",
            WeightMethod::RandomForest => "random_forest",
        }
    }

    pub fn from_id(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.id() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorKind {
    LinearSvm,
    RandomForest,
}

/// How `n_per_group` (and sweep sizes) are read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleDesign {
    /// Rows drawn per group before missingness.
    #[default]
    Raw,
    /// Expected complete cases per group; raw sizes are scaled up by 1/E[π | A = a].
    CompleteCases,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case")]
pub enum Sweep {
    /// n₀ = n₁ = value.
    N0 { values: Vec<f64> },
    /// Fixed `total = n₀ + n₁`, value = n₁/n₀.
    Ratio { total: usize, values: Vec<f64> },
    /// Multiplier M on the group coefficient of the feature mean.
    Disparity { values: Vec<f64> },
}

impl Sweep {
    pub fn values(&self) -> &[f64] {
        match self {
            Sweep::N0 { values } | Sweep::Ratio { values, .. } | Sweep::Disparity { values } => {
                values
            }
        }
    }

    pub fn axis(&self) -> &'static str {
        match self {
            Sweep::N0 { .. } => "n0",
            Sweep::Ratio { .. } => "ratio",
            Sweep::Disparity { .. } => "disparity",
        }
    }
}

fn default_train_size() -> [usize; 2] {
    [1000, 1000]
}

/// Data the prediction model g is trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Training {
    /// The complete cases of the sample used for Δ̂_S.
    CompleteCases,
    /// A separate fully observed draw; for real data, the whole first split.
    Fresh {
        #[serde(default = "default_train_size")]
        n_per_group: [usize; 2],
    },
}

impl Default for Training {
    fn default() -> Self {
        Training::Fresh {
            n_per_group: default_train_size(),
        }
    }
}

fn default_train_fraction() -> f64 {
    500.0 / 649.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealDataConfig {
    /// Relative paths resolve against the config file's directory.
    pub csv: PathBuf,
    pub schema: CsvSchema,
    pub task: Task,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub standardize: bool,
}

fn default_delta() -> f64 {
    0.05
}

fn default_mc_samples() -> usize {
    100_000
}

fn default_repeats() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub experiment: Experiment,
    #[serde(default)]
    pub synthetic: Option<SyntheticSpec>,
    #[serde(default)]
    pub real_data: Option<RealDataConfig>,
    pub missingness: MissingnessSpec,
    pub weight_methods: Vec<WeightMethod>,
    pub predictor: PredictorKind,
    #[serde(default)]
    pub training: Training,
    #[serde(default)]
    pub svm: SvmConfig,
    #[serde(default)]
    pub forest: ForestConfig,
    #[serde(default)]
    pub propensity_forest: ForestConfig,
    #[serde(default)]
    pub logistic: LogisticConfig,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub sample_design: SampleDesign,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    pub seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// VC or pseudo dimension for the upper bound; defaults to p + 1.
    #[serde(default)]
    pub complexity_dim: Option<usize>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(CONFIG_VERSION) => {}
            Some(v) => {
                return Err(Error::Config(format!(
                    "unsupported config version {v}; this build reads version {CONFIG_VERSION}"
                )))
            }
            None => return Err(Error::validation("version", "missing or not an integer")),
        }
        let cfg: Self = serde_json::from_value(value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read and validate a config file; a relative real-data CSV path is
    /// resolved against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(real) = cfg.real_data.as_mut() {
            if real.csv.is_relative() {
                if let Some(dir) = path.parent() {
                    real.csv = dir.join(&real.csv);
                }
            }
        }
        Ok(cfg)
    }

    pub fn feature_count(&self) -> usize {
        match (&self.synthetic, &self.real_data) {
            (Some(s), _) => s.p,
            (None, Some(r)) => r.schema.feature_cols.len(),
            (None, None) => 0,
        }
    }

    pub fn task(&self) -> Task {
        match (&self.synthetic, &self.real_data) {
            (Some(s), _) => s.task,
            (None, Some(r)) => r.task,
            (None, None) => Task::Classification,
        }
    }

    pub fn complexity_dim(&self) -> usize {
        self.complexity_dim.unwrap_or(self.feature_count() + 1)
    }

    /// Sweep coordinates; a single NaN point when there is no sweep.
    pub fn points(&self) -> Vec<f64> {
        match &self.sweep {
            Some(s) => s.values().to_vec(),
            None => vec![f64::NAN],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {}",
                self.version
            )));
        }
        if self.repeats == 0 {
            return Err(Error::validation("repeats", "must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::validation(
                "delta",
                "must lie strictly between 0 and 1",
            ));
        }
        if self.weight_methods.is_empty() {
            return Err(Error::validation(
                "weight_methods",
                "list at least one method",
            ));
        }
        if self.weight_methods.iter().collect::<BTreeSet<_>>().len() != self.weight_methods.len() {
            return Err(Error::validation(
                "weight_methods",
                "methods must not repeat",
            ));
        }
        match (self.experiment, &self.synthetic, &self.real_data) {
            (Experiment::RealData, None, Some(real)) => {
                if !(real.train_fraction > 0.0 && real.train_fraction < 1.0) {
                    return Err(Error::validation(
                        "real_data.train_fraction",
                        "must lie strictly between 0 and 1",
                    ));
                }
                if real.schema.feature_cols.is_empty() {
                    return Err(Error::validation(
                        "real_data.schema.feature_cols",
                        "map at least one feature",
                    ));
                }
            }
            (Experiment::RealData, _, _) => {
                return Err(Error::validation(
                    "real_data",
                    "real_data experiments need a real_data block and no synthetic block",
                ))
            }
            (_, Some(spec), None) => {
                spec.validate()?;
                if self.mc_samples < 1000 {
                    return Err(Error::validation("mc_samples", "must be at least 1000"));
                }
            }
            _ => {
                return Err(Error::validation(
                    "synthetic",
                    "synthetic experiments need a synthetic block and no real_data block",
                ))
            }
        }
        self.missingness.validate(self.feature_count())?;
        self.svm_or_forest_validate()?;
        self.propensity_forest.validate()?;
        self.logistic.validate()?;
        if let Training::Fresh { n_per_group } = self.training {
            if n_per_group.contains(&0) {
                return Err(Error::validation(
                    "training.n_per_group",
                    "both groups need training rows",
                ));
            }
        }
        if self.complexity_dim == Some(0) {
            return Err(Error::validation("complexity_dim", "must be at least 1"));
        }
        let expected_axis = match self.experiment {
            Experiment::LowerAssessment => Some(&["n0"][..]),
            Experiment::ImbalanceSweep => Some(&["ratio"][..]),
            Experiment::DisparitySweep => Some(&["disparity"][..]),
            Experiment::WeightComparison => None,
            Experiment::UpperCoverage | Experiment::RealData => Some(&[][..]),
        };
        match (&self.sweep, expected_axis) {
            (None, Some(axes)) if !axes.is_empty() => {
                return Err(Error::validation(
                    "sweep",
                    format!("{} needs a `{}` sweep", self.experiment.id(), axes[0]),
                ))
            }
            (Some(s), Some(axes)) if !axes.contains(&s.axis()) => {
                return Err(Error::validation(
                    "sweep",
                    format!(
                        "{} does not take a `{}` sweep",
                        self.experiment.id(),
                        s.axis()
                    ),
                ))
            }
            (Some(Sweep::Ratio { .. } | Sweep::Disparity { .. }), None) => {
                return Err(Error::validation(
                    "sweep",
                    "weight_comparison only sweeps n0",
                ))
            }
            _ => {}
        }
        if let Some(sweep) = &self.sweep {
            let values = sweep.values();
            if values.is_empty() {
                return Err(Error::validation("sweep.values", "grid must not be empty"));
            }
            let ok = match sweep {
                Sweep::N0 { .. } => values.iter().all(|&v| v.is_finite() && v >= 1.0),
                Sweep::Ratio { total, .. } => {
                    if *total < 2 {
                        return Err(Error::validation("sweep.total", "must be at least 2"));
                    }
                    values.iter().all(|&v| v.is_finite() && v > 0.0)
                }
                Sweep::Disparity { .. } => values.iter().all(|v| v.is_finite()),
            };
            if !ok {
                return Err(Error::validation(
                    "sweep.values",
                    "grid values out of range for this axis",
                ));
            }
        }
        if self.experiment == Experiment::RealData && self.sample_design != SampleDesign::Raw {
            return Err(Error::validation(
                "sample_design",
                "real_data uses the rows as given",
            ));
        }
        Ok(())
    }

    fn svm_or_forest_validate(&self) -> Result<()> {
        match self.predictor {
            PredictorKind::LinearSvm => {
                if !(self.svm.lambda > 0.0) || self.svm.epochs == 0 {
                    return Err(Error::validation(
                        "svm",
                        "lambda must be positive and epochs at least 1",
                    ));
                }
                Ok(())
            }
            PredictorKind::RandomForest => self.forest.validate(),
        }
    }
}
