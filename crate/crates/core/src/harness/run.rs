use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{
    Experiment, ExperimentConfig, PredictorKind, SampleDesign, Sweep, Training, WeightMethod,
};
use super::results::{
    sort_rows, summarize, write_results, ResultRow, Summary, RESULTS_SCHEMA_VERSION,
};
use crate::bounds::{evaluate, BoundInputs, LowerRegime, ModelClass};
use crate::dataset::{generate_synthetic, load_csv, split, Dataset, SyntheticSpec, Task};
use crate::error::{Error, Result};
use crate::fairness::{apg_holdout, apg_true, losses, weighted_risk, ApgTruth, FairnessReport};
use crate::forest::ForestConfig;
use crate::missingness::{complete_cases, inject, CompleteCases, PropensityOracle};
use crate::predictors::{train_forest, train_svm, Predictor, SvmConfig};
use crate::propensity::{fit_forest, fit_logistic, FeatureTransform};
use crate::rng::RngStream;
use crate::stats::percentile;
use crate::weights::{estimated_weights, true_weights, unit_weights, WeightVector};

/// Draws per group used to estimate E[π | A = a] and the regression range.
const CALIBRATION_DRAWS: usize = 20_000;

/// Resolved inputs for one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSetup {
    pub index: usize,
    pub coordinate: f64,
    /// Population at this point with raw per-group sizes; `None` for real data.
    pub spec: Option<SyntheticSpec>,
    /// Complete-case rate per group, when it was estimated.
    pub complete_rate: Option<[f64; 2]>,
    /// `[b₁, b₂]` used to clamp regression predictions and responses.
    pub clamp: Option<(f64, f64)>,
    pub range: (f64, f64),
}

enum Source {
    Synthetic,
    Real(Dataset),
}

fn synthetic_point(
    cfg: &ExperimentConfig,
    index: usize,
    coordinate: f64,
    root: RngStream,
) -> Result<PointSetup> {
    let mut spec = cfg.synthetic.clone().expect("validated synthetic config");
    let target = match &cfg.sweep {
        Some(Sweep::N0 { .. }) => {
            let n = coordinate.round() as usize;
            [n, n]
        }
        Some(Sweep::Ratio { total, .. }) => {
            let n0 = ((*total as f64) / (1.0 + coordinate)).round().max(1.0) as usize;
            [n0, total.saturating_sub(n0).max(1)]
        }
        Some(Sweep::Disparity { .. }) => {
            spec.feature_mean_coefficients.1 *= coordinate;
            spec.n_per_group
        }
        None => spec.n_per_group,
    };
    let calibration = generate_synthetic(
        &spec.with_sizes([CALIBRATION_DRAWS, CALIBRATION_DRAWS]),
        root.child(1 << 40).child(index as u64),
    )?;
    let oracle = PropensityOracle::new(cfg.missingness.clone());
    let mut rate = [0.0; 2];
    for i in 0..calibration.n() {
        rate[calibration.sensitive(i) as usize] += oracle.evaluate(&calibration, i);
    }
    rate.iter_mut().for_each(|r| *r /= CALIBRATION_DRAWS as f64);
    let raw = match cfg.sample_design {
        SampleDesign::Raw => target,
        SampleDesign::CompleteCases => [
            (target[0] as f64 / rate[0]).ceil() as usize,
            (target[1] as f64 / rate[1]).ceil() as usize,
        ],
    };
    let (clamp, range) = match spec.task {
        Task::Classification => (None, (0.0, 1.0)),
        Task::RegressionQuadratic => {
            let y = calibration.responses();
            let r = (percentile(y, 0.001), percentile(y, 0.999));
            (Some(r), r)
        }
    };
    Ok(PointSetup {
        index,
        coordinate,
        spec: Some(spec.with_sizes(raw)),
        complete_rate: Some(rate),
        clamp,
        range,
    })
}

fn real_point(cfg: &ExperimentConfig, data: &Dataset) -> PointSetup {
    let real = cfg.real_data.as_ref().expect("validated real-data config");
    let (clamp, range) = match real.task {
        Task::Classification => (None, (0.0, 1.0)),
        Task::RegressionQuadratic => {
            let y = data.responses();
            let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (Some((lo, hi)), (lo, hi))
        }
    };
    PointSetup {
        index: 0,
        coordinate: f64::NAN,
        spec: None,
        complete_rate: None,
        clamp,
        range,
    }
}

fn load_real(cfg: &ExperimentConfig) -> Result<Dataset> {
    let real = cfg.real_data.as_ref().expect("validated real-data config");
    let data = load_csv(&real.csv, &real.schema)?;
    if let Some(i) = (0..data.n()).find(|&i| !data.is_complete(i)) {
        return Err(Error::Data {
            row: i,
            reason: "real-data mode needs a fully observed table; missingness is injected".into(),
        });
    }
    Ok(if real.standardize {
        data.standardized()
    } else {
        data
    })
}

pub fn prepare_points(cfg: &ExperimentConfig) -> Result<Vec<PointSetup>> {
    let root = RngStream::new(cfg.seed, 0);
    if cfg.experiment == Experiment::RealData {
        return Ok(vec![real_point(cfg, &load_real(cfg)?)]);
    }
    cfg.points()
        .into_iter()
        .enumerate()
        .map(|(i, c)| synthetic_point(cfg, i, c, root))
        .collect()
}

fn seed_from(stream: RngStream) -> u64 {
    stream.stream_id ^ stream.seed.rotate_left(32)
}

fn train_predictor(
    cfg: &ExperimentConfig,
    train: &Dataset,
    task: Task,
    stream: RngStream,
) -> Result<Box<dyn Predictor>> {
    Ok(match cfg.predictor {
        PredictorKind::LinearSvm => {
            let svm = SvmConfig {
                seed: cfg.svm.seed ^ seed_from(stream),
                ..cfg.svm
            };
            Box::new(train_svm(train, task, &svm)?)
        }
        PredictorKind::RandomForest => {
            let forest = ForestConfig {
                seed: cfg.forest.seed ^ seed_from(stream),
                ..cfg.forest.clone()
            };
            Box::new(train_forest(train, task, &forest)?)
        }
    })
}

/// Everything shared by the weight methods of one repeat.
struct Realisation {
    data: Dataset,
    oracle: PropensityOracle,
    cc: CompleteCases,
    losses: Vec<f64>,
    truth: ApgTruth,
}

fn realise(
    cfg: &ExperimentConfig,
    point: &PointSetup,
    source: &Source,
    stream: RngStream,
) -> Result<Realisation> {
    let task = cfg.task();
    let (data, oracle, g, truth): (
        Dataset,
        PropensityOracle,
        Box<dyn Predictor>,
        Option<ApgTruth>,
    ) = match source {
        Source::Synthetic => {
            let spec = point.spec.as_ref().expect("synthetic point");
            let full = generate_synthetic(spec, stream.child(1))?;
            let (data, oracle) = inject(&full, &cfg.missingness, stream.child(2))?;
            let g = match cfg.training {
                Training::CompleteCases => {
                    train_predictor(cfg, &complete_cases(&data)?.data, task, stream.child(6))?
                }
                Training::Fresh { n_per_group } => {
                    let train = generate_synthetic(&spec.with_sizes(n_per_group), stream.child(3))?;
                    train_predictor(cfg, &train, task, stream.child(6))?
                }
            };
            (data, oracle, g, None)
        }
        Source::Real(full) => {
            let real = cfg.real_data.as_ref().expect("real-data config");
            let (first, second) = split(full, real.train_fraction, stream.child(1))?;
            let (data, oracle) = inject(&first, &cfg.missingness, stream.child(2))?;
            let g = match cfg.training {
                Training::CompleteCases => {
                    train_predictor(cfg, &complete_cases(&data)?.data, task, stream.child(6))?
                }
                Training::Fresh { .. } => train_predictor(cfg, &first, task, stream.child(6))?,
            };
            let truth = apg_holdout(g.as_ref(), &second, point.clamp)?;
            (data, oracle, g, Some(truth))
        }
    };
    let truth = match truth {
        Some(t) => t,
        None => apg_true(
            g.as_ref(),
            point.spec.as_ref().expect("synthetic point"),
            cfg.mc_samples,
            stream.child(5),
            point.clamp,
        )?,
    };
    let cc = complete_cases(&data)?;
    let losses = losses(g.as_ref(), &cc.data, point.clamp);
    Ok(Realisation {
        data,
        oracle,
        cc,
        losses,
        truth,
    })
}

fn method_weights(
    cfg: &ExperimentConfig,
    r: &Realisation,
    method: WeightMethod,
    stream: RngStream,
) -> Result<WeightVector> {
    let columns = cfg.missingness.always_observed_features(r.data.p());
    match method {
        WeightMethod::Unweighted => unit_weights(&r.cc),
        WeightMethod::TrueWeights => true_weights(&r.cc, &r.oracle),
        WeightMethod::Logistic => estimated_weights(
            &r.cc,
            &fit_logistic(&r.data, &columns, FeatureTransform::Identity, &cfg.logistic)?,
        ),
        WeightMethod::LogisticMisspecified => estimated_weights(
            &r.cc,
            &fit_logistic(&r.data, &columns, FeatureTransform::Cubed, &cfg.logistic)?,
        ),
        WeightMethod::RandomForest => {
            let forest = ForestConfig {
                seed: cfg.propensity_forest.seed ^ seed_from(stream),
                ..cfg.propensity_forest.clone()
            };
            estimated_weights(&r.cc, &fit_forest(&r.data, &columns, &forest)?)
        }
    }
}

fn regime_id(regime: LowerRegime) -> &'static str {
    match regime {
        LowerRegime::LargeDeltaHat => "large_delta_hat",
        LowerRegime::SmallDeltaHat => "small_delta_hat",
        LowerRegime::Inconclusive => "inconclusive",
    }
}

fn method_row(
    cfg: &ExperimentConfig,
    point: &PointSetup,
    repeat: usize,
    r: &Realisation,
    method: WeightMethod,
    stream: RngStream,
) -> Result<ResultRow> {
    let w = method_weights(cfg, r, method, stream)?;
    let risks = [
        weighted_risk(&r.losses, &w, 0)?,
        weighted_risk(&r.losses, &w, 1)?,
    ];
    let report = FairnessReport::new(risks, &r.truth);
    let inputs = BoundInputs {
        n: r.cc.group_counts,
        second_moment: w.second_moment(),
        max_weight: w.max(),
        d: cfg.complexity_dim(),
        delta: cfg.delta,
        task: match cfg.task() {
            Task::Classification => ModelClass::Classification,
            Task::RegressionQuadratic => ModelClass::Regression,
        },
        range: point.range,
        tv: if method == WeightMethod::TrueWeights {
            [Some(0.0), Some(0.0)]
        } else {
            [None, None]
        },
        sigma2: [risks[0].sigma2, risks[1].sigma2],
    };
    let bounds = evaluate(
        &inputs,
        (method == WeightMethod::TrueWeights).then_some(report.delta_hat),
    )?;
    let mut row = ResultRow::failed(
        cfg.experiment.id(),
        point.index,
        point.coordinate,
        repeat,
        method.id(),
        String::new(),
    );
    row.status = "ok".into();
    row.n0 = Some(r.cc.group_counts[0]);
    row.n1 = Some(r.cc.group_counts[1]);
    row.delta_hat = Some(report.delta_hat);
    row.delta_true = Some(report.delta_true);
    row.mc_standard_error = Some(report.mc_standard_error);
    row.bias = Some(report.bias);
    row.risk0 = Some(risks[0].value);
    row.risk1 = Some(risks[1].value);
    row.true_risk0 = Some(r.truth.risks[0]);
    row.true_risk1 = Some(r.truth.risks[1]);
    row.max_weight = Some(w.max());
    row.second_moment0 = Some(w.second_moment()[0]);
    row.second_moment1 = Some(w.second_moment()[1]);
    row.upper = bounds.upper.value;
    row.upper_partial = Some(bounds.upper.partial);
    row.thm1_moment_ok = Some(bounds.flags.thm1_moment_ok);
    if let Some(lower) = bounds.lower {
        row.lower = lower.value;
        row.regime = regime_id(lower.regime).into();
        row.s = Some(lower.s);
        row.thm2_variance_ok = Some(lower.variance_ok);
    }
    Ok(row)
}

fn run_repeat(
    cfg: &ExperimentConfig,
    point: &PointSetup,
    source: &Source,
    repeat: usize,
) -> Vec<ResultRow> {
    let start = Instant::now();
    let stream = RngStream::new(cfg.seed, 0)
        .child(point.index as u64)
        .child(repeat as u64 + 1);
    let fail = |method: WeightMethod, reason: String| {
        ResultRow::failed(
            cfg.experiment.id(),
            point.index,
            point.coordinate,
            repeat,
            method.id(),
            reason,
        )
    };
    let mut rows: Vec<ResultRow> = match realise(cfg, point, source, stream) {
        Ok(r) => cfg
            .weight_methods
            .iter()
            .map(|&m| {
                method_row(cfg, point, repeat, &r, m, stream.child(100 + m as u64))
                    .unwrap_or_else(|e| fail(m, e.to_string()))
            })
            .collect(),
        Err(e) => cfg
            .weight_methods
            .iter()
            .map(|&m| fail(m, e.to_string()))
            .collect(),
    };
    let ms = start.elapsed().as_millis() as u64;
    rows.iter_mut().for_each(|r| r.wall_ms = ms);
    rows
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub points: Vec<PointSetup>,
    pub rows: Vec<ResultRow>,
    pub summary: Summary,
}

/// Execute every (sweep point, repeat) job on `workers` threads.
pub fn run(cfg: &ExperimentConfig, workers: usize) -> Result<RunOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    pool.install(|| {
        let points = prepare_points(cfg)?;
        let source = if cfg.experiment == Experiment::RealData {
            Source::Real(load_real(cfg)?)
        } else {
            Source::Synthetic
        };
        let jobs: Vec<(usize, usize)> = (0..points.len())
            .flat_map(|p| (0..cfg.repeats).map(move |r| (p, r)))
            .collect();
        let mut rows: Vec<ResultRow> = jobs
            .par_iter()
            .flat_map_iter(|&(p, r)| run_repeat(cfg, &points[p], &source, r))
            .collect();
        sort_rows(&mut rows);
        let summary = summarize(&rows);
        Ok(RunOutput {
            points,
            rows,
            summary,
        })
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    pub results_schema_version: u32,
    pub seed: u64,
    pub workers: usize,
    pub rows: usize,
    pub failures: usize,
    pub points: Vec<PointSetup>,
    pub config: ExperimentConfig,
}

/// Write results.csv, summary.json and manifest.json into `dir`.
pub fn write_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    workers: usize,
    out: &RunOutput,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let results = dir.join("results.csv");
    let file = std::fs::File::create(&results).map_err(|e| Error::io(&results, e))?;
    write_results(std::io::BufWriter::new(file), &out.rows)?;
    let summary = dir.join("summary.json");
    std::fs::write(&summary, serde_json::to_string_pretty(&out.summary)?)
        .map_err(|e| Error::io(&summary, e))?;
    let manifest = dir.join("manifest.json");
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        results_schema_version: RESULTS_SCHEMA_VERSION,
        seed: cfg.seed,
        workers,
        rows: out.rows.len(),
        failures: out.summary.failures,
        points: out.points.clone(),
        config: cfg.clone(),
    };
    std::fs::write(&manifest, serde_json::to_string_pretty(&m)?)
        .map_err(|e| Error::io(&manifest, e))?;
    Ok(vec![results, summary, manifest])
}
