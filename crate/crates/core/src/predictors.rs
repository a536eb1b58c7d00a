//! Prediction models g whose accuracy parity gap is being estimated.
//!
//! `LinearSvm` is a primal linear SVM trained by stochastic subgradient
//! descent with the Pegasos schedule η_t = 1/(λt): hinge loss for 0/1
//! labels, ε-insensitive loss for real responses. Features (and a real
//! response) are standardised internally and the learned hyperplane is
//! mapped back to the original units. The returned weights are the average
//! of the iterates over the second half of training.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::forest::{Forest, ForestConfig, Matrix};
use crate::math::dot;
use crate::rng::RngStream;

pub trait Predictor: Send + Sync {
    /// g(x): a 0/1 label for classification, a real value for regression.
    fn predict(&self, x: &[f64]) -> f64;
    fn task(&self) -> Task;
    fn n_features(&self) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    /// Half-width of the insensitive zone for regression, in standardised response units.
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            epochs: 20,
            epsilon: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    /// Hyperplane in original feature units: score = weights·x + bias.
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    pub task: Task,
    /// Primal objective (standardised units) at the mean iterate of each epoch.
    pub objective_trace: Vec<f64>,
}

impl LinearSvmModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

impl Predictor for LinearSvmModel {
    fn predict(&self, x: &[f64]) -> f64 {
        let s = self.score(x);
        match self.task {
            Task::Classification => {
                if s >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Task::RegressionQuadratic => s,
        }
    }

    fn task(&self) -> Task {
        self.task
    }

    fn n_features(&self) -> usize {
        self.weights.len()
    }
}

fn column_scaling(data: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let n = data.n() as f64;
    (0..data.p())
        .map(|j| {
            let col = data.column(j);
            let m = col.iter().sum::<f64>() / n;
            let v = col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
            (m, if v > 0.0 { v.sqrt() } else { 1.0 })
        })
        .unzip()
}

/// Train on every row of `train` (pass complete cases only).
pub fn train_svm(train: &Dataset, task: Task, cfg: &SvmConfig) -> Result<LinearSvmModel> {
    if !(cfg.lambda > 0.0) || cfg.epochs == 0 {
        return Err(Error::validation(
            "svm",
            "lambda must be positive and epochs at least 1",
        ));
    }
    let n = train.n();
    let p = train.p();
    if n == 0 {
        return Err(Error::Precondition("empty training set".into()));
    }
    let (x_mean, x_sd) = column_scaling(train);
    // Standardised rows with a trailing constant 1 for the (regularised) bias.
    let k = p + 1;
    let mut xs = Vec::with_capacity(n * k);
    for i in 0..n {
        xs.extend(
            train
                .row(i)
                .iter()
                .enumerate()
                .map(|(j, v)| (v - x_mean[j]) / x_sd[j]),
        );
        xs.push(1.0);
    }
    let (targets, y_mean, y_sd) = match task {
        Task::Classification => {
            let ys = train.responses();
            let pos = ys.iter().filter(|&&y| y == 1.0).count();
            if pos == 0 || pos == n {
                return Err(Error::Precondition(
                    "SVM training set has a single class".into(),
                ));
            }
            (
                ys.iter()
                    .map(|&y| if y == 1.0 { 1.0 } else { -1.0 })
                    .collect::<Vec<_>>(),
                0.0,
                1.0,
            )
        }
        Task::RegressionQuadratic => {
            let ys = train.responses();
            let m = ys.iter().sum::<f64>() / n as f64;
            let v = ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / n as f64;
            let sd = if v > 0.0 { v.sqrt() } else { 1.0 };
            (ys.iter().map(|y| (y - m) / sd).collect(), m, sd)
        }
    };
    let row = |i: usize| &xs[i * k..(i + 1) * k];
    let loss = |w: &[f64], i: usize| -> f64 {
        let s = dot(w, row(i));
        match task {
            Task::Classification => (1.0 - targets[i] * s).max(0.0),
            Task::RegressionQuadratic => ((s - targets[i]).abs() - cfg.epsilon).max(0.0),
        }
    };
    let objective = |w: &[f64]| -> f64 {
        0.5 * cfg.lambda * dot(w, w) + (0..n).map(|i| loss(w, i)).sum::<f64>() / n as f64
    };
    let zero = vec![0.0; k];
    let radius = match task {
        Task::Classification => 1.0 / cfg.lambda.sqrt(),
        Task::RegressionQuadratic => (2.0 * objective(&zero) / cfg.lambda).sqrt(),
    };

    let mut rng = RngStream::new(cfg.seed, 0).rng();
    let mut order: Vec<usize> = (0..n).collect();
    let mut w = zero.clone();
    let total = cfg.epochs * n;
    let avg_from = total / 2;
    let mut avg = zero.clone();
    let mut avg_count = 0usize;
    let mut objective_trace = Vec::with_capacity(cfg.epochs);
    let mut t = 0usize;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_avg = zero.clone();
        for &i in &order {
            t += 1;
            let eta = 1.0 / (cfg.lambda * t as f64);
            let x = row(i);
            let s = dot(&w, x);
            let direction = match task {
                Task::Classification => {
                    if targets[i] * s < 1.0 {
                        targets[i]
                    } else {
                        0.0
                    }
                }
                Task::RegressionQuadratic => {
                    let r = s - targets[i];
                    if r > cfg.epsilon {
                        -1.0
                    } else if r < -cfg.epsilon {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
            let shrink = 1.0 - eta * cfg.lambda;
            for (wj, xj) in w.iter_mut().zip(x) {
                *wj = shrink * *wj + eta * direction * xj;
            }
            let norm = dot(&w, &w).sqrt();
            if norm > radius {
                let f = radius / norm;
                w.iter_mut().for_each(|v| *v *= f);
            }
            for (a, v) in epoch_avg.iter_mut().zip(&w) {
                *a += v;
            }
            if t > avg_from {
                avg_count += 1;
                for (a, v) in avg.iter_mut().zip(&w) {
                    *a += v;
                }
            }
        }
        epoch_avg.iter_mut().for_each(|v| *v /= n as f64);
        objective_trace.push(objective(&epoch_avg));
    }
    avg.iter_mut().for_each(|v| *v /= avg_count.max(1) as f64);

    let weights: Vec<f64> = (0..p).map(|j| avg[j] * y_sd / x_sd[j]).collect();
    let bias = y_mean + y_sd * (avg[p] - (0..p).map(|j| avg[j] * x_mean[j] / x_sd[j]).sum::<f64>());
    Ok(LinearSvmModel {
        weights,
        bias,
        lambda: cfg.lambda,
        epochs: cfg.epochs,
        seed: cfg.seed,
        task,
        objective_trace,
    })
}

/// Random forest predictor: leaf means averaged for regression, majority vote
/// for classification.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub forest: Forest,
    pub config: ForestConfig,
    pub task: Task,
}

impl Predictor for ForestModel {
    fn predict(&self, x: &[f64]) -> f64 {
        match self.task {
            Task::Classification => self.forest.predict_vote(x),
            Task::RegressionQuadratic => self.forest.predict_mean(x),
        }
    }

    fn task(&self) -> Task {
        self.task
    }

    fn n_features(&self) -> usize {
        self.forest.p()
    }
}

pub fn train_forest(train: &Dataset, task: Task, cfg: &ForestConfig) -> Result<ForestModel> {
    let mut x = Vec::with_capacity(train.n() * train.p());
    for i in 0..train.n() {
        x.extend_from_slice(train.row(i));
    }
    let forest = Forest::fit(Matrix::new(&x, train.p()), train.responses(), cfg)?;
    Ok(ForestModel {
        forest,
        config: cfg.clone(),
        task,
    })
}

/// |g(x) − y|. Classification gives the 0/1 mismatch; for regression both g
/// and y are clamped into `bounds` when given.
pub fn predict_loss(model: &dyn Predictor, row: &[f64], y: f64, bounds: Option<(f64, f64)>) -> f64 {
    assert_eq!(row.len(), model.n_features(), "feature dimension mismatch");
    let g = model.predict(row);
    match model.task() {
        Task::Classification => {
            if g == y {
                0.0
            } else {
                1.0
            }
        }
        Task::RegressionQuadratic => match bounds {
            Some((lo, hi)) => (g.clamp(lo, hi) - y.clamp(lo, hi)).abs(),
            None => (g - y).abs(),
        },
    }
}
