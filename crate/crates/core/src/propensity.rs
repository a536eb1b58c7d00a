//! Propensity score models π̂(z, A) fitted to the complete-case indicator R.
//!
//! Fits only read always-observed feature columns plus the sensitive
//! attribute, so π̂ can be evaluated on every row, complete or not.
//! Shipped estimators are logistic regression (IRLS, optionally on cubed
//! features to get a deliberately misspecified model) and a bagged CART
//! forest. Other estimators plug in through [`ProbabilityModel`].

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::forest::{Forest, ForestConfig, Matrix};
use crate::math::{dot, sigmoid, softplus};
use crate::missingness::PropensityOracle;

pub const FIT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    TrueOracle,
    Logistic,
    LogisticMisspecified,
    RandomForest,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureTransform {
    #[default]
    Identity,
    /// Each feature x is replaced by x³.
    Cubed,
}

impl FeatureTransform {
    fn apply(self, v: f64) -> f64 {
        match self {
            FeatureTransform::Identity => v,
            FeatureTransform::Cubed => v * v * v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub max_iterations: usize,
    /// Stop once the largest coefficient change falls below this.
    pub tolerance: f64,
    /// L2 penalty on every coefficient, intercept included.
    pub ridge: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-8,
            ridge: 1e-8,
        }
    }
}

impl LogisticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::validation("max_iterations", "must be at least 1"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::validation("tolerance", "must be positive"));
        }
        if !(self.ridge >= 0.0) {
            return Err(Error::validation("ridge", "must be nonnegative"));
        }
        Ok(())
    }
}

pub const DEFAULT_CLIP: (f64, f64) = (1e-3, 1.0 - 1e-3);

/// Ridge-penalised logistic regression fitted by iteratively reweighted least squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// Intercept first, then one coefficient per design column.
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Set when a Newton step was singular or lowered the penalised
    /// log-likelihood and a gradient step was taken instead.
    pub gradient_fallback: bool,
    /// Penalised log-likelihood after each iteration, starting at β = 0.
    pub loglik_trace: Vec<f64>,
}

impl LogisticModel {
    /// `x` excludes the intercept column; `y` holds 0/1 labels.
    pub fn fit(x: Matrix<'_>, y: &[f64], cfg: &LogisticConfig) -> Result<Self> {
        cfg.validate()?;
        let n = x.rows();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        if n == 0 {
            return Err(Error::Precondition(
                "logistic fit needs at least one row".into(),
            ));
        }
        if x.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition(
                "design matrix has non-finite entries".into(),
            ));
        }
        let has_both = y.contains(&1.0) && y.contains(&0.0);
        if !has_both && cfg.ridge == 0.0 {
            return Err(Error::Precondition(
                "single label class requires ridge > 0".into(),
            ));
        }

        let k = x.p + 1;
        let row = |i: usize| &x.values[i * x.p..(i + 1) * x.p];
        let eta = |beta: &[f64], i: usize| beta[0] + dot(&beta[1..], row(i));
        let loglik = |beta: &[f64]| -> f64 {
            let ll: f64 = (0..n)
                .map(|i| {
                    let e = eta(beta, i);
                    y[i] * e - softplus(e)
                })
                .sum();
            ll - 0.5 * cfg.ridge * beta.iter().map(|b| b * b).sum::<f64>()
        };
        let gradient = |beta: &[f64]| -> Vec<f64> {
            let mut g = vec![0.0; k];
            for i in 0..n {
                let r = y[i] - sigmoid(eta(beta, i));
                g[0] += r;
                for (gj, xj) in g[1..].iter_mut().zip(row(i)) {
                    *gj += r * xj;
                }
            }
            for (gj, b) in g.iter_mut().zip(beta) {
                *gj -= cfg.ridge * b;
            }
            g
        };

        let mut beta = vec![0.0; k];
        let mut ll = loglik(&beta);
        let mut model = LogisticModel {
            coefficients: Vec::new(),
            iterations: 0,
            converged: false,
            gradient_fallback: false,
            loglik_trace: vec![ll],
        };
        let slack = |ll: f64| 1e-10 * ll.abs().max(1.0);

        for _ in 0..cfg.max_iterations {
            model.iterations += 1;
            let grad = gradient(&beta);
            let mut hess = DMatrix::<f64>::zeros(k, k);
            let mut xi = vec![1.0; k];
            for i in 0..n {
                xi[1..].copy_from_slice(row(i));
                let mu = sigmoid(eta(&beta, i));
                let w = mu * (1.0 - mu);
                for a in 0..k {
                    let wa = w * xi[a];
                    for b in 0..=a {
                        hess[(a, b)] += wa * xi[b];
                    }
                }
            }
            for a in 0..k {
                hess[(a, a)] += cfg.ridge;
                for b in 0..a {
                    hess[(b, a)] = hess[(a, b)];
                }
            }
            let newton = hess
                .cholesky()
                .map(|c| c.solve(&DVector::from_column_slice(&grad)))
                .filter(|s| s.iter().all(|v| v.is_finite()));

            let mut next = None;
            if let Some(step) = newton {
                let cand: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, s)| b + s).collect();
                let cand_ll = loglik(&cand);
                if cand_ll >= ll - slack(ll) {
                    next = Some((cand, cand_ll));
                }
            }
            let (cand, cand_ll) = match next {
                Some(v) => v,
                None => {
                    model.gradient_fallback = true;
                    gradient_step(&beta, &grad, ll, &loglik)
                }
            };
            let change = beta
                .iter()
                .zip(&cand)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            beta = cand;
            ll = cand_ll;
            model.loglik_trace.push(ll);
            if change < cfg.tolerance {
                model.converged = true;
                break;
            }
        }
        model.coefficients = beta;
        Ok(model)
    }

    pub fn probability(&self, design_row: &[f64]) -> f64 {
        sigmoid(self.coefficients[0] + dot(&self.coefficients[1..], design_row))
    }
}

/// Backtracking gradient ascent step; returns the current point if no step helps.
fn gradient_step(
    beta: &[f64],
    grad: &[f64],
    ll: f64,
    loglik: &impl Fn(&[f64]) -> f64,
) -> (Vec<f64>, f64) {
    let norm2: f64 = grad.iter().map(|g| g * g).sum();
    let mut t = 1.0 / norm2.sqrt().max(1.0);
    for _ in 0..60 {
        let cand: Vec<f64> = beta.iter().zip(grad).map(|(b, g)| b + t * g).collect();
        let cand_ll = loglik(&cand);
        if cand_ll >= ll + 1e-4 * t * norm2 {
            return (cand, cand_ll);
        }
        t *= 0.5;
    }
    (beta.to_vec(), ll)
}

/// Extension point for propensity estimators not shipped with the crate.
/// `design_row` is the fit's feature columns followed by A.
pub trait ProbabilityModel: Debug + Send + Sync {
    fn probability(&self, design_row: &[f64]) -> f64;
    fn name(&self) -> &str;
}

#[derive(Debug, Clone)]
enum Model {
    Oracle(PropensityOracle),
    Logistic(LogisticModel),
    Forest(Forest),
    Custom(Arc<dyn ProbabilityModel>),
}

/// A fitted propensity model with its input mapping and probability clip.
#[derive(Debug, Clone)]
pub struct PropensityFit {
    kind: ModelKind,
    model: Model,
    transform: FeatureTransform,
    columns: Vec<usize>,
    clip: (f64, f64),
}

impl PropensityFit {
    /// The true propensity, evaluated from retained values.
    pub fn oracle(oracle: PropensityOracle) -> Self {
        Self {
            kind: ModelKind::TrueOracle,
            model: Model::Oracle(oracle),
            transform: FeatureTransform::Identity,
            columns: Vec::new(),
            clip: DEFAULT_CLIP,
        }
    }

    pub fn custom(model: Arc<dyn ProbabilityModel>, columns: Vec<usize>) -> Self {
        Self {
            kind: ModelKind::Custom,
            model: Model::Custom(model),
            transform: FeatureTransform::Identity,
            columns,
            clip: DEFAULT_CLIP,
        }
    }

    pub fn with_clip(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && lo <= hi && hi < 1.0) {
            return Err(Error::validation("clip", "need 0 < lo ≤ hi < 1"));
        }
        self.clip = (lo, hi);
        Ok(self)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn clip(&self) -> (f64, f64) {
        self.clip
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn logistic(&self) -> Option<&LogisticModel> {
        match &self.model {
            Model::Logistic(m) => Some(m),
            _ => None,
        }
    }

    /// π̂ for row `i` of `data`.
    pub fn predict(&self, data: &Dataset, i: usize) -> Result<f64> {
        self.predict_parts(data.row(i), data.response(i), data.sensitive(i))
    }

    /// π̂ from a full feature row, its response and its sensitive value.
    /// Fitted models only read their own columns; the oracle may read anything
    /// its logit references.
    pub fn predict_parts(&self, row: &[f64], response: f64, sensitive: u8) -> Result<f64> {
        let raw = match &self.model {
            Model::Oracle(o) => {
                let needed = o
                    .spec()
                    .logit_terms
                    .iter()
                    .filter_map(|t| match t.source {
                        crate::missingness::TermSource::Feature(j) => Some(j + 1),
                        _ => None,
                    })
                    .max()
                    .unwrap_or(0);
                if row.len() < needed {
                    return Err(Error::DimensionMismatch {
                        expected: needed,
                        got: row.len(),
                    });
                }
                o.evaluate_parts(row, response, sensitive)
            }
            Model::Logistic(m) => m.probability(&self.design_row(row, sensitive)?),
            Model::Forest(f) => f.predict_mean(&self.design_row(row, sensitive)?),
            Model::Custom(c) => c.probability(&self.design_row(row, sensitive)?),
        };
        Ok(raw.clamp(self.clip.0, self.clip.1))
    }

    fn design_row(&self, row: &[f64], sensitive: u8) -> Result<Vec<f64>> {
        let needed = self.columns.iter().max().map_or(0, |m| m + 1);
        if row.len() < needed {
            return Err(Error::DimensionMismatch {
                expected: needed,
                got: row.len(),
            });
        }
        let mut out: Vec<f64> = self
            .columns
            .iter()
            .map(|&j| self.transform.apply(row[j]))
            .collect();
        out.push(f64::from(sensitive));
        Ok(out)
    }

    /// Versioned JSON rendering of the fitted parameters, for debugging.
    pub fn to_text(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Snapshot<'a> {
            format_version: u32,
            kind: ModelKind,
            transform: FeatureTransform,
            columns: &'a [usize],
            clip: (f64, f64),
            #[serde(skip_serializing_if = "Option::is_none")]
            oracle: Option<&'a PropensityOracle>,
            #[serde(skip_serializing_if = "Option::is_none")]
            logistic: Option<&'a LogisticModel>,
            #[serde(skip_serializing_if = "Option::is_none")]
            forest: Option<&'a Forest>,
            #[serde(skip_serializing_if = "Option::is_none")]
            custom: Option<&'a str>,
        }
        let snap = Snapshot {
            format_version: FIT_FORMAT_VERSION,
            kind: self.kind,
            transform: self.transform,
            columns: &self.columns,
            clip: self.clip,
            oracle: match &self.model {
                Model::Oracle(o) => Some(o),
                _ => None,
            },
            logistic: self.logistic(),
            forest: match &self.model {
                Model::Forest(f) => Some(f),
                _ => None,
            },
            custom: match &self.model {
                Model::Custom(c) => Some(c.name()),
                _ => None,
            },
        };
        Ok(serde_json::to_string_pretty(&snap)?)
    }
}

/// Design matrix (selected columns, transformed, then A) and R labels for every row.
fn design(
    data: &Dataset,
    columns: &[usize],
    transform: FeatureTransform,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if let Some(&j) = columns.iter().find(|&&j| j >= data.p()) {
        return Err(Error::DimensionMismatch {
            expected: data.p(),
            got: j + 1,
        });
    }
    let mut x = Vec::with_capacity(data.n() * (columns.len() + 1));
    for i in 0..data.n() {
        for &j in columns {
            let v = data
                .observed(i, j)
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Data {
                    row: i,
                    reason: format!("propensity column {j} is not observed"),
                })?;
            x.push(transform.apply(v));
        }
        x.push(f64::from(data.sensitive(i)));
    }
    let labels = data
        .complete_case_indicator()
        .into_iter()
        .map(|r| if r { 1.0 } else { 0.0 })
        .collect();
    Ok((x, labels))
}

/// Logistic propensity model on `columns` plus A, fitted to R over all rows.
pub fn fit_logistic(
    data: &Dataset,
    columns: &[usize],
    transform: FeatureTransform,
    cfg: &LogisticConfig,
) -> Result<PropensityFit> {
    let (x, labels) = design(data, columns, transform)?;
    let model = LogisticModel::fit(Matrix::new(&x, columns.len() + 1), &labels, cfg)?;
    Ok(PropensityFit {
        kind: match transform {
            FeatureTransform::Identity => ModelKind::Logistic,
            FeatureTransform::Cubed => ModelKind::LogisticMisspecified,
        },
        model: Model::Logistic(model),
        transform,
        columns: columns.to_vec(),
        clip: DEFAULT_CLIP,
    })
}

/// Random-forest propensity model: mean leaf class-1 fraction across trees.
pub fn fit_forest(data: &Dataset, columns: &[usize], cfg: &ForestConfig) -> Result<PropensityFit> {
    let (x, labels) = design(data, columns, FeatureTransform::Identity)?;
    let forest = Forest::fit(Matrix::new(&x, columns.len() + 1), &labels, cfg)?;
    Ok(PropensityFit {
        kind: ModelKind::RandomForest,
        model: Model::Forest(forest),
        transform: FeatureTransform::Identity,
        columns: columns.to_vec(),
        clip: DEFAULT_CLIP,
    })
}
