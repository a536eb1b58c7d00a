//! Weighted group risks, the accuracy parity gap estimator, and its
//! Monte Carlo ground truth.

use serde::{Deserialize, Serialize};

use crate::dataset::{generate_synthetic, Dataset, SyntheticSpec};
use crate::error::{Error, Result};
use crate::math::{mean, population_variance};
use crate::predictors::{predict_loss, Predictor};
use crate::rng::RngStream;
use crate::weights::WeightVector;

/// Ê_a(g, ω) and the divide-by-n variance of ω·loss within the group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupRisk {
    pub group: u8,
    pub value: f64,
    pub n: usize,
    pub sigma2: f64,
}

/// `(1/n_a) Σ_{i ∈ a} ω_i · loss_i` over complete cases of group `a`.
pub fn weighted_risk(losses: &[f64], weights: &WeightVector, group: u8) -> Result<GroupRisk> {
    if losses.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            got: losses.len(),
        });
    }
    let terms: Vec<f64> = weights
        .groups()
        .iter()
        .zip(weights.values())
        .zip(losses)
        .filter(|((&g, _), _)| g == group)
        .map(|((_, w), l)| w * l)
        .collect();
    if terms.is_empty() {
        return Err(Error::EmptyGroup { group });
    }
    Ok(GroupRisk {
        group,
        value: mean(&terms),
        n: terms.len(),
        sigma2: population_variance(&terms),
    })
}

/// Δ̂_S(g, ω) = |Ê₀ − Ê₁|.
pub fn apg_estimate(risk0: &GroupRisk, risk1: &GroupRisk) -> f64 {
    (risk0.value - risk1.value).abs()
}

pub fn bias(delta_true: f64, delta_hat: f64) -> f64 {
    (delta_true - delta_hat).abs()
}

/// Per-row losses of `model` on every row of `data`.
pub fn losses(model: &dyn Predictor, data: &Dataset, bounds: Option<(f64, f64)>) -> Vec<f64> {
    (0..data.n())
        .map(|i| predict_loss(model, data.row(i), data.response(i), bounds))
        .collect()
}

/// Unweighted Δ on fully observed data with a delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApgTruth {
    pub estimate: f64,
    pub standard_error: f64,
    /// Group risks `[E₀, E₁]`.
    pub risks: [f64; 2],
    pub samples: [usize; 2],
}

impl ApgTruth {
    /// E₀ − E₁, before taking the absolute value.
    pub fn signed(&self) -> f64 {
        self.risks[0] - self.risks[1]
    }
}

/// Δ computed on every row of a fully observed `data`.
pub fn apg_holdout(
    model: &dyn Predictor,
    data: &Dataset,
    bounds: Option<(f64, f64)>,
) -> Result<ApgTruth> {
    let l = losses(model, data, bounds);
    let mut by_group: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (i, v) in l.into_iter().enumerate() {
        by_group[data.sensitive(i) as usize].push(v);
    }
    for (g, v) in by_group.iter().enumerate() {
        if v.is_empty() {
            return Err(Error::EmptyGroup { group: g as u8 });
        }
    }
    let risks = [mean(&by_group[0]), mean(&by_group[1])];
    let var = |v: &[f64]| {
        if v.len() < 2 {
            0.0
        } else {
            population_variance(v) * v.len() as f64 / (v.len() - 1) as f64
        }
    };
    let se = (var(&by_group[0]) / by_group[0].len() as f64
        + var(&by_group[1]) / by_group[1].len() as f64)
        .sqrt();
    Ok(ApgTruth {
        estimate: (risks[0] - risks[1]).abs(),
        standard_error: se,
        risks,
        samples: [by_group[0].len(), by_group[1].len()],
    })
}

/// Monte Carlo Δ_T(g): `samples` fresh draws per group from `spec`.
pub fn apg_true(
    model: &dyn Predictor,
    spec: &SyntheticSpec,
    samples: usize,
    stream: RngStream,
    bounds: Option<(f64, f64)>,
) -> Result<ApgTruth> {
    if samples < 1000 {
        return Err(Error::Precondition(format!(
            "Monte Carlo ground truth needs at least 1000 samples per group, got {samples}"
        )));
    }
    let fresh = generate_synthetic(&spec.with_sizes([samples, samples]), stream)?;
    apg_holdout(model, &fresh, bounds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub delta_hat: f64,
    pub delta_true: f64,
    pub bias: f64,
    pub risks: [GroupRisk; 2],
    pub mc_samples: usize,
    pub mc_standard_error: f64,
}

impl FairnessReport {
    pub fn new(risks: [GroupRisk; 2], truth: &ApgTruth) -> Self {
        let delta_hat = apg_estimate(&risks[0], &risks[1]);
        Self {
            delta_hat,
            delta_true: truth.estimate,
            bias: bias(truth.estimate, delta_hat),
            risks,
            mc_samples: truth.samples[0].min(truth.samples[1]),
            mc_standard_error: truth.standard_error,
        }
    }
}
