//! Missingness injection under MCAR / MAR / MNAR logit-linear propensity
//! models, and complete-case extraction.
//!
//! One Bernoulli draw per row decides whether the row is a complete case.
//! Rows that are not selected lose every target column at once, so a row is
//! either fully observed or has exactly the target set missing.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::math::sigmoid;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mechanism {
    Mcar,
    Mar,
    Mnar,
}

/// Variable read by one logit term. Feature indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermSource {
    Intercept,
    Feature(usize),
    Response,
    Sensitive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogitTerm {
    pub source: TermSource,
    pub coefficient: f64,
}

impl LogitTerm {
    pub fn new(source: TermSource, coefficient: f64) -> Self {
        Self {
            source,
            coefficient,
        }
    }
}

/// `logit π(z, A) = Σ coefficient · source`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingnessSpec {
    pub mechanism: Mechanism,
    pub logit_terms: Vec<LogitTerm>,
    /// Feature columns removed together when a row is not selected.
    pub target_features: BTreeSet<usize>,
    #[serde(default)]
    pub target_response: bool,
}

impl MissingnessSpec {
    /// Constant logit, independent of the data.
    pub fn mcar(
        logit: f64,
        target_features: impl IntoIterator<Item = usize>,
        target_response: bool,
    ) -> Self {
        Self {
            mechanism: Mechanism::Mcar,
            logit_terms: vec![LogitTerm::new(TermSource::Intercept, logit)],
            target_features: target_features.into_iter().collect(),
            target_response,
        }
    }

    /// `intercept + slope · Σ_{j ∈ sum_over} x_j`.
    pub fn feature_sum(
        mechanism: Mechanism,
        intercept: f64,
        slope: f64,
        sum_over: impl IntoIterator<Item = usize>,
        target_features: impl IntoIterator<Item = usize>,
        target_response: bool,
    ) -> Self {
        let mut logit_terms = vec![LogitTerm::new(TermSource::Intercept, intercept)];
        logit_terms.extend(
            sum_over
                .into_iter()
                .map(|j| LogitTerm::new(TermSource::Feature(j), slope)),
        );
        Self {
            mechanism,
            logit_terms,
            target_features: target_features.into_iter().collect(),
            target_response,
        }
    }

    fn reads_target(&self, source: TermSource) -> bool {
        match source {
            TermSource::Feature(j) => self.target_features.contains(&j),
            TermSource::Response => self.target_response,
            TermSource::Intercept | TermSource::Sensitive => false,
        }
    }

    /// Feature columns never removed by this spec.
    pub fn always_observed_features(&self, p: usize) -> Vec<usize> {
        (0..p)
            .filter(|j| !self.target_features.contains(j))
            .collect()
    }

    /// Checks the mechanism tag against the variables the logit reads.
    pub fn validate(&self, p: usize) -> Result<()> {
        if self.target_features.is_empty() && !self.target_response {
            return Err(Error::validation(
                "target_columns",
                "no feature or response is targeted",
            ));
        }
        if let Some(&j) = self.target_features.iter().find(|&&j| j >= p) {
            return Err(Error::validation(
                "target_features",
                format!("column {j} out of range for p = {p}"),
            ));
        }
        for term in &self.logit_terms {
            if let TermSource::Feature(j) = term.source {
                if j >= p {
                    return Err(Error::validation(
                        "logit_terms",
                        format!("feature {j} out of range for p = {p}"),
                    ));
                }
            }
            if !term.coefficient.is_finite() {
                return Err(Error::validation(
                    "logit_terms",
                    "coefficients must be finite",
                ));
            }
        }
        match self.mechanism {
            Mechanism::Mcar => {
                if let Some(t) = self
                    .logit_terms
                    .iter()
                    .find(|t| !matches!(t.source, TermSource::Intercept | TermSource::Sensitive))
                {
                    return Err(Error::validation(
                        "mechanism",
                        format!("MCAR logit may not read {:?}", t.source),
                    ));
                }
            }
            Mechanism::Mar => {
                if let Some(t) = self
                    .logit_terms
                    .iter()
                    .find(|t| self.reads_target(t.source))
                {
                    return Err(Error::validation(
                        "mechanism",
                        format!("MAR logit reads targeted column {:?}", t.source),
                    ));
                }
            }
            Mechanism::Mnar => {
                if !self.logit_terms.iter().any(|t| self.reads_target(t.source)) {
                    return Err(Error::validation(
                        "mechanism",
                        "MNAR logit must read at least one targeted column",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// The true propensity `π(z, A) = P(R = 1 | z, A)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropensityOracle {
    spec: MissingnessSpec,
}

impl PropensityOracle {
    pub fn new(spec: MissingnessSpec) -> Self {
        Self { spec }
    }

    pub fn spec(&self) -> &MissingnessSpec {
        &self.spec
    }

    /// Linear predictor on row `i`, read from the retained (shadow) values.
    pub fn logit(&self, data: &Dataset, i: usize) -> f64 {
        self.logit_parts(data.row(i), data.response(i), data.sensitive(i))
    }

    pub fn logit_parts(&self, x: &[f64], y: f64, a: u8) -> f64 {
        self.spec
            .logit_terms
            .iter()
            .map(|t| {
                t.coefficient
                    * match t.source {
                        TermSource::Intercept => 1.0,
                        TermSource::Feature(j) => x[j],
                        TermSource::Response => y,
                        TermSource::Sensitive => f64::from(a),
                    }
            })
            .sum()
    }

    /// π on row `i`, strictly inside (0, 1).
    pub fn evaluate(&self, data: &Dataset, i: usize) -> f64 {
        open_unit(sigmoid(self.logit(data, i)))
    }

    pub fn evaluate_parts(&self, x: &[f64], y: f64, a: u8) -> f64 {
        open_unit(sigmoid(self.logit_parts(x, y, a)))
    }
}

/// Pull a probability off the endpoints 0 and 1.
fn open_unit(p: f64) -> f64 {
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Apply `spec` to `data`: row `i` stays complete with probability π_i.
/// Only the mask changes; the numeric values are left intact.
pub fn inject(
    data: &Dataset,
    spec: &MissingnessSpec,
    stream: RngStream,
) -> Result<(Dataset, PropensityOracle)> {
    spec.validate(data.p())?;
    let oracle = PropensityOracle::new(spec.clone());
    let mut rng = stream.rng();
    let mut out = data.clone();
    for i in 0..data.n() {
        let pi = oracle.evaluate(data, i);
        if pi.is_nan() {
            return Err(Error::Data {
                row: i,
                reason: "propensity logit reads a missing value".into(),
            });
        }
        if rng.random::<f64>() >= pi {
            for &j in &spec.target_features {
                out.mask_cell(i, j);
            }
            if spec.target_response {
                out.mask_response(i);
            }
        }
    }
    Ok((out, oracle))
}

/// Complete-case sub-sample together with the original row indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CompleteCases {
    pub data: Dataset,
    pub index: Vec<usize>,
    /// Complete-case counts `[n₀, n₁]`.
    pub group_counts: [usize; 2],
}

impl CompleteCases {
    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn groups(&self) -> &[u8] {
        self.data.sensitive_values()
    }
}

/// Rows with R_i = 1. Fails when either sensitive group has none.
pub fn complete_cases(data: &Dataset) -> Result<CompleteCases> {
    let index: Vec<usize> = (0..data.n()).filter(|&i| data.is_complete(i)).collect();
    let sub = data.subset(&index);
    let group_counts = sub.group_counts();
    for (g, &count) in group_counts.iter().enumerate() {
        if count == 0 {
            return Err(Error::EmptyGroup { group: g as u8 });
        }
    }
    Ok(CompleteCases {
        data: sub,
        index,
        group_counts,
    })
}
