//! Core data model, synthetic population generator and CSV ingestion.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::sigmoid;
use crate::rng::RngStream;

/// A sample of `n` observations with `p` features, a response, and a binary
/// sensitive attribute.
///
/// Feature and response values are never altered when they are marked
/// missing; the mask only records what an analyst would be allowed to see.
/// The retained values act as the shadow copy that lets a true propensity
/// oracle be evaluated on MNAR data. Cells that were genuinely empty at
/// ingest hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    features: Vec<f64>,
    response: Vec<f64>,
    sensitive: Vec<u8>,
    mask: Vec<bool>,
    response_observed: Vec<bool>,
}

impl Dataset {
    /// Fully observed dataset from row-major features.
    pub fn new(features: Vec<Vec<f64>>, response: Vec<f64>, sensitive: Vec<u8>) -> Result<Self> {
        let n = features.len();
        let p = features.first().map_or(0, Vec::len);
        if let Some((i, row)) = features.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::Data {
                row: i,
                reason: format!("row has {} features, expected {p}", row.len()),
            });
        }
        let flat = features.into_iter().flatten().collect();
        Self::from_parts(
            p,
            flat,
            response,
            sensitive,
            vec![true; n * p],
            vec![true; n],
        )
    }

    pub fn from_parts(
        p: usize,
        features: Vec<f64>,
        response: Vec<f64>,
        sensitive: Vec<u8>,
        mask: Vec<bool>,
        response_observed: Vec<bool>,
    ) -> Result<Self> {
        let n = response.len();
        if features.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                got: features.len(),
            });
        }
        if sensitive.len() != n || response_observed.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: sensitive.len().min(response_observed.len()),
            });
        }
        if mask.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                got: mask.len(),
            });
        }
        if let Some(i) = sensitive.iter().position(|&a| a > 1) {
            return Err(Error::Data {
                row: i,
                reason: format!("sensitive value {} is not binary", sensitive[i]),
            });
        }
        Ok(Self {
            n,
            p,
            features,
            response,
            sensitive,
            mask,
            response_observed,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Underlying feature values of row `i`, including masked ones.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.p..(i + 1) * self.p]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.features[i * self.p + j]
    }

    /// The value of cell `(i, j)` if it is observed.
    pub fn observed(&self, i: usize, j: usize) -> Option<f64> {
        self.is_observed(i, j).then(|| self.value(i, j))
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.p + j]
    }

    pub fn response(&self, i: usize) -> f64 {
        self.response[i]
    }

    pub fn responses(&self) -> &[f64] {
        &self.response
    }

    pub fn is_response_observed(&self, i: usize) -> bool {
        self.response_observed[i]
    }

    pub fn sensitive(&self, i: usize) -> u8 {
        self.sensitive[i]
    }

    pub fn sensitive_values(&self) -> &[u8] {
        &self.sensitive
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// R_i: every feature and the response are observed.
    pub fn is_complete(&self, i: usize) -> bool {
        self.response_observed[i] && self.mask[i * self.p..(i + 1) * self.p].iter().all(|&m| m)
    }

    pub fn complete_case_indicator(&self) -> Vec<bool> {
        (0..self.n).map(|i| self.is_complete(i)).collect()
    }

    /// Row counts per sensitive group, `[#A=0, #A=1]`.
    pub fn group_counts(&self) -> [usize; 2] {
        let ones = self.sensitive.iter().filter(|&&a| a == 1).count();
        [self.n - ones, ones]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i, j)).collect()
    }

    pub(crate) fn mask_cell(&mut self, i: usize, j: usize) {
        self.mask[i * self.p + j] = false;
    }

    pub(crate) fn mask_response(&mut self, i: usize) {
        self.response_observed[i] = false;
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.p);
        let mut mask = Vec::with_capacity(indices.len() * self.p);
        for &i in indices {
            features.extend_from_slice(self.row(i));
            mask.extend_from_slice(&self.mask[i * self.p..(i + 1) * self.p]);
        }
        Dataset {
            n: indices.len(),
            p: self.p,
            features,
            response: indices.iter().map(|&i| self.response[i]).collect(),
            sensitive: indices.iter().map(|&i| self.sensitive[i]).collect(),
            mask,
            response_observed: indices.iter().map(|&i| self.response_observed[i]).collect(),
        }
    }

    /// Copy with every feature column centred and scaled to unit variance,
    /// using observed cells only. Constant columns are only centred.
    pub fn standardized(&self) -> Dataset {
        let mut out = self.clone();
        for j in 0..self.p {
            let vals: Vec<f64> = (0..self.n).filter_map(|i| self.observed(i, j)).collect();
            if vals.is_empty() {
                continue;
            }
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
            let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
            for i in 0..self.n {
                let cell = &mut out.features[i * self.p + j];
                *cell = (*cell - mean) / sd;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// y ~ Bernoulli((1 + exp(xᵀβ))⁻¹)
    Classification,
    /// y = (xᵀβ)² + ε
    RegressionQuadratic,
}

fn default_noise_sd() -> f64 {
    1.0
}

/// Gaussian population: `x_ij ~ N(c0 + c1·A_i, sd²)` independently per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_per_group: [usize; 2],
    pub p: usize,
    /// `(c0, c1)`; group A has feature mean `c0 + c1·A`.
    pub feature_mean_coefficients: (f64, f64),
    pub feature_sd: f64,
    pub beta: Vec<f64>,
    pub task: Task,
    #[serde(default = "default_noise_sd")]
    pub noise_sd: f64,
}

impl SyntheticSpec {
    /// The 10-feature population used throughout the synthetic experiments:
    /// `x ~ N(1 - 2A, 0.5²)`, `β = (0.1 ×5, 1 ×5)`.
    pub fn standard(task: Task, n_per_group: [usize; 2]) -> Self {
        let mut beta = vec![0.1; 5];
        beta.extend([1.0; 5]);
        Self {
            n_per_group,
            p: 10,
            feature_mean_coefficients: (1.0, -2.0),
            feature_sd: 0.5,
            beta,
            task,
            noise_sd: 1.0,
        }
    }

    pub fn with_sizes(&self, n_per_group: [usize; 2]) -> Self {
        Self {
            n_per_group,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.feature_sd > 0.0 && self.feature_sd.is_finite()) {
            return Err(Error::validation(
                "feature_sd",
                "must be a positive finite number",
            ));
        }
        if self.n_per_group.contains(&0) {
            return Err(Error::validation(
                "n_per_group",
                "both groups need at least one row",
            ));
        }
        if self.p == 0 {
            return Err(Error::validation("p", "must be at least 1"));
        }
        if self.beta.len() != self.p {
            return Err(Error::validation(
                "beta",
                format!("length {} does not match p = {}", self.beta.len(), self.p),
            ));
        }
        if self.task == Task::RegressionQuadratic
            && !(self.noise_sd > 0.0 && self.noise_sd.is_finite())
        {
            return Err(Error::validation(
                "noise_sd",
                "must be a positive finite number",
            ));
        }
        let (c0, c1) = self.feature_mean_coefficients;
        if !c0.is_finite() || !c1.is_finite() {
            return Err(Error::validation(
                "feature_mean_coefficients",
                "must be finite",
            ));
        }
        Ok(())
    }

    pub fn feature_mean(&self, group: u8) -> f64 {
        self.feature_mean_coefficients.0 + self.feature_mean_coefficients.1 * f64::from(group)
    }

    /// Linear predictor `xᵀβ`.
    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.beta).map(|(a, b)| a * b).sum()
    }
}

/// Draw a fully observed sample from `spec`. Rows of group 0 come first.
pub fn generate_synthetic(spec: &SyntheticSpec, stream: RngStream) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = stream.rng();
    let n = spec.n_per_group[0] + spec.n_per_group[1];
    let noise = Normal::new(0.0, spec.noise_sd.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::validation("noise_sd", e.to_string()))?;
    let mut features = Vec::with_capacity(n * spec.p);
    let mut response = Vec::with_capacity(n);
    let mut sensitive = Vec::with_capacity(n);
    for group in 0..2u8 {
        let dist = Normal::new(spec.feature_mean(group), spec.feature_sd)
            .map_err(|e| Error::validation("feature_sd", e.to_string()))?;
        for _ in 0..spec.n_per_group[group as usize] {
            let start = features.len();
            features.extend((0..spec.p).map(|_| dist.sample(&mut rng)));
            let t = spec.linear_predictor(&features[start..]);
            let y = match spec.task {
                Task::Classification => {
                    let prob = sigmoid(-t);
                    f64::from(u8::from(rng.random::<f64>() < prob))
                }
                Task::RegressionQuadratic => t * t + noise.sample(&mut rng),
            };
            response.push(y);
            sensitive.push(group);
        }
    }
    Dataset::from_parts(
        spec.p,
        features,
        response,
        sensitive,
        vec![true; n * spec.p],
        vec![true; n],
    )
}

/// Column mapping for [`load_csv`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub sensitive_col: String,
    pub response_col: String,
    pub feature_cols: Vec<String>,
}

/// Read a headed CSV. Empty cells become missing entries in the mask; the
/// sensitive column must be present and coded 0/1 on every row.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

pub fn read_csv<R: std::io::Read>(reader: R, schema: &CsvSchema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let lookup: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let col = |name: &str| {
        lookup
            .get(name)
            .copied()
            .ok_or_else(|| Error::Schema(format!("column `{name}` not found in header")))
    };
    let sensitive_idx = col(&schema.sensitive_col)?;
    let response_idx = col(&schema.response_col)?;
    let feature_idx = schema
        .feature_cols
        .iter()
        .map(|c| col(c))
        .collect::<Result<Vec<_>>>()?;
    if feature_idx.is_empty() {
        return Err(Error::Schema("no feature columns mapped".into()));
    }

    let p = feature_idx.len();
    let mut features = Vec::new();
    let mut mask = Vec::new();
    let mut response = Vec::new();
    let mut response_observed = Vec::new();
    let mut sensitive = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let field = |idx: usize| record.get(idx).unwrap_or("");
        let a = field(sensitive_idx);
        sensitive.push(match a.parse::<f64>() {
            Ok(0.0) => 0,
            Ok(1.0) => 1,
            _ => {
                return Err(Error::Data {
                    row,
                    reason: format!("sensitive value `{a}` is not 0 or 1"),
                })
            }
        });
        let (y, y_obs) = parse_cell(field(response_idx), row, &schema.response_col)?;
        response.push(y);
        response_observed.push(y_obs);
        for (&idx, name) in feature_idx.iter().zip(&schema.feature_cols) {
            let (x, obs) = parse_cell(field(idx), row, name)?;
            features.push(x);
            mask.push(obs);
        }
    }
    Dataset::from_parts(p, features, response, sensitive, mask, response_observed)
}

fn parse_cell(raw: &str, row: usize, column: &str) -> Result<(f64, bool)> {
    if raw.is_empty() {
        return Ok((f64::NAN, false));
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok((v, true)),
        _ => Err(Error::Data {
            row,
            reason: format!("column `{column}`: `{raw}` is not a finite number"),
        }),
    }
}

/// Random row partition; the first part has `round(fraction·n)` rows.
pub fn split(data: &Dataset, fraction: f64, stream: RngStream) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::validation(
            "fraction",
            "must lie strictly between 0 and 1",
        ));
    }
    let n = data.n();
    let k = (fraction * n as f64).round() as usize;
    if n < 2 || k == 0 || k == n {
        return Err(Error::Precondition(format!(
            "cannot split {n} rows with fraction {fraction} into two non-empty parts"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream.rng());
    let (first, second) = idx.split_at(k);
    Ok((data.subset(first), data.subset(second)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_fixture() -> &'static str {
        "A,y,x1,x2\n0,1.5,0.1,0.2\n1,0,3,4\n0,2,,5\n"
    }

    fn schema() -> CsvSchema {
        CsvSchema {
            sensitive_col: "A".into(),
            response_col: "y".into(),
            feature_cols: vec!["x1".into(), "x2".into()],
        }
    }

    #[test]
    fn csv_parses_shape_and_missing_cells() {
        let d = read_csv(csv_fixture().as_bytes(), &schema()).unwrap();
        assert_eq!((d.n(), d.p()), (3, 2));
        assert_eq!(d.sensitive_values(), &[0, 1, 0]);
        assert_eq!(d.observed(1, 1), Some(4.0));
        assert_eq!(d.observed(2, 0), None);
        assert_eq!(d.complete_case_indicator(), vec![true, true, false]);
    }

    #[test]
    fn csv_rejects_non_binary_sensitive() {
        let err = read_csv(
            "A,y,x1\n0,1,1\n2,1,1\n".as_bytes(),
            &CsvSchema {
                sensitive_col: "A".into(),
                response_col: "y".into(),
                feature_cols: vec!["x1".into()],
            },
        )
        .unwrap_err();
        match err {
            Error::Data { row, reason } => {
                assert_eq!(row, 1);
                assert!(reason.contains('2'));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_missing_column_is_schema_error() {
        let mut s = schema();
        s.feature_cols.push("x9".into());
        assert!(matches!(
            read_csv(csv_fixture().as_bytes(), &s),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn csv_feature_subset() {
        let mut text = String::from("id,A,y,x1,x2,x3\n");
        for i in 0..10 {
            text.push_str(&format!("{i},{},{}.5,{i},{},{}\n", i % 2, i, i * 2, i * 3));
        }
        let s = CsvSchema {
            sensitive_col: "A".into(),
            response_col: "y".into(),
            feature_cols: vec!["x3".into(), "x1".into()],
        };
        let d = read_csv(text.as_bytes(), &s).unwrap();
        assert_eq!((d.n(), d.p()), (10, 2));
        assert_eq!(d.row(4), &[12.0, 4.0]);
    }

    #[test]
    fn unparseable_numeric_cites_row() {
        let err = read_csv("A,y,x1,x2\n0,1,1,1\n1,1,abc,2\n".as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, Error::Data { row: 1, .. }));
    }

    #[test]
    fn synthetic_is_deterministic_and_fully_observed() {
        let spec = SyntheticSpec::standard(Task::Classification, [40, 60]);
        let a = generate_synthetic(&spec, RngStream::new(11, 0)).unwrap();
        let b = generate_synthetic(&spec, RngStream::new(11, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.group_counts(), [40, 60]);
        assert!(a.complete_case_indicator().iter().all(|&r| r));
        assert!(a.responses().iter().all(|&y| y == 0.0 || y == 1.0));
    }

    #[test]
    fn synthetic_validation_names_field() {
        let mut spec = SyntheticSpec::standard(Task::Classification, [10, 10]);
        spec.feature_sd = 0.0;
        match generate_synthetic(&spec, RngStream::new(0, 0)) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "feature_sd"),
            other => panic!("unexpected {other:?}"),
        }
        spec.feature_sd = 0.5;
        spec.n_per_group = [0, 3];
        assert!(
            matches!(spec.validate(), Err(Error::Validation { field, .. }) if field == "n_per_group")
        );
    }

    #[test]
    fn split_sizes() {
        let spec = SyntheticSpec::standard(Task::Classification, [5, 5]);
        let d = generate_synthetic(&spec, RngStream::new(1, 1)).unwrap();
        let (a, b) = split(&d, 0.5, RngStream::new(3, 0)).unwrap();
        assert_eq!((a.n(), b.n()), (5, 5));
        let (a2, _) = split(&d, 0.5, RngStream::new(3, 0)).unwrap();
        assert_eq!(a, a2);

        let big = generate_synthetic(&spec.with_sizes([300, 349]), RngStream::new(1, 2)).unwrap();
        let (train, test) = split(&big, 500.0 / 649.0, RngStream::new(9, 9)).unwrap();
        assert_eq!((train.n(), test.n()), (500, 149));
    }

    #[test]
    fn split_rejects_degenerate_input() {
        let d = Dataset::new(vec![vec![1.0]], vec![0.0], vec![0]).unwrap();
        assert!(split(&d, 0.5, RngStream::new(0, 0)).is_err());
        assert!(split(&d, 1.0, RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn standardized_columns_have_unit_scale() {
        let d = Dataset::new(
            vec![vec![1.0, 5.0], vec![3.0, 5.0]],
            vec![0.0, 1.0],
            vec![0, 1],
        )
        .unwrap();
        let s = d.standardized();
        assert_eq!(s.row(0), &[-1.0, 0.0]);
        assert_eq!(s.row(1), &[1.0, 0.0]);
    }
}
