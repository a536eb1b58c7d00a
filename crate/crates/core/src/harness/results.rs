use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{median, percentile, population_sd};

pub const RESULTS_SCHEMA_VERSION: u32 = 1;

/// Column order of results.csv.
pub const COLUMNS: [&str; 28] = [
    "experiment",
    "point",
    "coordinate",
    "repeat",
    "method",
    "status",
    "reason",
    "n0",
    "n1",
    "delta_hat",
    "delta_true",
    "mc_standard_error",
    "bias",
    "risk0",
    "risk1",
    "true_risk0",
    "true_risk1",
    "max_weight",
    "second_moment0",
    "second_moment1",
    "upper",
    "upper_partial",
    "lower",
    "regime",
    "s",
    "thm1_moment_ok",
    "thm2_variance_ok",
    "wall_ms",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub point: usize,
    pub coordinate: f64,
    pub repeat: usize,
    pub method: String,
    pub status: String,
    pub reason: String,
    pub n0: Option<usize>,
    pub n1: Option<usize>,
    pub delta_hat: Option<f64>,
    pub delta_true: Option<f64>,
    pub mc_standard_error: Option<f64>,
    pub bias: Option<f64>,
    pub risk0: Option<f64>,
    pub risk1: Option<f64>,
    pub true_risk0: Option<f64>,
    pub true_risk1: Option<f64>,
    pub max_weight: Option<f64>,
    pub second_moment0: Option<f64>,
    pub second_moment1: Option<f64>,
    pub upper: Option<f64>,
    pub upper_partial: Option<bool>,
    pub lower: Option<f64>,
    pub regime: String,
    pub s: Option<f64>,
    pub thm1_moment_ok: Option<bool>,
    pub thm2_variance_ok: Option<bool>,
    pub wall_ms: u64,
}

impl ResultRow {
    pub fn failed(
        experiment: &str,
        point: usize,
        coordinate: f64,
        repeat: usize,
        method: &str,
        reason: String,
    ) -> Self {
        Self {
            experiment: experiment.to_string(),
            point,
            coordinate,
            repeat,
            method: method.to_string(),
            status: "failed".into(),
            reason,
            n0: None,
            n1: None,
            delta_hat: None,
            delta_true: None,
            mc_standard_error: None,
            bias: None,
            risk0: None,
            risk1: None,
            true_risk0: None,
            true_risk1: None,
            max_weight: None,
            second_moment0: None,
            second_moment1: None,
            upper: None,
            upper_partial: None,
            lower: None,
            regime: String::new(),
            s: None,
            thm1_moment_ok: None,
            thm2_variance_ok: None,
            wall_ms: 0,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// (Ê₀ − Ê₁) − (E₀ − E₁).
    pub fn signed_difference(&self) -> Option<f64> {
        Some((self.risk0? - self.risk1?) - (self.true_risk0? - self.true_risk1?))
    }
}

/// Stable order: sweep point, repeat, then method.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.point
            .cmp(&b.point)
            .then(a.repeat.cmp(&b.repeat))
            .then_with(|| method_rank(&a.method).cmp(&method_rank(&b.method)))
    });
}

fn method_rank(id: &str) -> usize {
    super::WeightMethod::ALL
        .iter()
        .position(|m| m.id() == id)
        .unwrap_or(usize::MAX)
}

pub fn write_results<W: Write>(writer: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(COLUMNS)?;
    }
    w.flush().map_err(|e| Error::io("results.csv", e))?;
    Ok(())
}

pub fn read_results<R: Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if !headers.iter().eq(COLUMNS.iter().copied()) {
        return Err(Error::SchemaDrift(format!(
            "expected results schema v{RESULTS_SCHEMA_VERSION} columns [{}], found [{}]",
            COLUMNS.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize().enumerate() {
        rows.push(rec.map_err(|e| Error::SchemaDrift(format!("row {}: {e}", i + 1)))?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub experiment: String,
    pub point: usize,
    pub coordinate: f64,
    pub method: String,
    pub count: usize,
    pub failures: usize,
    pub bias_mean: Option<f64>,
    pub bias_sd: Option<f64>,
    pub bias_median: Option<f64>,
    pub bias_p5: Option<f64>,
    pub bias_p95: Option<f64>,
    pub delta_hat_mean: Option<f64>,
    pub delta_true_mean: Option<f64>,
    pub upper_mean: Option<f64>,
    pub lower_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub results_schema_version: u32,
    pub rows: usize,
    pub failures: usize,
    pub cells: Vec<CellSummary>,
}

impl Summary {
    pub fn cell(&self, point: usize, method: &str) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.point == point && c.method == method)
    }

    /// Cells of one method in sweep order.
    pub fn method_cells(&self, method: &str) -> Vec<&CellSummary> {
        self.cells.iter().filter(|c| c.method == method).collect()
    }
}

fn mean_of(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| crate::math::mean(v))
}

/// Per (sweep point × method) statistics of the bias over successful repeats.
pub fn summarize(rows: &[ResultRow]) -> Summary {
    let mut cells: BTreeMap<(usize, usize, String), Vec<&ResultRow>> = BTreeMap::new();
    for row in rows {
        cells
            .entry((row.point, method_rank(&row.method), row.method.clone()))
            .or_default()
            .push(row);
    }
    let cells = cells
        .into_values()
        .map(|group| {
            let ok: Vec<&ResultRow> = group.iter().copied().filter(|r| r.is_ok()).collect();
            let col = |f: fn(&ResultRow) -> Option<f64>| {
                ok.iter().filter_map(|r| f(r)).collect::<Vec<f64>>()
            };
            let bias = col(|r| r.bias);
            let stat = |f: fn(&[f64]) -> f64| (!bias.is_empty()).then(|| f(&bias));
            CellSummary {
                experiment: group[0].experiment.clone(),
                point: group[0].point,
                coordinate: group[0].coordinate,
                method: group[0].method.clone(),
                count: ok.len(),
                failures: group.len() - ok.len(),
                bias_mean: stat(crate::math::mean),
                bias_sd: stat(population_sd),
                bias_median: stat(median),
                bias_p5: stat(|v| percentile(v, 0.05)),
                bias_p95: stat(|v| percentile(v, 0.95)),
                delta_hat_mean: mean_of(&col(|r| r.delta_hat)),
                delta_true_mean: mean_of(&col(|r| r.delta_true)),
                upper_mean: mean_of(&col(|r| r.upper)),
                lower_mean: mean_of(&col(|r| r.lower)),
            }
        })
        .collect();
    Summary {
        results_schema_version: RESULTS_SCHEMA_VERSION,
        rows: rows.len(),
        failures: rows.iter().filter(|r| !r.is_ok()).count(),
        cells,
    }
}

/// Summary JSON from a results.csv file.
pub fn summarize_file(path: &std::path::Path) -> Result<Summary> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(summarize(&read_results(file)?))
}
