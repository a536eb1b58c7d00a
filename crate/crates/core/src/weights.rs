//! Complete-case weights with per-group empirical mean exactly 1.
//!
//! Inverse-propensity weights are Hájek-normalised inside each sensitive
//! group: `ω_i = n_a · (1/π_i) / Σ_{j ∈ a} 1/π_j`. The population factor
//! E_S{1/π | A = a} is thereby replaced by its in-sample mean, which also makes
//! the normalisation E_{S_a} ω = 1 hold exactly on the sample.

use crate::error::{Error, Result};
use crate::missingness::{CompleteCases, PropensityOracle};
use crate::propensity::PropensityFit;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    values: Vec<f64>,
    groups: Vec<u8>,
    group_counts: [usize; 2],
    max: f64,
    second_moment: [f64; 2],
}

impl WeightVector {
    /// Hájek weights from per-case propensities.
    pub fn from_propensities(groups: &[u8], propensities: &[f64]) -> Result<Self> {
        if groups.len() != propensities.len() {
            return Err(Error::DimensionMismatch {
                expected: groups.len(),
                got: propensities.len(),
            });
        }
        if let Some((index, &value)) = propensities
            .iter()
            .enumerate()
            .find(|(_, &p)| !(p > 0.0 && p <= 1.0))
        {
            return Err(Error::UnboundedWeight { index, value });
        }
        let mut inv_sum = [0.0; 2];
        let mut counts = [0usize; 2];
        for (&g, &p) in groups.iter().zip(propensities) {
            inv_sum[g as usize] += 1.0 / p;
            counts[g as usize] += 1;
        }
        let values = groups
            .iter()
            .zip(propensities)
            .map(|(&g, &p)| counts[g as usize] as f64 * (1.0 / p) / inv_sum[g as usize])
            .collect();
        Self::from_values(groups, values)
    }

    /// Wrap precomputed weights. Both groups must be present.
    pub fn from_values(groups: &[u8], values: Vec<f64>) -> Result<Self> {
        if groups.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: groups.len(),
                got: values.len(),
            });
        }
        let mut counts = [0usize; 2];
        let mut sq = [0.0; 2];
        for (&g, &w) in groups.iter().zip(&values) {
            counts[g as usize] += 1;
            sq[g as usize] += w * w;
        }
        for (g, &c) in counts.iter().enumerate() {
            if c == 0 {
                return Err(Error::EmptyGroup { group: g as u8 });
            }
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, &w)| !(w > 0.0 && w.is_finite()))
        {
            return Err(Error::UnboundedWeight { index, value });
        }
        let max = values.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            groups: groups.to_vec(),
            group_counts: counts,
            max,
            second_moment: [sq[0] / counts[0] as f64, sq[1] / counts[1] as f64],
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn groups(&self) -> &[u8] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn group_counts(&self) -> [usize; 2] {
        self.group_counts
    }

    /// B, the largest realised weight.
    pub fn max(&self) -> f64 {
        self.max
    }

    /// `[D₀, D₁]`, per-group mean of ω².
    pub fn second_moment(&self) -> [f64; 2] {
        self.second_moment
    }

    pub fn group_mean(&self, group: u8) -> f64 {
        let (s, c) = self
            .groups
            .iter()
            .zip(&self.values)
            .filter(|(&g, _)| g == group)
            .fold((0.0, 0usize), |(s, c), (_, w)| (s + w, c + 1));
        s / c as f64
    }
}

/// ω₀ from the true propensity on each complete case.
pub fn true_weights(cc: &CompleteCases, oracle: &PropensityOracle) -> Result<WeightVector> {
    let pis: Vec<f64> = (0..cc.n()).map(|i| oracle.evaluate(&cc.data, i)).collect();
    WeightVector::from_propensities(cc.groups(), &pis)
}

/// ŵ₀: the same construction with a fitted π̂.
pub fn estimated_weights(cc: &CompleteCases, fit: &PropensityFit) -> Result<WeightVector> {
    let pis = (0..cc.n())
        .map(|i| fit.predict(&cc.data, i))
        .collect::<Result<Vec<_>>>()?;
    WeightVector::from_propensities(cc.groups(), &pis)
}

/// ω ≡ 1.
pub fn unit_weights(cc: &CompleteCases) -> Result<WeightVector> {
    WeightVector::from_values(cc.groups(), vec![1.0; cc.n()])
}
