//! Upper and lower bounds on the fairness estimation error |Δ_T − Δ̂_S|.
//!
//! All logarithms are natural. The VC (classification) or pseudo
//! (regression) dimension `d` is supplied by the caller.

use serde::{Deserialize, Serialize};

use crate::dataset::SyntheticSpec;
use crate::error::{Error, Result};
use crate::math::{mean, population_variance};
use crate::missingness::PropensityOracle;
use crate::propensity::PropensityFit;
use crate::rng::RngStream;

/// Probability with which the lower-bound statements hold.
pub const LOWER_BOUND_PROBABILITY: f64 = 7.0 / 1440.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelClass {
    /// g ∈ {0, 1}; `d` is the VC dimension.
    Classification,
    /// g real-valued; `d` is the pseudo dimension.
    Regression,
}

fn default_range() -> (f64, f64) {
    (0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Complete-case counts `[n₀, n₁]`.
    pub n: [usize; 2],
    /// Second moments of the weights `[D₀, D₁]`.
    #[serde(rename = "D")]
    pub second_moment: [f64; 2],
    /// Largest weight B.
    #[serde(rename = "B")]
    pub max_weight: f64,
    pub d: usize,
    pub delta: f64,
    pub task: ModelClass,
    /// Response range `[b₁, b₂]`.
    #[serde(default = "default_range")]
    pub range: (f64, f64),
    /// Total variation terms per group; `None` when unknown.
    #[serde(default)]
    pub tv: [Option<f64>; 2],
    /// Variances σ_a² of ω·loss per group.
    #[serde(default)]
    pub sigma2: [f64; 2],
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if self.n.contains(&0) {
            return Err(Error::validation(
                "n",
                "each group needs at least one complete case",
            ));
        }
        if !(self.max_weight.is_finite() && self.max_weight >= 1.0 - 1e-9) {
            return Err(Error::validation("B", "must be finite and at least 1"));
        }
        let b2 = self.max_weight * self.max_weight;
        for &d in &self.second_moment {
            if !(d >= 1.0 - 1e-9 && d <= b2 * (1.0 + 1e-9)) {
                return Err(Error::validation("D", format!("{d} is outside [1, B²]")));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::validation(
                "delta",
                "must lie strictly between 0 and 1",
            ));
        }
        if !(self.range.1 > self.range.0) {
            return Err(Error::validation("range", "need b₂ > b₁"));
        }
        if self.d == 0 {
            return Err(Error::validation("d", "must be at least 1"));
        }
        if self.tv.iter().flatten().any(|&t| !(0.0..=1.0).contains(&t)) {
            return Err(Error::validation("tv", "total variation lies in [0, 1]"));
        }
        if self.sigma2.iter().any(|&s| !(s >= 0.0 && s.is_finite())) {
            return Err(Error::validation(
                "sigma2",
                "must be finite and nonnegative",
            ));
        }
        Ok(())
    }

    fn width(&self) -> f64 {
        self.range.1 - self.range.0
    }
}

/// Complexity term C_d(n_a, D_a, δ).
pub fn c_d(task: ModelClass, n_a: usize, second_moment: f64, d: usize, delta: f64) -> Result<f64> {
    let n = n_a as f64;
    let df = d as f64;
    match task {
        ModelClass::Classification => Ok((df + 1.0).ln()
            + (df + 1.0) * (8.0 * std::f64::consts::E).ln()
            - delta.ln()
            + 0.5 * df * (n / (2.0 * second_moment)).ln()),
        ModelClass::Regression => {
            if n_a < d {
                return Err(Error::Precondition(format!(
                    "regression complexity term needs n_a ≥ d, got n_a = {n_a}, d = {d}"
                )));
            }
            Ok((4.0 / delta).ln()
                + df * (8.0 * std::f64::consts::E / df).ln()
                + 1.5 * df * (n.ln() - (2.0 * second_moment).ln() / 3.0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupTerm {
    pub tv: Option<f64>,
    pub c_d: f64,
    pub concentration: f64,
    /// D_a·(b₂ − b₁) ≤ n_a / 8.
    pub moment_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    /// `None` when a hypothesis fails; see `not_applicable`.
    pub value: Option<f64>,
    /// True when a tv term is unknown and only the concentration part is reported.
    pub partial: bool,
    pub groups: [GroupTerm; 2],
    pub scale: f64,
    pub not_applicable: Option<String>,
}

/// Upper bound on |Δ_T − Δ̂_S| holding with probability at least 1 − δ:
/// `(b₂ − b₁) Σ_a [ tv_a + sqrt(B·C_d / (n_a·[(1 + D_a/B)·ln(1 + B/D_a) − 1])) ]`.
pub fn upper_bound(inputs: &BoundInputs) -> Result<UpperBound> {
    inputs.validate()?;
    let b = inputs.max_weight;
    let width = inputs.width();
    let mut reason = None;
    let mut groups = [GroupTerm {
        tv: None,
        c_d: f64::NAN,
        concentration: f64::NAN,
        moment_ok: false,
    }; 2];
    for a in 0..2 {
        let n = inputs.n[a];
        let dm = inputs.second_moment[a];
        let moment_ok = dm * width <= n as f64 / 8.0;
        let cd = match c_d(inputs.task, n, dm, inputs.d, inputs.delta) {
            Ok(v) => v,
            Err(e) => {
                reason.get_or_insert(e.to_string());
                f64::NAN
            }
        };
        let denom = n as f64 * ((1.0 + dm / b) * (1.0 + b / dm).ln() - 1.0);
        let concentration = (b * cd / denom).sqrt();
        if !moment_ok {
            reason.get_or_insert(format!(
                "moment condition fails for group {a}: D·(b₂−b₁) = {} > n/8 = {}",
                dm * width,
                n as f64 / 8.0
            ));
        } else if cd.is_finite() && cd <= 0.0 {
            reason.get_or_insert(format!("complexity term is nonpositive for group {a}"));
        }
        groups[a] = GroupTerm {
            tv: inputs.tv[a],
            c_d: cd,
            concentration,
            moment_ok,
        };
    }
    let partial = inputs.tv.iter().any(Option::is_none);
    let value = if reason.is_none() {
        Some(
            width
                * groups
                    .iter()
                    .map(|g| g.tv.unwrap_or(0.0) + g.concentration)
                    .sum::<f64>(),
        )
    } else {
        None
    };
    Ok(UpperBound {
        value,
        partial,
        groups,
        scale: width,
        not_applicable: reason,
    })
}

/// `[max(0, Δ̂ − U), Δ̂ + U]`, the interval that covers Δ_T with probability ≥ 1 − δ.
pub fn coverage_interval(delta_hat: f64, upper: f64) -> (f64, f64) {
    ((delta_hat - upper).max(0.0), delta_hat + upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerRegime {
    /// Δ̂ ≥ (13/2)·s, bound s/24.
    LargeDeltaHat,
    /// Δ̂ ≤ s/72, bound s/72.
    SmallDeltaHat,
    /// Neither condition holds.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub value: Option<f64>,
    pub regime: LowerRegime,
    /// s = sqrt(σ₀²/n₀ + σ₁²/n₁).
    pub s: f64,
    /// `[s/24, 12·s]` for the signed difference of group-risk gaps.
    pub bracket: (f64, f64),
    /// B²/σ_a² ≤ min(n₀, n₁) for both groups.
    pub variance_ok: bool,
    /// σ_a² are sample plug-ins rather than population values.
    pub plug_in_sigma: bool,
}

/// Lower bound on |Δ_T − Δ̂_S| under true weights, holding with probability
/// at least 7/1440. The caller attests that the weights are the true ones.
pub fn lower_bound(inputs: &BoundInputs, delta_hat: f64) -> Result<LowerBound> {
    inputs.validate()?;
    let [n0, n1] = inputs.n;
    let s = (inputs.sigma2[0] / n0 as f64 + inputs.sigma2[1] / n1 as f64).sqrt();
    let n_min = n0.min(n1) as f64;
    let b2 = inputs.max_weight * inputs.max_weight;
    let variance_ok = inputs.sigma2.iter().all(|&v| v > 0.0 && b2 / v <= n_min);
    let (regime, candidate) = if delta_hat >= 6.5 * s {
        (LowerRegime::LargeDeltaHat, Some(s / 24.0))
    } else if delta_hat <= s / 72.0 {
        (LowerRegime::SmallDeltaHat, Some(s / 72.0))
    } else {
        (LowerRegime::Inconclusive, None)
    };
    Ok(LowerBound {
        value: candidate.filter(|_| variance_ok),
        regime,
        s,
        bracket: (s / 24.0, 12.0 * s),
        variance_ok,
        plug_in_sigma: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionFlags {
    pub thm1_moment_ok: bool,
    pub thm2_variance_ok: Option<bool>,
    pub thm2_regime: Option<LowerRegime>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundProbabilities {
    pub upper: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub upper: UpperBound,
    pub lower: Option<LowerBound>,
    pub flags: AssumptionFlags,
    pub probabilities: BoundProbabilities,
}

/// Both bounds for one evaluation; the lower bound needs Δ̂.
pub fn evaluate(inputs: &BoundInputs, delta_hat: Option<f64>) -> Result<BoundReport> {
    let upper = upper_bound(inputs)?;
    let lower = delta_hat.map(|dh| lower_bound(inputs, dh)).transpose()?;
    Ok(BoundReport {
        flags: AssumptionFlags {
            thm1_moment_ok: upper.groups.iter().all(|g| g.moment_ok),
            thm2_variance_ok: lower.map(|l| l.variance_ok),
            thm2_regime: lower.map(|l| l.regime),
        },
        upper,
        lower,
        probabilities: BoundProbabilities {
            upper: 1.0 - inputs.delta,
            lower: LOWER_BOUND_PROBABILITY,
        },
    })
}

/// How weights are formed when estimating the total-variation term.
#[derive(Debug, Clone, Copy)]
pub enum WeightFunction<'a> {
    Unit,
    /// ω ∝ 1/π̂ with the given propensity model.
    InversePropensity(&'a PropensityFit),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    pub estimate: f64,
    pub standard_error: f64,
}

/// Monte Carlo estimate of d_TV(D_{T_a} ‖ ω D_{S_a}) for each group.
///
/// On fresh complete-data draws of group `a`, the density ratio of ωD_{S_a}
/// to D_{T_a} is `q(z)·π(z) / E_T[q·π]`, where `q` is the unnormalised weight;
/// the distance is half the mean absolute deviation of that ratio from 1.
pub fn estimate_tv(
    oracle: &PropensityOracle,
    weights: WeightFunction<'_>,
    spec: &SyntheticSpec,
    samples: usize,
    stream: RngStream,
) -> Result<[TvEstimate; 2]> {
    if samples < 2 {
        return Err(Error::Precondition(
            "need at least two Monte Carlo draws per group".into(),
        ));
    }
    let fresh = crate::dataset::generate_synthetic(&spec.with_sizes([samples, samples]), stream)?;
    let mut prod: [Vec<f64>; 2] = [Vec::with_capacity(samples), Vec::with_capacity(samples)];
    for i in 0..fresh.n() {
        let pi = oracle.evaluate(&fresh, i);
        let q = match weights {
            WeightFunction::Unit => 1.0,
            WeightFunction::InversePropensity(fit) => 1.0 / fit.predict(&fresh, i)?,
        };
        prod[fresh.sensitive(i) as usize].push(q * pi);
    }
    let one = |v: &[f64]| {
        let norm = mean(v);
        let dev: Vec<f64> = v.iter().map(|x| 0.5 * (1.0 - x / norm).abs()).collect();
        TvEstimate {
            estimate: mean(&dev),
            standard_error: (population_variance(&dev) / dev.len() as f64).sqrt(),
        }
    };
    Ok([one(&prod[0]), one(&prod[1])])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(n: usize, d_moment: f64, b: f64) -> BoundInputs {
        BoundInputs {
            n: [n, n],
            second_moment: [d_moment, d_moment],
            max_weight: b,
            d: 11,
            delta: 0.05,
            task: ModelClass::Classification,
            range: (0.0, 1.0),
            tv: [Some(0.0), Some(0.0)],
            sigma2: [0.25, 0.25],
        }
    }

    #[test]
    fn c_d_reference_values() {
        let v = c_d(ModelClass::Classification, 50_000, 1.0, 11, 0.05).unwrap();
        assert!((v - 98.13).abs() < 0.01, "{v}");
        let v = c_d(ModelClass::Classification, 2, 1.0, 1, 1.0).unwrap();
        assert!((v - (2.0 * (8.0 * std::f64::consts::E).powi(2)).ln()).abs() < 1e-12);
        assert!((v - 6.852).abs() < 1e-3);
    }

    #[test]
    fn c_d_decreases_in_second_moment() {
        let a = c_d(ModelClass::Classification, 1000, 1.0, 5, 0.1).unwrap();
        let b = c_d(ModelClass::Classification, 1000, 2.0, 5, 0.1).unwrap();
        assert!(b < a);
        let a = c_d(ModelClass::Regression, 1000, 1.0, 5, 0.1).unwrap();
        let b = c_d(ModelClass::Regression, 1000, 2.0, 5, 0.1).unwrap();
        assert!(b < a);
    }

    #[test]
    fn regression_c_d_needs_enough_cases() {
        assert!(matches!(
            c_d(ModelClass::Regression, 4, 1.0, 5, 0.1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn upper_bound_reference_configuration() {
        let ub = upper_bound(&inputs(50_000, 1.0, 1.0)).unwrap();
        assert!((ub.groups[0].concentration - 0.0713).abs() < 1e-4);
        assert!((ub.value.unwrap() - 0.1425).abs() < 2e-4);
        assert!(!ub.partial);
    }

    #[test]
    fn upper_bound_vanishes_with_n() {
        let big = upper_bound(&inputs(1 << 40, 1.0, 1.0))
            .unwrap()
            .value
            .unwrap();
        assert!(big < 1e-4);
    }

    #[test]
    fn halving_delta_raises_bound() {
        let mut i = inputs(10_000, 1.2, 2.0);
        let a = upper_bound(&i).unwrap().value.unwrap();
        i.delta /= 2.0;
        assert!(upper_bound(&i).unwrap().value.unwrap() > a);
    }

    #[test]
    fn moment_violation_is_not_applicable() {
        let ub = upper_bound(&inputs(7, 1.0, 1.0)).unwrap();
        assert!(ub.value.is_none());
        assert!(!ub.groups[0].moment_ok);
        assert!(ub.not_applicable.is_some());
    }

    #[test]
    fn range_scales_bound_and_tightens_condition() {
        let mut i = inputs(10_000, 1.0, 1.0);
        i.task = ModelClass::Regression;
        let unit = upper_bound(&i).unwrap().value.unwrap();
        i.range = (-1.0, 2.0);
        let wide = upper_bound(&i).unwrap().value.unwrap();
        assert!((wide - 3.0 * unit).abs() < 1e-12);
        i.range = (0.0, 2000.0);
        assert!(upper_bound(&i).unwrap().value.is_none());
    }

    #[test]
    fn unknown_tv_gives_partial_bound() {
        let mut i = inputs(10_000, 1.0, 1.0);
        i.tv = [None, Some(0.1)];
        let ub = upper_bound(&i).unwrap();
        assert!(ub.partial);
        let full = upper_bound(&inputs(10_000, 1.0, 1.0))
            .unwrap()
            .value
            .unwrap();
        assert!((ub.value.unwrap() - full - 0.1).abs() < 1e-12);
    }

    #[test]
    fn lower_bound_large_regime() {
        let lb = lower_bound(&inputs(100, 1.0, 1.0), 0.5).unwrap();
        assert!((lb.s - 0.005f64.sqrt()).abs() < 1e-15);
        assert!((lb.value.unwrap() - 0.005f64.sqrt() / 24.0).abs() < 1e-15);
        assert!((lb.value.unwrap() - 0.002946).abs() < 1e-6);
        assert_eq!(lb.regime, LowerRegime::LargeDeltaHat);
        assert!(lb.variance_ok);
    }

    #[test]
    fn lower_bound_regime_gap_and_small_regime() {
        let i = inputs(100, 1.0, 1.0);
        let s = 0.005f64.sqrt();
        let mid = lower_bound(&i, s).unwrap();
        assert_eq!(mid.regime, LowerRegime::Inconclusive);
        assert!(mid.value.is_none());
        let small = lower_bound(&i, s / 100.0).unwrap();
        assert_eq!(small.regime, LowerRegime::SmallDeltaHat);
        assert!((small.value.unwrap() - s / 72.0).abs() < 1e-15);
    }

    #[test]
    fn lower_bound_scaling_and_variance_flag() {
        let a = lower_bound(&inputs(100, 1.0, 1.0), 0.0).unwrap().s;
        let b = lower_bound(&inputs(400, 1.0, 1.0), 0.0).unwrap().s;
        assert!((a / b - 2.0).abs() < 1e-12);
        let mut i = inputs(3, 1.0, 1.0);
        i.sigma2 = [0.25, 0.25];
        let lb = lower_bound(&i, 10.0).unwrap();
        assert!(!lb.variance_ok);
        assert!(lb.value.is_none());
    }

    #[test]
    fn report_serialises_as_json_object() {
        let r = evaluate(&inputs(50_000, 1.0, 1.0), Some(0.1)).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["upper"]["value"].as_f64().unwrap() > 0.14);
        assert!((v["probabilities"]["lower"].as_f64().unwrap() - 7.0 / 1440.0).abs() < 1e-15);
        assert_eq!(v["flags"]["thm1_moment_ok"], true);
    }
}
