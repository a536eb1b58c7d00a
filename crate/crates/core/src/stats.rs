//! Small summary statistics used by the harness and the acceptance checks.

use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, StudentsT};

use crate::math::{mean, population_variance};

/// Linear-interpolation percentile (R type 7), `q` in [0, 1].
pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn median(values: &[f64]) -> f64 {
    percentile(values, 0.5)
}

/// Divide-by-n standard deviation.
pub fn population_sd(values: &[f64]) -> f64 {
    population_variance(values).sqrt()
}

/// Average ranks, ties sharing the mean of their positions (1-based).
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub rho: f64,
    /// Two-sided p-value from the t approximation with n − 2 degrees of freedom.
    pub p_value: f64,
}

pub fn spearman(x: &[f64], y: &[f64]) -> Correlation {
    assert_eq!(x.len(), y.len());
    let rho = pearson(&ranks(x), &ranks(y));
    let n = x.len() as f64;
    let p_value = if n < 3.0 || !rho.is_finite() {
        1.0
    } else if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * ((n - 2.0) / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, n - 2.0).expect("n ≥ 3");
        2.0 * (1.0 - dist.cdf(t.abs()))
    };
    Correlation { rho, p_value }
}

/// One-sided sign test of H₁: a tends to be smaller than b. Ties are dropped.
/// Returns `(wins, trials, p)`.
pub fn sign_test_less(a: &[f64], b: &[f64]) -> (u64, u64, f64) {
    let (mut wins, mut trials) = (0u64, 0u64);
    for (x, y) in a.iter().zip(b) {
        if x != y {
            trials += 1;
            if x < y {
                wins += 1;
            }
        }
    }
    if trials == 0 {
        return (0, 0, 1.0);
    }
    (wins, trials, binomial_upper_tail(wins, trials, 0.5))
}

/// P(X ≥ k) for X ~ Binomial(n, p).
pub fn binomial_upper_tail(k: u64, n: u64, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let dist = Binomial::new(p, n).expect("valid binomial");
    dist.sf(k - 1)
}

/// P(X ≤ k) for X ~ Binomial(n, p).
pub fn binomial_lower_tail(k: u64, n: u64, p: f64) -> f64 {
    Binomial::new(p, n).expect("valid binomial").cdf(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_percentiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 0.5), 3.0);
        assert_eq!(percentile(&v, 0.25), 2.0);
        assert!((percentile(&v, 0.05) - 1.2).abs() < 1e-12);
        assert!((percentile(&[4.0, 1.0], 0.95) - 3.85).abs() < 1e-12);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn spearman_monotone() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let c = spearman(&x, &y);
        assert!((c.rho - 1.0).abs() < 1e-12);
        assert_eq!(c.p_value, 0.0);
        let z: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((spearman(&x, &z).rho + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_p_value_reference() {
        // scipy.stats.spearmanr reference
        let c = spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]);
        assert!((c.rho - 0.8).abs() < 1e-12);
        assert!((c.p_value - 0.10408803866182788).abs() < 1e-9);
    }

    #[test]
    fn binomial_tails() {
        assert!((binomial_upper_tail(3, 3, 0.5) - 0.125).abs() < 1e-12);
        assert!((binomial_lower_tail(0, 3, 0.5) - 0.125).abs() < 1e-12);
        assert_eq!(binomial_upper_tail(0, 5, 0.3), 1.0);
        let (w, t, p) = sign_test_less(&[0.0, 0.0, 1.0, 2.0], &[1.0, 1.0, 1.0, 3.0]);
        assert_eq!((w, t), (3, 3));
        assert!((p - 0.125).abs() < 1e-12);
    }
}
