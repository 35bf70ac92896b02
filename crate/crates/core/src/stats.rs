//! Sample statistics for disorder averages.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::math::{pairwise_sum, pairwise_sum_by, sqrt};

/// Mean and standard error of a disorder-averaged quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl ObservableEstimate {
    /// Sample mean and `sqrt(s²/n)`; a single sample reports zero error.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        assert!(n > 0, "no samples");
        let mean = pairwise_sum(xs) / n as f64;
        let stderr = if n > 1 {
            let var = pairwise_sum_by(n, |i| (xs[i] - mean) * (xs[i] - mean)) / (n - 1) as f64;
            sqrt(var / n as f64)
        } else {
            0.0
        };
        Self { mean, stderr, n }
    }
}

/// Sample covariance `Σ (x-x̄)(y-ȳ) / (n-1)`.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    assert_eq!(n, ys.len());
    if n < 2 {
        return 0.0;
    }
    let mx = pairwise_sum(xs) / n as f64;
    let my = pairwise_sum(ys) / n as f64;
    pairwise_sum_by(n, |i| (xs[i] - mx) * (ys[i] - my)) / (n - 1) as f64
}

/// Standard error of `sqrt(mean(a) - mean(b)^2)` by the delta method, with
/// `a` and `b` paired per sample. Returns `(value, stderr)`; the value is
/// clamped at zero when rounding makes the radicand slightly negative.
pub fn std_dev_estimate(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len();
    let ea = ObservableEstimate::from_samples(a);
    let eb = ObservableEstimate::from_samples(b);
    let radicand = ea.mean - eb.mean * eb.mean;
    let value = sqrt(radicand.max(0.0));
    if n < 2 {
        return (value, 0.0);
    }
    let va = covariance(a, a);
    let vb = covariance(b, b);
    let cab = covariance(a, b);
    let var_rad = (va + 4.0 * eb.mean * eb.mean * vb - 4.0 * eb.mean * cab).max(0.0) / n as f64;
    let stderr = if value > 0.0 {
        sqrt(var_rad) / (2.0 * value)
    } else {
        sqrt(sqrt(var_rad))
    };
    (value, stderr)
}

/// Mean over rows of a per-sample table, column by column.
pub fn column_means(rows: &[Vec<f64>]) -> Vec<f64> {
    if rows.is_empty() {
        return Vec::new();
    }
    let m = rows[0].len();
    (0..m)
        .map(|j| pairwise_sum_by(rows.len(), |i| rows[i][j]) / rows.len() as f64)
        .collect()
}
