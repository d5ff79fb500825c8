//! Augmented Dickey-Fuller unit-root test, constant-only regression.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ols_with_errors;

/// Significance level for the stationarity decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Significance {
    OnePercent,
    FivePercent,
    TenPercent,
}

impl Default for Significance {
    fn default() -> Self {
        Significance::FivePercent
    }
}

/// Critical values of the constant-only Dickey-Fuller distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    pub one_percent: f64,
    pub five_percent: f64,
    pub ten_percent: f64,
}

impl CriticalValues {
    pub fn at(&self, level: Significance) -> f64 {
        match level {
            Significance::OnePercent => self.one_percent,
            Significance::FivePercent => self.five_percent,
            Significance::TenPercent => self.ten_percent,
        }
    }
}

/// MacKinnon finite-sample response-surface approximation for the
/// constant-only case, as a function of the regression sample size.
pub fn critical_values(sample_size: usize) -> CriticalValues {
    let t = sample_size as f64;
    CriticalValues {
        one_percent: -3.43035 - 6.5393 / t - 16.786 / (t * t) - 79.433 / (t * t * t),
        five_percent: -2.86154 - 2.8903 / t - 4.234 / (t * t) - 40.040 / (t * t * t),
        ten_percent: -2.56677 - 1.5384 / t - 2.809 / (t * t),
    }
}

/// Outcome of the ADF test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    /// t-ratio of the lagged-level coefficient.
    pub statistic: f64,
    /// Augmentation lag order chosen by AIC.
    pub lag_order: usize,
    pub critical_values: CriticalValues,
    pub significance: Significance,
    /// True iff `statistic` is below the critical value at `significance`.
    pub is_stationary: bool,
}

/// Standard max-lag heuristic: floor(12 * (n/100)^(1/4)).
pub fn default_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Build the ADF design for lag order `p` over observations starting at
/// difference index `start` (start >= p). Columns: intercept, lagged
/// level, then `p` lagged differences.
fn design_for(y: &[f64], dy: &[f64], p: usize, start: usize) -> (DMatrix<f64>, DVector<f64>) {
    let rows = dy.len() - start;
    let design = DMatrix::from_fn(rows, 2 + p, |row, col| {
        let i = start + row;
        match col {
            0 => 1.0,
            1 => y[i], // level at t-1 relative to dy[i]
            _ => dy[i - (col - 1)],
        }
    });
    let target = DVector::from_iterator(rows, dy[start..].iter().copied());
    (design, target)
}

/// Run the ADF test with the augmentation order chosen in [0, max_lag]
/// by AIC over a common estimation sample, then refit at the chosen
/// order on the full available sample.
pub fn adf_test(series: &[f64], max_lag: usize, significance: Significance) -> Result<AdfResult> {
    let n = series.len();
    let min = max_lag + 10;
    if n < min {
        return Err(Error::TooShort { stage: "adf", len: n, min });
    }
    let first = series[0];
    if series.iter().all(|&v| v == first) {
        return Err(Error::ZeroRange { stage: "adf" });
    }

    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();

    // Lag selection on the common sample so AIC values are comparable.
    let mut best: Option<(f64, usize)> = None;
    for p in 0..=max_lag {
        let (design, target) = design_for(series, &dy, p, max_lag);
        let fit = match ols_with_errors(&design, &target, "adf") {
            Ok(f) => f,
            Err(_) => continue,
        };
        let nobs = fit.observations as f64;
        let k = (2 + p) as f64;
        let aic = nobs * (fit.residual_sum_squares / nobs).max(1e-300).ln() + 2.0 * k;
        if best.map_or(true, |(b, _)| aic < b) {
            best = Some((aic, p));
        }
    }
    let (_, lag_order) = best.ok_or(Error::Conditioning {
        stage: "adf",
        hint: " (no augmentation order could be fitted)".into(),
    })?;

    let (design, target) = design_for(series, &dy, lag_order, lag_order);
    let fit = ols_with_errors(&design, &target, "adf")?;
    let statistic = fit.coefficients[1] / fit.std_errors[1];
    let critical = critical_values(fit.observations);
    let is_stationary = statistic < critical.at(significance);

    Ok(AdfResult {
        statistic,
        lag_order,
        critical_values: critical,
        significance,
        is_stationary,
    })
}
