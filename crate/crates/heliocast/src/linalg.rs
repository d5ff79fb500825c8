//! Small dense least-squares helpers shared by the regression-based stages.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Ordinary least squares via SVD. Errors if the design matrix is
/// rank-deficient.
pub fn ols(design: &DMatrix<f64>, target: &DVector<f64>, stage: &'static str) -> Result<DVector<f64>> {
    let cols = design.ncols();
    let svd = design.clone().svd(true, true);
    let eps = 1e-10 * svd.singular_values.max().max(1.0);
    let rank = svd.rank(eps);
    if rank < cols {
        return Err(Error::Conditioning {
            stage,
            hint: format!(" (rank {rank} of {cols} columns)"),
        });
    }
    svd.solve(target, eps).map_err(|_| Error::Conditioning {
        stage,
        hint: String::new(),
    })
}

/// OLS fit with the pieces needed for t-statistics.
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    /// Standard error per coefficient.
    pub std_errors: DVector<f64>,
    pub residual_sum_squares: f64,
    pub observations: usize,
}

pub fn ols_with_errors(design: &DMatrix<f64>, target: &DVector<f64>, stage: &'static str) -> Result<OlsFit> {
    let n = design.nrows();
    let k = design.ncols();
    if n <= k {
        return Err(Error::TooShort { stage, len: n, min: k + 1 });
    }
    let coefficients = ols(design, target, stage)?;
    let residuals = target - design * &coefficients;
    let rss = residuals.dot(&residuals);
    let sigma2 = rss / (n - k) as f64;
    let xtx = design.transpose() * design;
    let inv = xtx.try_inverse().ok_or(Error::Conditioning {
        stage,
        hint: " (normal matrix not invertible)".into(),
    })?;
    let std_errors = DVector::from_iterator(k, (0..k).map(|j| (sigma2 * inv[(j, j)]).sqrt()));
    Ok(OlsFit {
        coefficients,
        std_errors,
        residual_sum_squares: rss,
        observations: n,
    })
}
