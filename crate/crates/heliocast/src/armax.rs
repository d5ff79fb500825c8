//! Stage 2: ARMAX estimation, order selection, and multi-step forecasting.
//!
//! The model is A(q)y(k) = B(q)u(k) + C(q)v(k) with monic A and C and a
//! contemporaneous b1 term in B. Estimation is two-stage pseudo-linear
//! regression: a long ARX fit recovers innovation estimates, a second
//! regression on lagged y, u, and innovations yields the coefficients,
//! and a single damped refinement pass re-solves with innovations
//! recomputed from the fitted model.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ols;

/// Orders (n, m, r) of the AR, exogenous, and MA polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmaxOrders {
    pub n: usize,
    pub m: usize,
    pub r: usize,
}

impl ArmaxOrders {
    pub fn new(n: usize, m: usize, r: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidConfig("armax: AR order n must be >= 1".into()));
        }
        if m < 1 {
            return Err(Error::InvalidConfig("armax: exogenous order m must be >= 1".into()));
        }
        Ok(ArmaxOrders { n, m, r })
    }

    fn param_count(&self) -> usize {
        self.n + self.m + self.r
    }
}

/// Fitted ARMAX model. `a` holds a_1..a_n of the monic A(q), so a pure
/// AR(1) y(k) = 0.5 y(k-1) + ... is stored as a_1 = -0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaxModel {
    pub orders: ArmaxOrders,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub noise_variance: f64,
    /// Last `r` innovation estimates from fitting, newest last. Used as
    /// the default initial innovations when forecasting.
    pub last_innovations: Vec<f64>,
}

/// Innovations of (y, u) under fixed coefficients, by recursion:
/// v(k) = y(k) + sum a_i y(k-i) - sum b_j u(k-j+1) - sum c_l v(k-l),
/// with out-of-range terms treated as zero.
fn innovations(y: &[f64], u: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut v = vec![0.0; n];
    for k in 0..n {
        let mut val = y[k];
        for (i, &ai) in a.iter().enumerate() {
            if k > i {
                val += ai * y[k - i - 1];
            }
        }
        for (j, &bj) in b.iter().enumerate() {
            if k >= j {
                val -= bj * u[k - j];
            }
        }
        for (l, &cl) in c.iter().enumerate() {
            if k > l {
                val -= cl * v[k - l - 1];
            }
        }
        v[k] = val;
    }
    v
}

/// Stage-2 regression of y on lagged y, u, and given innovations.
/// Returns (a, b, c, residual variance, residuals).
fn regress(
    y: &[f64],
    u: &[f64],
    v: &[f64],
    orders: ArmaxOrders,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, f64, Vec<f64>)> {
    let (n_ord, m_ord, r_ord) = (orders.n, orders.m, orders.r);
    let start = n_ord.max(m_ord.saturating_sub(1)).max(r_ord);
    let rows = y.len() - start;
    let cols = orders.param_count();
    let design = DMatrix::from_fn(rows, cols, |row, col| {
        let k = start + row;
        if col < n_ord {
            -y[k - col - 1]
        } else if col < n_ord + m_ord {
            u[k - (col - n_ord)]
        } else {
            v[k - (col - n_ord - m_ord) - 1]
        }
    });
    let target = DVector::from_iterator(rows, y[start..].iter().copied());
    let beta = ols(&design, &target, "armax")?;
    let a = beta.as_slice()[..n_ord].to_vec();
    let b = beta.as_slice()[n_ord..n_ord + m_ord].to_vec();
    let c = beta.as_slice()[n_ord + m_ord..].to_vec();
    let fitted = design * &beta;
    let residuals: Vec<f64> = target
        .iter()
        .zip(fitted.iter())
        .map(|(t, f)| t - f)
        .collect();
    let variance = residuals.iter().map(|r| r * r).sum::<f64>() / rows as f64;
    Ok((a, b, c, variance, residuals))
}

/// Fit an ARMAX model by two-stage pseudo-linear regression with one
/// refinement pass.
pub fn fit_armax(y: &[f64], u: &[f64], orders: ArmaxOrders) -> Result<ArmaxModel> {
    ArmaxOrders::new(orders.n, orders.m, orders.r)?;
    if y.len() != u.len() {
        return Err(Error::Shape(format!(
            "y length {} != u length {}",
            y.len(),
            u.len()
        )));
    }
    let min = 3 * orders.param_count() + 10;
    if y.len() < min {
        return Err(Error::TooShort { stage: "armax fit", len: y.len(), min });
    }

    // Stage 1: long ARX to estimate innovations.
    let long = 2 * orders.n.max(orders.m).max(orders.r) + 4;
    let v_hat = if orders.r == 0 {
        vec![0.0; y.len()]
    } else {
        let arx = ArmaxOrders { n: long, m: long, r: 0 };
        if y.len() <= long + arx.param_count() {
            return Err(Error::TooShort {
                stage: "armax fit",
                len: y.len(),
                min: long + arx.param_count() + 1,
            });
        }
        let (a1, b1, _, _, _) = regress(y, u, &vec![0.0; y.len()], arx).map_err(|e| match e {
            Error::Conditioning { stage, hint } => Error::Conditioning {
                stage,
                hint: format!("{hint}; consider lowering the orders"),
            },
            other => other,
        })?;
        innovations(y, u, &a1, &b1, &[])
    };

    // Stage 2.
    let (mut a, mut b, mut c, mut variance, mut residuals) =
        regress(y, u, &v_hat, orders).map_err(lower_orders_hint)?;

    // One refinement pass: recompute innovations from the fitted model and
    // re-solve; step accepted only if the residual variance decreases.
    let v_new = innovations(y, u, &a, &b, &c);
    if let Ok((a2, b2, c2, var2, res2)) = regress(y, u, &v_new, orders) {
        if var2.is_finite() && var2 < variance {
            a = a2;
            b = b2;
            c = c2;
            variance = var2;
            residuals = res2;
        }
    }

    let tail = residuals.len().saturating_sub(orders.r.max(1));
    Ok(ArmaxModel {
        orders,
        a,
        b,
        c,
        noise_variance: variance,
        last_innovations: residuals[tail..].to_vec(),
    })
}

fn lower_orders_hint(e: Error) -> Error {
    match e {
        Error::Conditioning { stage, hint } => Error::Conditioning {
            stage,
            hint: format!("{hint}; consider lowering the orders"),
        },
        other => other,
    }
}

/// Multi-step forecast with future innovations at their conditional mean
/// of zero. `y_init` holds the last observed outputs (newest last);
/// `v_init`, when given, the last innovations (newest last). Exogenous
/// lags reaching before the forecast start are treated as zero.
pub fn forecast_armax(
    model: &ArmaxModel,
    u_future: &[f64],
    y_init: &[f64],
    v_init: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let orders = model.orders;
    if y_init.len() < orders.n {
        return Err(Error::Shape(format!(
            "y_init length {} < AR order {}",
            y_init.len(),
            orders.n
        )));
    }
    let default_v = vec![0.0; orders.r];
    let v_init = match v_init {
        Some(v) => {
            if v.len() < orders.r {
                return Err(Error::Shape(format!(
                    "v_init length {} < MA order {}",
                    v.len(),
                    orders.r
                )));
            }
            v
        }
        None => &default_v,
    };

    let h = u_future.len();
    let mut forecast = Vec::with_capacity(h);
    for k in 0..h {
        let mut val = 0.0;
        for (i, &ai) in model.a.iter().enumerate() {
            let lag = i + 1;
            let y_lag = if k >= lag {
                forecast[k - lag]
            } else {
                y_init[y_init.len() - (lag - k)]
            };
            val -= ai * y_lag;
        }
        for (j, &bj) in model.b.iter().enumerate() {
            if k >= j {
                val += bj * u_future[k - j];
            }
        }
        for (l, &cl) in model.c.iter().enumerate() {
            let lag = l + 1;
            // future innovations are zero; only initial ones contribute
            if k < lag {
                let idx = v_init.len() - (lag - k);
                val += cl * v_init[idx];
            }
        }
        forecast.push(val);
    }
    Ok(forecast)
}

/// Akaike information criterion: N ln(variance) + 2 (n + m + r).
pub fn aic(model: &ArmaxModel, sample_count: usize) -> Result<f64> {
    if !(model.noise_variance > 0.0) {
        return Err(Error::Degenerate("AIC undefined for zero noise variance".into()));
    }
    let k = model.orders.param_count();
    if sample_count <= k {
        return Err(Error::Degenerate(format!(
            "AIC needs more samples ({sample_count}) than parameters ({k})"
        )));
    }
    Ok(sample_count as f64 * model.noise_variance.ln() + 2.0 * k as f64)
}

/// The (order, test error) curve from an equal-order scan.
pub type OrderScan = Vec<(usize, f64)>;

/// Smallest order achieving the minimum finite test error in a scan.
/// Exact ties resolve to the lower order regardless of scan position.
pub fn best_order_in_scan(scan: &OrderScan) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &(k, err) in scan {
        if !err.is_finite() {
            continue;
        }
        let better = match best {
            None => true,
            Some((e, bk)) => err < e || (err == e && k < bk),
        };
        if better {
            best = Some((err, k));
        }
    }
    best.map(|(_, k)| k)
}

/// Equal-order scan: for k in 1..=max_order fit (k, k, k) on the training
/// pair, forecast the test span, and keep the k with the least test
/// NRMSE. Exact ties and fit failures resolve to the smaller order.
pub fn select_orders(
    y_train: &[f64],
    u_train: &[f64],
    y_test: &[f64],
    u_test: &[f64],
    max_order: usize,
) -> Result<(ArmaxOrders, OrderScan)> {
    if max_order < 1 {
        return Err(Error::InvalidConfig("select_orders: max_order must be >= 1".into()));
    }
    if y_test.is_empty() {
        return Err(Error::Shape("select_orders: empty test series".into()));
    }
    let mean_test = y_test.iter().sum::<f64>() / y_test.len() as f64;
    if mean_test == 0.0 {
        return Err(Error::ZeroMeanActual);
    }

    let mut scan = OrderScan::new();
    let mut failures: Vec<String> = Vec::new();
    for k in 1..=max_order {
        let orders = ArmaxOrders { n: k, m: k, r: k };
        let outcome = fit_armax(y_train, u_train, orders).and_then(|model| {
            let forecast = forecast_armax(
                &model,
                u_test,
                y_train,
                Some(&model.last_innovations),
            )?;
            let rmse = (y_test
                .iter()
                .zip(&forecast)
                .map(|(a, f)| (a - f).powi(2))
                .sum::<f64>()
                / y_test.len() as f64)
                .sqrt();
            Ok(rmse / mean_test)
        });
        match outcome {
            Ok(err) if err.is_finite() => scan.push((k, err)),
            Ok(err) => failures.push(format!("order {k}: non-finite error {err}")),
            Err(e) => failures.push(format!("order {k}: {e}")),
        }
    }

    match best_order_in_scan(&scan) {
        Some(k) => Ok((ArmaxOrders { n: k, m: k, r: k }, scan)),
        None => Err(Error::SelectionFailed(failures.join("; "))),
    }
}

/// Simulate an ARMAX system forward from zero initial conditions; used by
/// tests and the synthetic benchmark.
pub fn simulate_armax(model: &ArmaxModel, u: &[f64], noise: &[f64]) -> Vec<f64> {
    let n = u.len();
    assert_eq!(noise.len(), n);
    let mut y = vec![0.0; n];
    for k in 0..n {
        let mut val = noise[k];
        for (i, &ai) in model.a.iter().enumerate() {
            if k > i {
                val -= ai * y[k - i - 1];
            }
        }
        for (j, &bj) in model.b.iter().enumerate() {
            if k >= j {
                val += bj * u[k - j];
            }
        }
        for (l, &cl) in model.c.iter().enumerate() {
            if k > l {
                val += cl * noise[k - l - 1];
            }
        }
        y[k] = val;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn noise(seed: u64, n: usize, sigma: f64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(0.0, sigma).unwrap();
        (0..n).map(|_| dist.sample(&mut rng)).collect()
    }

    fn arx_system() -> ArmaxModel {
        ArmaxModel {
            orders: ArmaxOrders { n: 1, m: 1, r: 0 },
            a: vec![-0.5],
            b: vec![1.0],
            c: vec![],
            noise_variance: 0.0,
            last_innovations: vec![],
        }
    }

    #[test]
    fn recovers_arx_coefficients_with_noise() {
        let n = 2000;
        let u = noise(1, n, 1.0);
        let v = noise(2, n, 0.05);
        let y = simulate_armax(&arx_system(), &u, &v);
        let fit = fit_armax(&y, &u, ArmaxOrders { n: 1, m: 1, r: 0 }).unwrap();
        assert!((fit.a[0] + 0.5).abs() < 0.05, "a1 = {}", fit.a[0]);
        assert!((fit.b[0] - 1.0).abs() < 0.05, "b1 = {}", fit.b[0]);
    }

    #[test]
    fn noiseless_arx_recovered_exactly() {
        let n = 500;
        let u = noise(3, n, 1.0);
        let y = simulate_armax(&arx_system(), &u, &vec![0.0; n]);
        let fit = fit_armax(&y, &u, ArmaxOrders { n: 1, m: 1, r: 0 }).unwrap();
        assert!((fit.a[0] + 0.5).abs() < 1e-6);
        assert!((fit.b[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_ar_order_rejected() {
        let y = vec![0.0; 100];
        assert!(matches!(
            fit_armax(&y, &y, ArmaxOrders { n: 0, m: 1, r: 0 }).unwrap_err(),
            Error::InvalidConfig(_)
        ));
    }

    #[test]
    fn forecast_empty_horizon() {
        let model = arx_system();
        assert!(forecast_armax(&model, &[], &[0.0], None).unwrap().is_empty());
    }

    #[test]
    fn degenerate_passthrough_model() {
        // A(q)=1 (n formally 1 with a1=0), B(q)=b1, C(q)=1
        let model = ArmaxModel {
            orders: ArmaxOrders { n: 1, m: 1, r: 0 },
            a: vec![0.0],
            b: vec![2.5],
            c: vec![],
            noise_variance: 0.0,
            last_innovations: vec![],
        };
        let u = vec![1.0, -2.0, 0.5];
        let f = forecast_armax(&model, &u, &[9.9], None).unwrap();
        assert_eq!(f, vec![2.5, -5.0, 1.25]);
    }

    #[test]
    fn noiseless_forecast_matches_simulation() {
        let n = 600;
        let u = noise(4, n, 1.0);
        let y = simulate_armax(&arx_system(), &u, &vec![0.0; n]);
        let fit = fit_armax(&y[..500], &u[..500], ArmaxOrders { n: 1, m: 1, r: 0 }).unwrap();
        let forecast = forecast_armax(&fit, &u[500..], &y[..500], None).unwrap();
        for (f, t) in forecast.iter().zip(&y[500..]) {
            assert!((f - t).abs() < 1e-6, "{f} vs {t}");
        }
    }

    #[test]
    fn forecast_linear_in_exogenous_input() {
        let model = ArmaxModel {
            orders: ArmaxOrders { n: 2, m: 2, r: 1 },
            a: vec![-0.6, 0.2],
            b: vec![0.8, 0.3],
            c: vec![0.4],
            noise_variance: 0.0,
            last_innovations: vec![0.0],
        };
        let u1 = noise(5, 20, 1.0);
        let u2 = noise(6, 20, 1.0);
        let (alpha, beta) = (1.7, -0.4);
        let combined: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| alpha * a + beta * b).collect();
        let zeros = vec![0.0, 0.0];
        let f1 = forecast_armax(&model, &u1, &zeros, None).unwrap();
        let f2 = forecast_armax(&model, &u2, &zeros, None).unwrap();
        let fc = forecast_armax(&model, &combined, &zeros, None).unwrap();
        for i in 0..20 {
            assert!((fc[i] - (alpha * f1[i] + beta * f2[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn aic_penalty_arithmetic() {
        let model_small = ArmaxModel {
            orders: ArmaxOrders { n: 1, m: 1, r: 1 },
            a: vec![0.0],
            b: vec![0.0],
            c: vec![0.0],
            noise_variance: 0.2,
            last_innovations: vec![],
        };
        let model_large = ArmaxModel {
            orders: ArmaxOrders { n: 2, m: 2, r: 2 },
            a: vec![0.0; 2],
            b: vec![0.0; 2],
            c: vec![0.0; 2],
            noise_variance: 0.2,
            last_innovations: vec![],
        };
        let small = aic(&model_small, 100).unwrap();
        let large = aic(&model_large, 100).unwrap();
        assert!((large - small - 6.0).abs() < 1e-12);

        let mut halved = model_small.clone();
        halved.noise_variance = 0.1;
        let delta = aic(&model_small, 100).unwrap() - aic(&halved, 100).unwrap();
        assert!((delta - 100.0 * 2.0f64.ln()).abs() < 1e-9);
        assert!((delta - 69.31).abs() < 0.01);
    }

    #[test]
    fn aic_zero_variance_degenerate() {
        let mut model = arx_system();
        model.noise_variance = 0.0;
        assert!(matches!(aic(&model, 100).unwrap_err(), Error::Degenerate(_)));
    }

    #[test]
    fn single_candidate_scan() {
        let n = 300;
        let u = noise(7, n, 1.0);
        let y = simulate_armax(&arx_system(), &u, &noise(8, n, 0.1));
        let offset: Vec<f64> = y.iter().map(|v| v + 5.0).collect();
        let (orders, scan) =
            select_orders(&offset[..250], &u[..250], &offset[250..], &u[250..], 1).unwrap();
        assert_eq!(orders, ArmaxOrders { n: 1, m: 1, r: 1 });
        assert_eq!(scan.len(), 1);
    }

    #[test]
    fn scan_minimum_matches_returned_order() {
        let n = 700;
        let u: Vec<f64> = noise(9, n, 0.5).iter().map(|v| v + 1.0).collect();
        let model = ArmaxModel {
            orders: ArmaxOrders { n: 2, m: 2, r: 2 },
            a: vec![-0.7, 0.2],
            b: vec![1.0, 0.4],
            c: vec![0.5, 0.2],
            noise_variance: 0.0,
            last_innovations: vec![],
        };
        let y = simulate_armax(&model, &u, &noise(10, n, 0.1));
        let (orders, scan) = select_orders(&y[..600], &u[..600], &y[600..], &u[600..], 5).unwrap();
        let min = scan.iter().cloned().fold(f64::INFINITY, |m, (_, e)| m.min(e));
        let (k_at_min, _) = scan.iter().find(|&&(_, e)| e == min).unwrap();
        assert_eq!(orders.n, *k_at_min);
    }

    #[test]
    fn estimator_consistency_in_sample_size() {
        let mut err_small_sum = 0.0;
        let mut err_large_sum = 0.0;
        for seed in 0..10u64 {
            for (n, acc) in [(500usize, &mut err_small_sum), (4000, &mut err_large_sum)] {
                let u = noise(100 + seed, n, 1.0);
                let v = noise(200 + seed, n, 0.05);
                let y = simulate_armax(&arx_system(), &u, &v);
                let fit = fit_armax(&y, &u, ArmaxOrders { n: 1, m: 1, r: 0 }).unwrap();
                *acc += (fit.a[0] + 0.5).abs() + (fit.b[0] - 1.0).abs();
            }
        }
        assert!(
            err_large_sum <= err_small_sum,
            "N=4000 error {err_large_sum} vs N=500 error {err_small_sum}"
        );
    }
}
