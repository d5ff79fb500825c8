//! Property-based checks for the metric and transform primitives.

use heliocast::eval::nrmse;
use heliocast::narnn::r_squared;
use heliocast::preprocess::{detrend, fit_trend, normalize, retrend, NormalizationParams};
use proptest::prelude::*;

fn series(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1000.0..1000.0f64, len)
}

proptest! {
    /// NRMSE is scale invariant: multiplying both series by the same
    /// positive constant divides RMSE and the actual mean alike.
    #[test]
    fn nrmse_scale_invariant(
        pair in series(2..40).prop_flat_map(|a| {
            let n = a.len();
            (Just(a), series(n..n + 1))
        }),
        scale in 0.01..100.0f64,
    ) {
        let (actual, forecast) = pair;
        let mean = actual.iter().sum::<f64>() / actual.len() as f64;
        prop_assume!(mean.abs() > 1e-3);
        let base = nrmse(&actual, &forecast).unwrap();
        let scaled_actual: Vec<f64> = actual.iter().map(|v| v * scale).collect();
        let scaled_forecast: Vec<f64> = forecast.iter().map(|v| v * scale).collect();
        let scaled = nrmse(&scaled_actual, &scaled_forecast).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-9 * (1.0 + base.abs()));
    }

    /// A forecast equal to the actual series scores exactly zero.
    #[test]
    fn nrmse_zero_for_perfect_forecast(actual in series(1..40)) {
        let mean = actual.iter().sum::<f64>() / actual.len() as f64;
        prop_assume!(mean.abs() > 1e-3);
        prop_assert_eq!(nrmse(&actual, &actual).unwrap(), 0.0);
    }

    /// R² is invariant under a shared affine map of both series.
    #[test]
    fn r_squared_affine_invariant(
        pair in series(2..40).prop_flat_map(|a| {
            let n = a.len();
            (Just(a), series(n..n + 1))
        }),
        alpha in prop_oneof![-100.0..-0.01f64, 0.01..100.0f64],
        beta in -100.0..100.0f64,
    ) {
        let (actual, predicted) = pair;
        let mean = actual.iter().sum::<f64>() / actual.len() as f64;
        let variance = actual.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        prop_assume!(variance > 1e-3);
        let base = r_squared(&actual, &predicted).unwrap();
        let map = |v: &f64| alpha * v + beta;
        let mapped = r_squared(
            &actual.iter().map(map).collect::<Vec<_>>(),
            &predicted.iter().map(map).collect::<Vec<_>>(),
        )
        .unwrap();
        prop_assert!((base - mapped).abs() <= 1e-6 * (1.0 + base.abs()));
    }

    /// Min-max normalization followed by its inverse is the identity.
    #[test]
    fn normalize_round_trips(values in series(2..60)) {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(hi - lo > 1e-6);
        let (normalized, params) = normalize(&values).unwrap();
        for (&orig, &norm) in values.iter().zip(&normalized) {
            prop_assert!((0.0..=1.0).contains(&norm));
            prop_assert!((params.invert(norm) - orig).abs() <= 1e-9 * (1.0 + orig.abs()));
        }
    }

    /// apply/invert on NormalizationParams are mutual inverses for any
    /// nondegenerate bounds, including inputs outside [low, high].
    #[test]
    fn normalization_params_invertible(
        low in -1000.0..1000.0f64,
        span in 0.001..2000.0f64,
        x in -5000.0..5000.0f64,
    ) {
        let params = NormalizationParams { low, high: low + span };
        let there = params.apply(x);
        prop_assert!((params.invert(there) - x).abs() <= 1e-6 * (1.0 + x.abs()));
    }

    /// detrend followed by retrend restores the original samples.
    #[test]
    fn detrend_round_trips(
        values in proptest::collection::vec(-500.0..500.0f64, 12..48),
        degree in 0..5usize,
    ) {
        let samples: Vec<(f64, f64)> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (6.0 + (i % 12) as f64, v))
            .collect();
        let trend = fit_trend(&samples, degree).unwrap();
        let residuals = detrend(&samples, &trend);
        let hours: Vec<f64> = samples.iter().map(|&(h, _)| h).collect();
        let restored = retrend(&residuals, &hours, &trend);
        for (&(_, orig), back) in samples.iter().zip(restored) {
            prop_assert!((orig - back).abs() <= 1e-6 * (1.0 + orig.abs()));
        }
    }
}
