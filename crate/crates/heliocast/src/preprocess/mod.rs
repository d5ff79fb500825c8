//! Stationarization pipeline: clear-sky offset removal, nighttime
//! stripping, polynomial detrending, ADF stationarity check, and min-max
//! normalization — plus the exact inverse applied to forecasts.
//!
//! Every parameter needed for inversion is captured in a
//! [`PreprocessArtifact`] so post-processing can run in a separate
//! process invocation.

pub mod adf;

use chrono::{NaiveDate, NaiveDateTime, Timelike};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{IrradianceRecord, IrradianceSeries, SiteMeta};
use crate::linalg::ols;
use crate::solar::{self, DaylightMask};

pub use adf::{adf_test, default_max_lag, AdfResult, CriticalValues, Significance};

pub const ARTIFACT_SCHEMA_VERSION: u32 = 1;

/// Polynomial trend over the local hour h:
/// a_0 + a_1 h + ... + a_n h^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendModel {
    pub degree: usize,
    /// a_0 ... a_n in the original hour basis.
    pub coefficients: Vec<f64>,
}

impl TrendModel {
    pub fn eval(&self, h: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * h + c)
    }
}

/// Expand sum_k b_k * (alpha*h + beta)^k into coefficients over h.
fn rescale_poly(scaled: &[f64], alpha: f64, beta: f64) -> Vec<f64> {
    let n = scaled.len();
    let mut out = vec![0.0; n];
    // power = (alpha*h + beta)^k, updated incrementally
    let mut power = vec![0.0; n];
    power[0] = 1.0;
    let mut power_len = 1;
    for (k, &b) in scaled.iter().enumerate() {
        if k > 0 {
            let mut next = vec![0.0; n];
            for (i, &p) in power.iter().take(power_len).enumerate() {
                next[i] += p * beta;
                next[i + 1] += p * alpha;
            }
            power = next;
            power_len += 1;
        }
        for i in 0..power_len {
            out[i] += b * power[i];
        }
    }
    out
}

/// Least-squares fit of the hour polynomial. The design is
/// solved on hours rescaled to [-1, 1] for conditioning; coefficients are
/// reported in the original hour basis.
pub fn fit_trend(samples: &[(f64, f64)], degree: usize) -> Result<TrendModel> {
    let n = samples.len();
    if n < degree + 1 {
        return Err(Error::Underdetermined { samples: n, degree });
    }
    if degree == 0 {
        let mean = samples.iter().map(|&(_, v)| v).sum::<f64>() / n as f64;
        return Ok(TrendModel { degree: 0, coefficients: vec![mean] });
    }
    let (hmin, hmax) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(h, _)| {
        (lo.min(h), hi.max(h))
    });
    if hmax <= hmin {
        return Err(Error::Conditioning {
            stage: "fit_trend",
            hint: " (all samples share the same hour)".into(),
        });
    }
    let alpha = 2.0 / (hmax - hmin);
    let beta = -(hmax + hmin) / (hmax - hmin);

    let design = DMatrix::from_fn(n, degree + 1, |row, col| {
        let u = alpha * samples[row].0 + beta;
        u.powi(col as i32)
    });
    let target = DVector::from_iterator(n, samples.iter().map(|&(_, v)| v));
    let scaled = ols(&design, &target, "fit_trend")?;
    let coefficients = rescale_poly(scaled.as_slice(), alpha, beta);
    Ok(TrendModel { degree, coefficients })
}

/// Subtract the trend evaluated at each sample's hour.
pub fn detrend(samples: &[(f64, f64)], trend: &TrendModel) -> Vec<f64> {
    samples.iter().map(|&(h, v)| v - trend.eval(h)).collect()
}

/// Exact inverse of [`detrend`].
pub fn retrend(residuals: &[f64], hours: &[f64], trend: &TrendModel) -> Vec<f64> {
    residuals
        .iter()
        .zip(hours)
        .map(|(&r, &h)| r + trend.eval(h))
        .collect()
}

/// Min-max bounds used to map a series into [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub low: f64,
    pub high: f64,
}

impl NormalizationParams {
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.low) / (self.high - self.low)
    }

    pub fn invert(&self, y: f64) -> f64 {
        self.low + y * (self.high - self.low)
    }
}

/// Min-max normalize into [0, 1], returning the bounds for inversion.
pub fn normalize(values: &[f64]) -> Result<(Vec<f64>, NormalizationParams)> {
    let (low, high) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if !(high > low) {
        return Err(Error::ZeroRange { stage: "normalize" });
    }
    let params = NormalizationParams { low, high };
    Ok((values.iter().map(|&v| params.apply(v)).collect(), params))
}

/// One clear-sky value aligned to a raw series timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClearSkySample {
    pub timestamp: NaiveDateTime,
    pub value: f64,
}

/// Where clear-sky reference values come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClearSkySource {
    /// Haurwitz model evaluated at each hourly interval midpoint.
    Haurwitz,
    /// User-supplied table keyed by interval-start timestamps.
    Table { samples: Vec<ClearSkySample> },
}

impl ClearSkySource {
    pub fn table(mut samples: Vec<ClearSkySample>) -> Self {
        samples.sort_by_key(|s| s.timestamp);
        ClearSkySource::Table { samples }
    }

    /// Clear-sky GHI for the hourly interval starting at `date` `hour`:00.
    pub fn value_for_hour(&self, site: &SiteMeta, date: NaiveDate, hour: u32) -> Result<f64> {
        match self {
            ClearSkySource::Haurwitz => Ok(solar::clear_sky_for_hour(site, date, hour)),
            ClearSkySource::Table { samples } => {
                let ts = date.and_hms_opt(hour, 0, 0).unwrap();
                samples
                    .binary_search_by_key(&ts, |s| s.timestamp)
                    .map(|i| samples[i].value)
                    .map_err(|_| Error::DataQuality(format!("clear-sky table has no entry for {ts}")))
            }
        }
    }

    /// Daylight mask for `date`: the hours with positive clear-sky GHI.
    pub fn mask_for(&self, site: &SiteMeta, date: NaiveDate) -> Result<DaylightMask> {
        match self {
            ClearSkySource::Haurwitz => Ok(solar::daylight_mask(site, date)),
            ClearSkySource::Table { .. } => {
                let mut daylight_hours = Vec::new();
                for h in 0..24u32 {
                    if self.value_for_hour(site, date, h)? > 0.0 {
                        daylight_hours.push(h);
                    }
                }
                Ok(DaylightMask { date, daylight_hours })
            }
        }
    }
}

/// Subtract measured GHI from the aligned clear-sky reference. Negative
/// values (measurement above the model) are preserved.
pub fn remove_offset(
    series: &IrradianceSeries,
    clear_sky: &[ClearSkySample],
) -> Result<Vec<(NaiveDateTime, f64)>> {
    if series.len() != clear_sky.len() {
        return Err(Error::Misaligned(series.len().min(clear_sky.len())));
    }
    let mut out = Vec::with_capacity(series.len());
    for (i, (rec, cs)) in series.records().iter().zip(clear_sky).enumerate() {
        if rec.timestamp != cs.timestamp {
            return Err(Error::Misaligned(i));
        }
        let ghi = rec
            .ghi
            .ok_or_else(|| Error::DataQuality(format!("missing GHI at {}", rec.timestamp)))?;
        out.push((rec.timestamp, cs.value - ghi));
    }
    Ok(out)
}

/// Keep only daylight-hour samples, preserving order. The returned index
/// map points each kept sample back at its position in the input.
pub fn strip_nighttime(
    samples: &[(NaiveDateTime, f64)],
    masks: &[DaylightMask],
) -> Result<(Vec<(NaiveDateTime, f64)>, Vec<usize>)> {
    let mut kept = Vec::new();
    let mut index_map = Vec::new();
    for (i, &(ts, v)) in samples.iter().enumerate() {
        let date = ts.date();
        let mask = masks
            .iter()
            .find(|m| m.date == date)
            .ok_or(Error::MissingMask(date))?;
        if mask.contains(ts.hour()) {
            kept.push((ts, v));
            index_map.push(i);
        }
    }
    Ok((kept, index_map))
}

/// Stationary normalized daytime series, the common currency of both
/// forecasting stages.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarySeries {
    pub timestamps: Vec<NaiveDateTime>,
    /// Values in [0, 1].
    pub values: Vec<f64>,
}

impl StationarySeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Indices of samples falling on `date`.
    pub fn day_indices(&self, date: NaiveDate) -> Vec<usize> {
        self.timestamps
            .iter()
            .enumerate()
            .filter(|(_, ts)| ts.date() == date)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Pipeline knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreprocessConfig {
    /// Detrend polynomial degree; `None` skips detrending entirely
    /// (the nonstationary-input configuration).
    pub detrend_degree: Option<usize>,
    /// Fit the trend polynomial on only the last N days of the window,
    /// where conditions resemble the forecast day; `None` fits on the
    /// whole window. The fitted trend is subtracted everywhere either way.
    pub trend_days: Option<usize>,
    /// ADF augmentation bound; `None` uses the standard heuristic.
    pub adf_max_lag: Option<usize>,
    pub adf_significance: Significance,
    /// Abort on a failed stationarity check instead of warning.
    pub adf_strict: bool,
    /// Run the ADF check at all.
    pub run_adf: bool,
    pub clear_sky: ClearSkySource,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            detrend_degree: Some(4),
            trend_days: Some(3),
            adf_max_lag: None,
            adf_significance: Significance::FivePercent,
            adf_strict: false,
            run_adf: true,
            clear_sky: ClearSkySource::Haurwitz,
        }
    }
}

/// Everything needed to invert the pipeline on a forecast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessArtifact {
    pub schema_version: u32,
    pub site: SiteMeta,
    pub clear_sky_source: ClearSkySource,
    /// Daylight mask per training-window day.
    pub masks: Vec<DaylightMask>,
    /// Clear-sky values aligned to the raw training series.
    pub clear_sky: Vec<ClearSkySample>,
    pub trend: Option<TrendModel>,
    pub norm: NormalizationParams,
    pub adf: Option<AdfResult>,
}

impl PreprocessArtifact {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("artifact serialization: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let artifact: PreprocessArtifact =
            toml::from_str(text).map_err(|e| Error::Config(format!("artifact parse: {e}")))?;
        if artifact.schema_version != ARTIFACT_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported artifact schema version {} (expected {})",
                artifact.schema_version, ARTIFACT_SCHEMA_VERSION
            )));
        }
        Ok(artifact)
    }

    /// Mask for any date, stored or recomputed from the clear-sky source.
    pub fn mask_for(&self, date: NaiveDate) -> Result<DaylightMask> {
        if let Some(m) = self.masks.iter().find(|m| m.date == date) {
            return Ok(m.clone());
        }
        self.clear_sky_source.mask_for(&self.site, date)
    }
}

/// Run the full forward pipeline: offset removal, nighttime stripping,
/// detrending, ADF check, normalization.
pub fn apply_preprocess(
    series: &IrradianceSeries,
    config: &PreprocessConfig,
) -> Result<(StationarySeries, PreprocessArtifact)> {
    if series.has_missing() {
        return Err(Error::DataQuality(
            "preprocess requires a gap-free series; run fill_missing first".into(),
        ));
    }
    let site = series.site().clone();

    let clear_sky: Vec<ClearSkySample> = series
        .records()
        .iter()
        .map(|r| {
            Ok(ClearSkySample {
                timestamp: r.timestamp,
                value: config
                    .clear_sky
                    .value_for_hour(&site, r.timestamp.date(), r.timestamp.hour())?,
            })
        })
        .collect::<Result<_>>()?;

    let offsets = remove_offset(series, &clear_sky)?;

    let masks: Vec<DaylightMask> = series
        .dates()
        .iter()
        .map(|&d| config.clear_sky.mask_for(&site, d))
        .collect::<Result<_>>()?;

    let (daytime, _) = strip_nighttime(&offsets, &masks)?;
    if daytime.is_empty() {
        return Err(Error::DataQuality("no daylight samples in window".into()));
    }

    let hours: Vec<f64> = daytime.iter().map(|(ts, _)| ts.hour() as f64).collect();
    let hour_samples: Vec<(f64, f64)> = hours.iter().copied().zip(daytime.iter().map(|&(_, v)| v)).collect();

    let (trend, residuals) = match config.detrend_degree {
        Some(degree) => {
            let fit_samples: Vec<(f64, f64)> = match config.trend_days {
                Some(days) if days > 0 => {
                    let last = daytime.last().unwrap().0.date();
                    let cutoff = last - chrono::Duration::days(days as i64 - 1);
                    daytime
                        .iter()
                        .filter(|(ts, _)| ts.date() >= cutoff)
                        .map(|&(ts, v)| (ts.hour() as f64, v))
                        .collect()
                }
                _ => hour_samples.clone(),
            };
            let trend = fit_trend(&fit_samples, degree)?;
            let residuals = detrend(&hour_samples, &trend);
            (Some(trend), residuals)
        }
        None => (None, daytime.iter().map(|&(_, v)| v).collect()),
    };

    let adf = if config.run_adf {
        let max_lag = config.adf_max_lag.unwrap_or_else(|| default_max_lag(residuals.len()));
        match adf_test(&residuals, max_lag, config.adf_significance) {
            Ok(res) => {
                if config.adf_strict && !res.is_stationary {
                    return Err(Error::Nonstationary {
                        statistic: res.statistic,
                        critical: res.critical_values.at(res.significance),
                    });
                }
                Some(res)
            }
            // A constant residual series surfaces as a zero-range failure
            // at the normalization stage below.
            Err(Error::ZeroRange { .. }) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let (values, norm) = normalize(&residuals)?;

    let stationary = StationarySeries {
        timestamps: daytime.iter().map(|&(ts, _)| ts).collect(),
        values,
    };
    let artifact = PreprocessArtifact {
        schema_version: ARTIFACT_SCHEMA_VERSION,
        site,
        clear_sky_source: config.clear_sky.clone(),
        masks,
        clear_sky,
        trend,
        norm,
        adf,
    };
    Ok((stationary, artifact))
}

/// Invert the pipeline on a normalized daytime forecast for one day.
/// Returns 24 hourly GHI values: denormalize, retrend, clear-sky minus
/// offset, clamp into [0, clear-sky], zero at night.
pub fn apply_postprocess(
    forecast: &[f64],
    artifact: &PreprocessArtifact,
    target_date: NaiveDate,
) -> Result<Vec<f64>> {
    let mask = artifact.mask_for(target_date)?;
    if forecast.len() != mask.len() {
        return Err(Error::Shape(format!(
            "forecast length {} does not match {} daylight hours of {target_date}",
            forecast.len(),
            mask.len()
        )));
    }
    let mut out = vec![0.0; 24];
    for (&hour, &v) in mask.daylight_hours.iter().zip(forecast) {
        let mut offset = artifact.norm.invert(v);
        if let Some(trend) = &artifact.trend {
            offset += trend.eval(hour as f64);
        }
        let cs = artifact
            .clear_sky_source
            .value_for_hour(&artifact.site, target_date, hour)?;
        out[hour as usize] = (cs - offset).clamp(0.0, cs);
    }
    Ok(out)
}

/// Forward-transform one observed day with the *stored* artifact
/// parameters (no refitting): the normalized stationary values the
/// pipeline would have produced for that day.
pub fn transform_day(artifact: &PreprocessArtifact, day: &[IrradianceRecord]) -> Result<Vec<f64>> {
    if day.is_empty() {
        return Ok(Vec::new());
    }
    let date = day[0].timestamp.date();
    let mask = artifact.mask_for(date)?;
    let mut out = Vec::with_capacity(mask.len());
    for rec in day {
        if !mask.contains(rec.timestamp.hour()) {
            continue;
        }
        let ghi = rec
            .ghi
            .ok_or_else(|| Error::DataQuality(format!("missing GHI at {}", rec.timestamp)))?;
        let hour = rec.timestamp.hour();
        let cs = artifact
            .clear_sky_source
            .value_for_hour(&artifact.site, date, hour)?;
        let mut v = cs - ghi;
        if let Some(trend) = &artifact.trend {
            v -= trend.eval(hour as f64);
        }
        out.push(artifact.norm.apply(v));
    }
    Ok(out)
}
