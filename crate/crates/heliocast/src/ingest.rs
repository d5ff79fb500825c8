//! Hourly GHI ingestion: parsing, gap handling, windowing, and the
//! canonical on-disk series format.
//!
//! Vendor exports (NSRDB-style delimited text) are parsed once, validated,
//! and cached as a canonical two-column file so downstream stages never
//! touch vendor formats again.

use std::fmt::Write as _;

use chrono::{Duration, NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Location and timezone of one measurement site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteMeta {
    pub site_id: String,
    /// Degrees north, in [-90, 90].
    pub latitude: f64,
    /// Degrees east, in [-180, 180].
    pub longitude: f64,
    /// Hours east of UTC, in [-12, 14]; fractional offsets allowed.
    pub utc_offset: f64,
}

impl SiteMeta {
    pub fn new(site_id: impl Into<String>, latitude: f64, longitude: f64, utc_offset: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&latitude) || !latitude.is_finite() {
            return Err(Error::InvalidSite(format!("latitude {latitude} out of [-90, 90]")));
        }
        if !(-180.0..=180.0).contains(&longitude) || !longitude.is_finite() {
            return Err(Error::InvalidSite(format!("longitude {longitude} out of [-180, 180]")));
        }
        if !(-12.0..=14.0).contains(&utc_offset) || !utc_offset.is_finite() {
            return Err(Error::InvalidSite(format!("utc offset {utc_offset} out of [-12, 14]")));
        }
        Ok(SiteMeta {
            site_id: site_id.into(),
            latitude,
            longitude,
            utc_offset,
        })
    }
}

/// One hourly observation; `ghi` is `None` where the source had a gap or
/// sentinel value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrradianceRecord {
    pub timestamp: NaiveDateTime,
    pub ghi: Option<f64>,
}

/// A validated hourly GHI series for one site.
///
/// Timestamps are strictly increasing on a 1-hour grid; gaps are explicit
/// missing-markers, never absent rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrradianceSeries {
    site: SiteMeta,
    records: Vec<IrradianceRecord>,
}

impl IrradianceSeries {
    pub fn new(site: SiteMeta, records: Vec<IrradianceRecord>) -> Result<Self> {
        for (i, rec) in records.iter().enumerate() {
            if rec.timestamp.minute() != 0 || rec.timestamp.second() != 0 {
                return Err(Error::Cadence(rec.timestamp));
            }
            if let Some(v) = rec.ghi {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidSeries(format!(
                        "ghi {v} at index {i} is not finite and non-negative"
                    )));
                }
            }
            if i > 0 {
                let prev = records[i - 1].timestamp;
                let step = rec.timestamp - prev;
                if step == Duration::zero() {
                    return Err(Error::DuplicateTimestamp(rec.timestamp));
                }
                if step != Duration::hours(1) {
                    return Err(Error::Cadence(rec.timestamp));
                }
            }
        }
        Ok(IrradianceSeries { site, records })
    }

    pub fn site(&self) -> &SiteMeta {
        &self.site
    }

    pub fn records(&self) -> &[IrradianceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn has_missing(&self) -> bool {
        self.records.iter().any(|r| r.ghi.is_none())
    }

    /// All dates touched by the series, in order.
    pub fn dates(&self) -> Vec<NaiveDate> {
        let mut out: Vec<NaiveDate> = Vec::new();
        for r in &self.records {
            let d = r.timestamp.date();
            if out.last() != Some(&d) {
                out.push(d);
            }
        }
        out
    }

    /// Extract exactly `n_days` full days starting at `start_date` 00:00.
    pub fn slice_window(&self, start_date: NaiveDate, n_days: usize) -> Result<IrradianceSeries> {
        let start_ts = start_date.and_hms_opt(0, 0, 0).unwrap();
        if n_days == 0 {
            return IrradianceSeries::new(self.site.clone(), Vec::new());
        }
        let first = self
            .records
            .first()
            .ok_or(Error::WindowOutOfRange { start: start_date, days: n_days })?
            .timestamp;
        if start_ts < first {
            return Err(Error::WindowOutOfRange { start: start_date, days: n_days });
        }
        let offset = (start_ts - first).num_hours() as usize;
        let end = offset + n_days * 24;
        if end > self.records.len() {
            return Err(Error::WindowOutOfRange { start: start_date, days: n_days });
        }
        IrradianceSeries::new(self.site.clone(), self.records[offset..end].to_vec())
    }

    /// The 24 records of one day, if fully present.
    pub fn day(&self, date: NaiveDate) -> Result<&[IrradianceRecord]> {
        let start_ts = date.and_hms_opt(0, 0, 0).unwrap();
        let first = self
            .records
            .first()
            .ok_or(Error::WindowOutOfRange { start: date, days: 1 })?
            .timestamp;
        if start_ts < first {
            return Err(Error::WindowOutOfRange { start: date, days: 1 });
        }
        let offset = (start_ts - first).num_hours() as usize;
        if offset + 24 > self.records.len() {
            return Err(Error::WindowOutOfRange { start: date, days: 1 });
        }
        Ok(&self.records[offset..offset + 24])
    }
}

/// Column layout of a delimited input file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvFormat {
    pub delimiter: char,
    pub timestamp_column: String,
    pub ghi_column: String,
    /// Values equal to this sentinel become missing-markers.
    pub sentinel: f64,
}

impl Default for CsvFormat {
    fn default() -> Self {
        CsvFormat {
            delimiter: ',',
            timestamp_column: "timestamp".into(),
            ghi_column: "ghi".into(),
            sentinel: -9999.0,
        }
    }
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    for fmt in [
        "%Y-%m-%d %H:%M",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M:%S",
    ] {
        if let Ok(ts) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(ts);
        }
    }
    None
}

/// Parse a delimited hourly export into a validated series.
///
/// Rows are sorted by timestamp, sentinel values become missing-markers,
/// and absent hours between the first and last timestamp are filled in as
/// missing-markers so the hourly grid is gap-free by construction.
pub fn parse_hourly_csv(raw_text: &str, site: SiteMeta, format: &CsvFormat) -> Result<IrradianceSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter as u8)
        .trim(csv::Trim::All)
        .from_reader(raw_text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .clone();
    let ts_idx = headers
        .iter()
        .position(|h| h == format.timestamp_column)
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing timestamp column '{}'", format.timestamp_column),
        })?;
    let ghi_idx = headers
        .iter()
        .position(|h| h == format.ghi_column)
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing GHI column '{}'", format.ghi_column),
        })?;

    let mut rows: Vec<IrradianceRecord> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // 1-based, after the header
        let record = record.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let ts_str = record.get(ts_idx).unwrap_or("");
        let timestamp = parse_timestamp(ts_str).ok_or_else(|| Error::Parse {
            line,
            message: format!("malformed timestamp '{ts_str}'"),
        })?;
        if timestamp.minute() != 0 || timestamp.second() != 0 {
            return Err(Error::Cadence(timestamp));
        }
        let ghi_str = record.get(ghi_idx).unwrap_or("");
        let ghi = if ghi_str.is_empty() {
            None
        } else {
            let v: f64 = ghi_str.parse().map_err(|_| Error::Parse {
                line,
                message: format!("malformed GHI value '{ghi_str}'"),
            })?;
            if v == format.sentinel {
                None
            } else if !v.is_finite() || v < 0.0 {
                return Err(Error::Parse {
                    line,
                    message: format!("GHI value {v} is not finite and non-negative"),
                });
            } else {
                Some(v)
            }
        };
        rows.push(IrradianceRecord { timestamp, ghi });
    }

    rows.sort_by_key(|r| r.timestamp);
    for pair in rows.windows(2) {
        if pair[0].timestamp == pair[1].timestamp {
            return Err(Error::DuplicateTimestamp(pair[0].timestamp));
        }
    }

    // Fill absent hours with missing-markers.
    let mut filled: Vec<IrradianceRecord> = Vec::with_capacity(rows.len());
    for rec in rows {
        if let Some(prev) = filled.last() {
            let mut t = prev.timestamp + Duration::hours(1);
            while t < rec.timestamp {
                filled.push(IrradianceRecord { timestamp: t, ghi: None });
                t += Duration::hours(1);
            }
        }
        filled.push(rec);
    }

    IrradianceSeries::new(site, filled)
}

/// How to replace missing-markers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FillPolicy {
    LinearInterpolate,
    PreviousDaySameHour,
    Reject,
}

/// Which indices [`fill_missing`] replaced.
#[derive(Debug, Clone, Default)]
pub struct FillReport {
    pub filled_indices: Vec<usize>,
}

/// Replace every missing-marker according to `policy`.
pub fn fill_missing(series: &IrradianceSeries, policy: FillPolicy) -> Result<(IrradianceSeries, FillReport)> {
    let records = series.records();
    let missing: Vec<usize> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.ghi.is_none())
        .map(|(i, _)| i)
        .collect();
    if missing.is_empty() {
        return Ok((series.clone(), FillReport::default()));
    }
    if policy == FillPolicy::Reject {
        return Err(Error::DataQuality(format!(
            "{} missing values present under reject policy (first at {})",
            missing.len(),
            records[missing[0]].timestamp
        )));
    }

    let mut values: Vec<Option<f64>> = records.iter().map(|r| r.ghi).collect();
    match policy {
        FillPolicy::LinearInterpolate => {
            let n = values.len();
            let mut i = 0;
            while i < n {
                if values[i].is_some() {
                    i += 1;
                    continue;
                }
                let run_start = i;
                let mut run_end = i;
                while run_end < n && values[run_end].is_none() {
                    run_end += 1;
                }
                if run_start == 0 || run_end == n {
                    return Err(Error::Boundary(
                        "missing values at series boundary cannot be linearly interpolated".into(),
                    ));
                }
                let left = values[run_start - 1].unwrap();
                let right = values[run_end].unwrap();
                let span = (run_end - run_start + 1) as f64;
                for (k, slot) in values[run_start..run_end].iter_mut().enumerate() {
                    let frac = (k + 1) as f64 / span;
                    *slot = Some((left + (right - left) * frac).max(0.0));
                }
                i = run_end;
            }
        }
        FillPolicy::PreviousDaySameHour => {
            for &i in &missing {
                if i < 24 || values[i - 24].is_none() {
                    return Err(Error::Boundary(format!(
                        "no previous-day value available for {}",
                        records[i].timestamp
                    )));
                }
                values[i] = values[i - 24];
            }
        }
        FillPolicy::Reject => unreachable!(),
    }

    let out: Vec<IrradianceRecord> = records
        .iter()
        .zip(values)
        .map(|(r, v)| IrradianceRecord { timestamp: r.timestamp, ghi: v })
        .collect();
    Ok((
        IrradianceSeries::new(series.site().clone(), out)?,
        FillReport { filled_indices: missing },
    ))
}

/// Serialize to the canonical two-column format: ISO-8601 timestamp and
/// GHI with one decimal place; missing values written as the sentinel.
pub fn to_canonical_csv(series: &IrradianceSeries, format: &CsvFormat) -> String {
    let mut out = String::new();
    let d = format.delimiter;
    let _ = writeln!(out, "{}{d}{}", format.timestamp_column, format.ghi_column);
    for rec in series.records() {
        let ts = rec.timestamp.format("%Y-%m-%dT%H:%M");
        match rec.ghi {
            Some(v) => {
                let _ = writeln!(out, "{ts}{d}{v:.1}");
            }
            None => {
                let _ = writeln!(out, "{ts}{d}{}", format.sentinel);
            }
        }
    }
    out
}

/// Write a generic aligned value series in the canonical two-column layout.
/// Readable back through [`parse_hourly_csv`]-style tooling and external
/// plotting alike.
pub fn to_two_column_csv(header: (&str, &str), rows: &[(NaiveDateTime, f64)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{},{}", header.0, header.1);
    for (ts, v) in rows {
        let _ = writeln!(out, "{},{v:.6}", ts.format("%Y-%m-%dT%H:%M"));
    }
    out
}
