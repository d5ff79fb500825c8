//! Command implementations behind the `heliocast` binary.
//!
//! All outputs land under the configured `output_dir` with deterministic
//! file names embedding site id, date, and case label; numeric series
//! files use the canonical two-column format that `ingest` reads back.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;

use crate::armax::ArmaxOrders;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::eval::{self, CaseId, ForecastOutput};
use crate::ingest::{self, CsvFormat, IrradianceSeries};
use crate::preprocess::{ClearSkySample, ClearSkySource};
use crate::synth;

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Parse the input file and apply the configured fill policy.
pub fn load_dataset(config: &RunConfig) -> Result<IrradianceSeries> {
    let text = read_file(&config.data_path)?;
    let series = ingest::parse_hourly_csv(&text, config.site.clone(), &config.csv)?;
    let (filled, report) = ingest::fill_missing(&series, config.fill_policy)?;
    if !report.filled_indices.is_empty() {
        eprintln!(
            "note: filled {} missing hourly values ({:?} policy)",
            report.filled_indices.len(),
            config.fill_policy
        );
    }
    Ok(filled)
}

/// Clear-sky source: user table when configured, Haurwitz otherwise.
pub fn load_clear_sky(config: &RunConfig) -> Result<ClearSkySource> {
    match &config.clear_sky_path {
        None => Ok(ClearSkySource::Haurwitz),
        Some(path) => {
            let text = read_file(path)?;
            let series = ingest::parse_hourly_csv(&text, config.site.clone(), &CsvFormat::default())?;
            let samples = series
                .records()
                .iter()
                .map(|r| {
                    Ok(ClearSkySample {
                        timestamp: r.timestamp,
                        value: r.ghi.ok_or_else(|| {
                            Error::DataQuality(format!("clear-sky table missing value at {}", r.timestamp))
                        })?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ClearSkySource::table(samples))
        }
    }
}

/// Trailing window of full days the prepare step summarizes.
fn trailing_window(dataset: &IrradianceSeries, max_days: usize) -> Result<IrradianceSeries> {
    let dates = dataset.dates();
    let full_days = dataset.len() / 24;
    if full_days == 0 {
        return Err(Error::DataQuality("dataset holds less than one full day".into()));
    }
    let days = full_days.min(max_days);
    let start = dates[dates.len().saturating_sub(days)];
    dataset.slice_window(start, days)
}

/// Validate and cache the input, preprocess the trailing training
/// window, and write the inversion artifact plus an ADF summary.
pub fn cmd_prepare(config: &RunConfig) -> Result<()> {
    let dataset = load_dataset(config)?;
    let clear_sky = load_clear_sky(config)?;
    let out = &config.output_dir;
    let site = &config.site.site_id;

    write_file(
        &out.join(format!("{site}_canonical.csv")),
        &ingest::to_canonical_csv(&dataset, &config.csv),
    )?;

    let window = trailing_window(&dataset, config.training_days)?;
    let (_, artifact) = crate::preprocess::apply_preprocess(&window, &config.preprocess_config(clear_sky))?;
    write_file(&out.join(format!("{site}_artifact.toml")), &artifact.to_toml()?)?;

    let mut summary = String::new();
    match &artifact.adf {
        Some(adf) => {
            let _ = writeln!(summary, "ADF statistic: {:.6}", adf.statistic);
            let _ = writeln!(summary, "lag order: {}", adf.lag_order);
            let _ = writeln!(
                summary,
                "critical values: 1% {:.4}  5% {:.4}  10% {:.4}",
                adf.critical_values.one_percent,
                adf.critical_values.five_percent,
                adf.critical_values.ten_percent
            );
            let _ = writeln!(summary, "stationary: {}", adf.is_stationary);
            if !adf.is_stationary {
                eprintln!(
                    "warning: series is nonstationary (ADF statistic {:.4})",
                    adf.statistic
                );
            }
        }
        None => {
            let _ = writeln!(summary, "ADF test not run");
        }
    }
    write_file(&out.join(format!("{site}_adf_summary.txt")), &summary)?;
    println!("prepared {site}: {} records, artifact written to {}", dataset.len(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct ForecastSummary {
    site_id: String,
    target_date: NaiveDate,
    case: &'static str,
    orders: Option<ArmaxOrders>,
    training_r2: f64,
    fitting_r2: Option<f64>,
    nrmse: Option<f64>,
    narnn_retried: bool,
}

fn day_timestamps(date: NaiveDate) -> Vec<chrono::NaiveDateTime> {
    (0..24).map(|h| date.and_hms_opt(h, 0, 0).unwrap()).collect()
}

fn write_forecast_files(config: &RunConfig, out: &ForecastOutput) -> Result<()> {
    let dir = &config.output_dir;
    let site = &config.site.site_id;
    let date = out.day.target_date;
    let label = out.case.label();

    let rows: Vec<_> = day_timestamps(date)
        .into_iter()
        .zip(out.day.forecast_ghi.iter().copied())
        .collect();
    write_file(
        &dir.join(format!("{site}_{date}_{label}_forecast.csv")),
        &ingest::to_two_column_csv(("timestamp", "ghi"), &rows),
    )?;

    if let Some(actual) = &out.day.actual_ghi {
        let rows: Vec<_> = day_timestamps(date).into_iter().zip(actual.iter().copied()).collect();
        write_file(
            &dir.join(format!("{site}_{date}_actual.csv")),
            &ingest::to_two_column_csv(("timestamp", "ghi"), &rows),
        )?;
    }

    let mask = out.artifact.mask_for(date)?;
    let fitting_rows: Vec<_> = mask
        .daylight_hours
        .iter()
        .map(|&h| date.and_hms_opt(h, 0, 0).unwrap())
        .zip(out.fitting_series.iter().copied())
        .collect();
    write_file(
        &dir.join(format!("{site}_{date}_{label}_fitting.csv")),
        &ingest::to_two_column_csv(("timestamp", "fitting"), &fitting_rows),
    )?;

    if let Some(scan) = &out.order_scan {
        let mut text = String::from("order,nrmse\n");
        for (k, err) in scan {
            let _ = writeln!(text, "{k},{err:.6}");
        }
        write_file(&dir.join(format!("{site}_{date}_{label}_order_scan.csv")), &text)?;
    }

    let summary = ForecastSummary {
        site_id: site.clone(),
        target_date: date,
        case: label,
        orders: out.armax_model.as_ref().map(|m| m.orders),
        training_r2: out.narnn_model.training_r2,
        fitting_r2: out.day.fitting_r2,
        nrmse: out.day.nrmse,
        narnn_retried: out.narnn_retried,
    };
    write_file(
        &dir.join(format!("{site}_{date}_{label}_summary.toml")),
        &toml::to_string(&summary).map_err(|e| Error::Config(format!("summary serialization: {e}")))?,
    )?;
    Ok(())
}

/// Full two-stage forecast for one target day.
pub fn cmd_forecast(config: &RunConfig, target_date: NaiveDate) -> Result<()> {
    let dataset = load_dataset(config)?;
    let clear_sky = load_clear_sky(config)?;
    let fc = config.forecast_config(clear_sky);

    let out = eval::forecast_day(&dataset, target_date, CaseId::Case1TwoStageStationary, &fc)?;
    if out.narnn_retried {
        eprintln!("warning: Stage-1 training R² was not positive; retried once with a fresh seed");
    }
    if let Some(adf) = &out.artifact.adf {
        if !adf.is_stationary {
            eprintln!("warning: training window is nonstationary (ADF statistic {:.4})", adf.statistic);
        }
    }
    write_forecast_files(config, &out)?;

    println!("site: {}", config.site.site_id);
    println!("target date: {target_date}");
    println!("stage-1 training R²: {:.4}", out.narnn_model.training_r2);
    if let Some(r2) = out.day.fitting_r2 {
        println!("fitting R²: {r2:.4}");
    }
    if let Some(m) = &out.armax_model {
        println!("armax orders: ({}, {}, {})", m.orders.n, m.orders.m, m.orders.r);
    }
    if let Some(v) = out.day.nrmse {
        println!("NRMSE: {v:.6}");
    }
    Ok(())
}

/// Run the equal-order scan alone and emit the (order, error) curve.
pub fn cmd_orders(config: &RunConfig, target_date: NaiveDate) -> Result<()> {
    let dataset = load_dataset(config)?;
    let clear_sky = load_clear_sky(config)?;
    let mut fc = config.forecast_config(clear_sky);
    fc.fixed_orders = None;
    fc.selection = eval::OrderSelection::ErrorScan;

    let out = eval::forecast_day(&dataset, target_date, CaseId::Case1TwoStageStationary, &fc)?;
    let scan = out
        .order_scan
        .as_ref()
        .ok_or_else(|| Error::SelectionFailed("no order scan produced".into()))?;

    let site = &config.site.site_id;
    let mut text = String::from("order,nrmse\n");
    println!("order  test NRMSE");
    for (k, err) in scan {
        let _ = writeln!(text, "{k},{err:.6}");
        println!("{k:>5}  {err:.6}");
    }
    write_file(&config.output_dir.join(format!("{site}_{target_date}_order_scan.csv")), &text)?;
    if let Some(m) = &out.armax_model {
        println!("selected orders: ({}, {}, {})", m.orders.n, m.orders.m, m.orders.r);
    }
    Ok(())
}

/// Run Cases 1-3 plus the persistence baseline on identical dates and
/// emit the comparison table.
pub fn cmd_compare(config: &RunConfig, target_dates: &[NaiveDate]) -> Result<()> {
    let dataset = load_dataset(config)?;
    let clear_sky = load_clear_sky(config)?;
    let fc = config.forecast_config(clear_sky);
    let dir = &config.output_dir;
    let site = &config.site.site_id;

    let case_ids = [
        CaseId::Case1TwoStageStationary,
        CaseId::Case2TwoStageNonstationary,
        CaseId::Case3SingleStage,
        CaseId::PersistenceBaseline,
    ];
    let mut reports = Vec::new();
    for case in case_ids {
        let mut days = Vec::new();
        let mut failures = Vec::new();
        for &date in target_dates {
            if case == CaseId::PersistenceBaseline {
                match eval::run_case(case, &dataset, &[date], &fc) {
                    Ok(mut rep) => {
                        days.append(&mut rep.days);
                        failures.append(&mut rep.failures);
                    }
                    Err(e) => failures.push((date, e.to_string())),
                }
                continue;
            }
            match eval::forecast_day(&dataset, date, case, &fc) {
                Ok(out) => {
                    write_forecast_files(config, &out)?;
                    days.push(out.day);
                }
                Err(e) => failures.push((date, e.to_string())),
            }
        }
        for (date, msg) in &failures {
            eprintln!("warning: {} failed for {date}: {msg}", case.label());
        }
        reports.push(eval::EvaluationReport { case, days, failures });
    }

    // partial results per case are still emitted; the cross-case table
    // needs matching dates
    let table = eval::compare_cases(&reports)?;
    write_file(
        &dir.join(format!("{site}_comparison.toml")),
        &toml::to_string(&table).map_err(|e| Error::Config(format!("comparison serialization: {e}")))?,
    )?;

    let mut csv_text = String::from("method");
    for date in &table.dates {
        let _ = write!(csv_text, ",{date}");
    }
    csv_text.push_str(",aggregate\n");
    for case in &table.cases {
        let _ = write!(csv_text, "{}", case.label);
        for v in &case.per_day {
            match v {
                Some(v) => {
                    let _ = write!(csv_text, ",{v:.6}");
                }
                None => csv_text.push_str(",nan"),
            }
        }
        match case.aggregate {
            Some(v) => {
                let _ = writeln!(csv_text, ",{v:.6}");
            }
            None => csv_text.push_str(",nan\n"),
        }
    }
    write_file(&dir.join(format!("{site}_comparison.csv")), &csv_text)?;

    println!("NRMSE by method and day:");
    print!("{csv_text}");
    for imp in &table.improvements {
        if let Some(v) = imp.aggregate {
            println!("improvement of {} over {}: {:.1}%", table.cases[0].label, imp.over, v * 100.0);
        }
    }
    Ok(())
}

/// Emit the synthetic benchmark dataset in canonical form.
pub fn cmd_synth(out_path: &PathBuf, days: usize, seed: u64, start_date: Option<NaiveDate>) -> Result<()> {
    let mut cfg = synth::benchmark_config(seed);
    cfg.days = days;
    if let Some(start) = start_date {
        cfg.start_date = start;
    }
    let series = synth::generate(&cfg);
    write_file(out_path, &ingest::to_canonical_csv(&series, &CsvFormat::default()))?;
    println!(
        "wrote {} days of synthetic data for site {} to {}",
        days,
        series.site().site_id,
        out_path.display()
    );
    Ok(())
}
