//! Time-series ingestion: parse, harmonize, and validate the hourly inputs.
//!
//! Feed-in and load series arrive as CSV at 15-minute or hourly resolution in
//! civil time. The pipeline here downsamples quarter-hours by summation
//! (values are energy per interval, so summing conserves the annual totals
//! the reports reconcile against), rescales load to the official annual
//! total, and repairs the two daylight-saving anomalies per year. Parsed
//! values are snapped to a dyadic 2^-20 MWh lattice so downstream sums and
//! curve surgery stay exact in f64.

use std::path::Path;

use chrono::{DateTime, Duration, NaiveDateTime, Timelike, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{quantize_volume_mwh, AuctionCurve, PriceBounds};

/// One parsed observation. `utc_offset_minutes` is the civil-time zone
/// annotation when the source carried one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub timestamp: NaiveDateTime,
    pub utc_offset_minutes: Option<i32>,
    pub value: f64,
}

impl Sample {
    /// The instant in UTC when an offset annotation is present, otherwise the
    /// civil timestamp itself.
    fn instant(&self) -> NaiveDateTime {
        match self.utc_offset_minutes {
            Some(off) => self.timestamp - Duration::minutes(off as i64),
            None => self.timestamp,
        }
    }
}

/// A validated raw time series at 15- or 60-minute resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub name: String,
    pub resolution_minutes: u32,
    pub samples: Vec<Sample>,
}

impl RawSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.samples.iter().map(|s| s.value).sum()
    }
}

/// Column names expected in an input CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub timestamp: String,
    pub value: String,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        Self {
            timestamp: "timestamp".to_string(),
            value: "energy_mwh".to_string(),
        }
    }
}

/// One hour of market history: demand-side volumes plus the hour's aggregated
/// auction curves and the realized settlement.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyMarketRecord {
    pub hour_start: DateTime<Utc>,
    pub load_mwh: f64,
    pub wind_mwh: f64,
    pub pv_mwh: f64,
    pub cleared_volume_mwh: f64,
    pub realized_price_eur_mwh: f64,
    pub demand_curve: AuctionCurve,
    pub supply_curve: AuctionCurve,
}

impl HourlyMarketRecord {
    /// Check the record invariants: non-negative energies, realized price
    /// within exchange bounds, RES feed-in not exceeding offered supply.
    pub fn validate(&self) -> Result<(), IngestError> {
        let bounds = PriceBounds::default();
        for (label, v) in [
            ("load", self.load_mwh),
            ("wind", self.wind_mwh),
            ("pv", self.pv_mwh),
            ("cleared volume", self.cleared_volume_mwh),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(IngestError::NegativeEnergy {
                    hour: self.hour_start,
                    label,
                    value: v,
                });
            }
        }
        if !bounds.contains(self.realized_price_eur_mwh) {
            return Err(IngestError::PriceOutOfBounds {
                hour: self.hour_start,
                price: self.realized_price_eur_mwh,
            });
        }
        let res = self.wind_mwh + self.pv_mwh;
        if res > self.supply_curve.total_volume_mwh() + 1e-6 {
            return Err(IngestError::ResExceedsSupply {
                hour: self.hour_start,
                res_mwh: res,
                supply_mwh: self.supply_curve.total_volume_mwh(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing column '{0}' in header")]
    MissingColumn(String),
    #[error("malformed row at line {line}: {message}")]
    MalformedRow { line: u64, message: String },
    #[error("non-monotone timestamps at line {line}")]
    NonMonotoneTimestamps { line: u64 },
    #[error("no samples")]
    NoSamples,
    #[error("unsupported resolution {0} minutes (expected 15 or 60)")]
    UnsupportedResolution(i64),
    #[error("series resolution is {got} min, operation needs {want} min")]
    WrongResolution { got: u32, want: u32 },
    #[error("gap of {missing} quarter-hours at {at} exceeds the repair limit")]
    GapTooLong { at: NaiveDateTime, missing: usize },
    #[error("zero-sum series cannot be rescaled")]
    ZeroSumSeries,
    #[error("{count} daylight-saving anomalies exceed the limit of {limit}")]
    TooManyDstAnomalies { count: usize, limit: usize },
    #[error("irregular hourly sequence at {0}")]
    IrregularSequence(NaiveDateTime),
    #[error("normalized series has {got} hours, expected 8760 or 8784")]
    NotAFullYear { got: usize },
    #[error("negative {label} at {hour}: {value}")]
    NegativeEnergy {
        hour: DateTime<Utc>,
        label: &'static str,
        value: f64,
    },
    #[error("realized price {price} at {hour} outside exchange bounds")]
    PriceOutOfBounds { hour: DateTime<Utc>, price: f64 },
    #[error(
        "RES feed-in {res_mwh} MWh at {hour} exceeds offered supply {supply_mwh} MWh"
    )]
    ResExceedsSupply {
        hour: DateTime<Utc>,
        res_mwh: f64,
        supply_mwh: f64,
    },
}

/// Outcome of an ingest step together with any data-quality warnings.
#[derive(Debug, Clone)]
pub struct IngestOutcome {
    pub series: RawSeries,
    pub warnings: Vec<String>,
}

fn parse_timestamp(raw: &str) -> Option<(NaiveDateTime, Option<i32>)> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some((dt.naive_local(), Some(dt.offset().local_minus_utc() / 60)));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some((dt, None));
        }
    }
    None
}

/// Parse a CSV file into a validated series. The header row is required; the
/// resolution (15 or 60 minutes) is inferred from the first timestamp gap.
pub fn parse_series(path: &Path, spec: &ColumnSpec) -> Result<RawSeries, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| IngestError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| IngestError::MalformedRow { line: 1, message: e.to_string() })?
        .clone();
    let ts_idx = headers
        .iter()
        .position(|h| h == spec.timestamp)
        .ok_or_else(|| IngestError::MissingColumn(spec.timestamp.clone()))?;
    let val_idx = headers
        .iter()
        .position(|h| h == spec.value)
        .ok_or_else(|| IngestError::MissingColumn(spec.value.clone()))?;

    let mut samples: Vec<Sample> = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let line = row_no as u64 + 2; // header is line 1
        let record = record.map_err(|e| IngestError::MalformedRow {
            line,
            message: e.to_string(),
        })?;
        let raw_ts = record.get(ts_idx).ok_or(IngestError::MalformedRow {
            line,
            message: "missing timestamp field".to_string(),
        })?;
        let (timestamp, offset) = parse_timestamp(raw_ts).ok_or(IngestError::MalformedRow {
            line,
            message: format!("unparseable timestamp '{raw_ts}'"),
        })?;
        let raw_val = record.get(val_idx).ok_or(IngestError::MalformedRow {
            line,
            message: "missing value field".to_string(),
        })?;
        let value: f64 = raw_val.trim().parse().map_err(|_| IngestError::MalformedRow {
            line,
            message: format!("unparseable value '{raw_val}'"),
        })?;
        let sample = Sample {
            timestamp,
            utc_offset_minutes: offset,
            value: quantize_volume_mwh(value),
        };
        if let Some(prev) = samples.last() {
            // strictly increasing instants; civil duplicates are legal only
            // when the offset annotation disambiguates them (DST fall-back)
            if sample.instant() <= prev.instant() {
                return Err(IngestError::NonMonotoneTimestamps { line });
            }
        }
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(IngestError::NoSamples);
    }

    let resolution_minutes = if samples.len() < 2 {
        60
    } else {
        let delta = (samples[1].instant() - samples[0].instant()).num_minutes();
        match delta {
            15 => 15,
            60 => 60,
            other => return Err(IngestError::UnsupportedResolution(other)),
        }
    };

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.value.clone());
    Ok(RawSeries {
        name,
        resolution_minutes,
        samples,
    })
}

/// Downsample a quarter-hourly energy series to hourly resolution by summing
/// the four 15-minute values of each hour.
///
/// Interior gaps shorter than four quarter-hours are filled by linear
/// interpolation (standard repair for TSO feeds); longer gaps are an error.
/// Partial hours at either boundary are truncated with a warning.
pub fn downsample_quarter_hourly(series: &RawSeries) -> Result<IngestOutcome, IngestError> {
    if series.resolution_minutes != 15 {
        return Err(IngestError::WrongResolution {
            got: series.resolution_minutes,
            want: 15,
        });
    }
    if series.samples.is_empty() {
        return Err(IngestError::NoSamples);
    }
    let mut warnings = Vec::new();

    // Fill interior gaps on the 15-minute grid.
    let step = Duration::minutes(15);
    let mut filled: Vec<Sample> = Vec::with_capacity(series.samples.len());
    filled.push(series.samples[0]);
    for s in &series.samples[1..] {
        let prev = *filled.last().unwrap();
        let gap = (s.instant() - prev.instant()).num_minutes();
        if gap % 15 != 0 {
            return Err(IngestError::IrregularSequence(s.timestamp));
        }
        let missing = (gap / 15 - 1) as usize;
        if missing > 0 {
            if missing >= 4 {
                return Err(IngestError::GapTooLong {
                    at: prev.timestamp,
                    missing,
                });
            }
            warnings.push(format!(
                "interpolated {missing} missing quarter-hour(s) after {}",
                prev.timestamp
            ));
            for k in 1..=missing {
                let t = k as f64 / (missing as f64 + 1.0);
                filled.push(Sample {
                    timestamp: prev.timestamp + step * k as i32,
                    utc_offset_minutes: prev.utc_offset_minutes,
                    value: quantize_volume_mwh(prev.value + t * (s.value - prev.value)),
                });
            }
        }
        filled.push(*s);
    }

    // Truncate partial hours at the boundaries.
    let start = filled
        .iter()
        .position(|s| s.timestamp.minute() == 0)
        .unwrap_or(filled.len());
    if start > 0 {
        warnings.push(format!("truncated {start} leading quarter-hour(s) before the first full hour"));
    }
    let usable = &filled[start..];
    let full_hours = usable.len() / 4;
    let dropped = usable.len() - full_hours * 4;
    if dropped > 0 {
        warnings.push(format!("truncated {dropped} trailing quarter-hour(s) of a partial hour"));
    }
    if full_hours == 0 {
        return Err(IngestError::NoSamples);
    }

    let mut hourly = Vec::with_capacity(full_hours);
    for chunk in usable[..full_hours * 4].chunks_exact(4) {
        // lattice values: the sum is exact
        let value = chunk.iter().map(|s| s.value).sum();
        hourly.push(Sample {
            timestamp: chunk[0].timestamp,
            utc_offset_minutes: chunk[0].utc_offset_minutes,
            value,
        });
    }

    Ok(IngestOutcome {
        series: RawSeries {
            name: series.name.clone(),
            resolution_minutes: 60,
            samples: hourly,
        },
        warnings,
    })
}

/// Uniformly rescale a series so its sum matches an official annual total.
///
/// Values are left off the volume lattice here: the factor is irrational in
/// general and re-snapping would distort small series more than the 1e-9
/// relative budget allows. Rescaled series feed statistics, not curve surgery.
pub fn rescale_to_annual_total(
    series: &RawSeries,
    official_total_mwh: f64,
) -> Result<RawSeries, IngestError> {
    let sum = series.sum();
    if !(sum > 0.0) {
        return Err(IngestError::ZeroSumSeries);
    }
    let factor = official_total_mwh / sum;
    let samples = series
        .samples
        .iter()
        .map(|s| Sample {
            value: s.value * factor,
            ..*s
        })
        .collect();
    Ok(RawSeries {
        name: series.name.clone(),
        resolution_minutes: series.resolution_minutes,
        samples,
    })
}

/// Remove daylight-saving artifacts from an hourly civil-time series: the
/// spring-forward missing hour is filled by linear interpolation of its
/// neighbours, the fall-back duplicated hour is replaced by the mean of the
/// two readings. The result must span a complete year (8,760 or 8,784 hours).
pub fn normalize_dst(series: &RawSeries) -> Result<IngestOutcome, IngestError> {
    if series.resolution_minutes != 60 {
        return Err(IngestError::WrongResolution {
            got: series.resolution_minutes,
            want: 60,
        });
    }
    if series.samples.is_empty() {
        return Err(IngestError::NoSamples);
    }
    const ANOMALY_LIMIT: usize = 2;
    let mut warnings = Vec::new();
    let mut anomalies = 0usize;
    let hour = Duration::hours(1);

    let mut out: Vec<Sample> = Vec::with_capacity(series.samples.len());
    out.push(Sample {
        utc_offset_minutes: None,
        ..series.samples[0]
    });
    let mut i = 1;
    while i < series.samples.len() {
        let cur = series.samples[i];
        let prev = *out.last().unwrap();
        let gap = cur.timestamp - prev.timestamp;
        if gap == hour {
            out.push(Sample {
                utc_offset_minutes: None,
                ..cur
            });
        } else if gap == Duration::zero() {
            // fall-back: duplicated civil hour, keep the mean
            anomalies += 1;
            warnings.push(format!("merged duplicated hour {}", cur.timestamp));
            out.last_mut().unwrap().value = 0.5 * (prev.value + cur.value);
        } else if gap == Duration::hours(2) {
            // spring-forward: one missing civil hour, interpolate
            anomalies += 1;
            warnings.push(format!("filled missing hour {}", prev.timestamp + hour));
            out.push(Sample {
                timestamp: prev.timestamp + hour,
                utc_offset_minutes: None,
                value: quantize_volume_mwh(0.5 * (prev.value + cur.value)),
            });
            out.push(Sample {
                utc_offset_minutes: None,
                ..cur
            });
        } else {
            return Err(IngestError::IrregularSequence(cur.timestamp));
        }
        if anomalies > ANOMALY_LIMIT {
            return Err(IngestError::TooManyDstAnomalies {
                count: anomalies,
                limit: ANOMALY_LIMIT,
            });
        }
        i += 1;
    }

    if out.len() != 8760 && out.len() != 8784 {
        return Err(IngestError::NotAFullYear { got: out.len() });
    }
    Ok(IngestOutcome {
        series: RawSeries {
            name: series.name.clone(),
            resolution_minutes: 60,
            samples: out,
        },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use chrono::NaiveDate;
    use std::io::Write;

    fn ts(s: &str) -> NaiveDateTime {
        NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S").unwrap()
    }

    fn quarter_series(values: &[f64]) -> RawSeries {
        let start = ts("2011-06-01T00:00:00");
        RawSeries {
            name: "test".into(),
            resolution_minutes: 15,
            samples: values
                .iter()
                .enumerate()
                .map(|(i, &v)| Sample {
                    timestamp: start + Duration::minutes(15 * i as i64),
                    utc_offset_minutes: None,
                    value: v,
                })
                .collect(),
        }
    }

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn parse_four_quarter_rows() {
        let f = write_csv(
            "timestamp,energy_mwh\n\
             2011-01-01T00:00:00,10.0\n\
             2011-01-01T00:15:00,11.5\n\
             2011-01-01T00:30:00,9.25\n\
             2011-01-01T00:45:00,10.0\n",
        );
        let s = parse_series(f.path(), &ColumnSpec::default()).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.resolution_minutes, 15);
        assert_eq!(s.samples[1].value, 11.5);
    }

    #[test]
    fn parse_rejects_duplicate_timestamp() {
        let f = write_csv(
            "timestamp,energy_mwh\n\
             2011-01-01T00:00:00,10.0\n\
             2011-01-01T00:00:00,11.0\n",
        );
        let err = parse_series(f.path(), &ColumnSpec::default()).unwrap_err();
        assert!(matches!(err, IngestError::NonMonotoneTimestamps { line: 3 }));
    }

    #[test]
    fn parse_rejects_empty_file() {
        let f = write_csv("timestamp,energy_mwh\n");
        assert!(matches!(
            parse_series(f.path(), &ColumnSpec::default()),
            Err(IngestError::NoSamples)
        ));
    }

    #[test]
    fn parse_reports_malformed_row_line() {
        let f = write_csv(
            "timestamp,energy_mwh\n\
             2011-01-01T00:00:00,10.0\n\
             2011-01-01T00:15:00,not-a-number\n",
        );
        match parse_series(f.path(), &ColumnSpec::default()).unwrap_err() {
            IngestError::MalformedRow { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn parse_accepts_offset_annotations() {
        let f = write_csv(
            "timestamp,energy_mwh\n\
             2011-10-30T02:00:00+02:00,10.0\n\
             2011-10-30T02:00:00+01:00,14.0\n",
        );
        let s = parse_series(f.path(), &ColumnSpec::default()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.samples[0].utc_offset_minutes, Some(120));
    }

    #[test]
    fn downsample_sums_quarters() {
        let out = downsample_quarter_hourly(&quarter_series(&[10.0, 10.0, 10.0, 10.0])).unwrap();
        assert_eq!(out.series.samples[0].value, 40.0);

        let out = downsample_quarter_hourly(&quarter_series(&[0.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(out.series.samples[0].value, 0.0);
    }

    // Frozen from the hand-summed oracle: 1 + 2 + 3 + 4 = 10.
    #[test]
    fn downsample_hand_summed() {
        let values = [1.0, 2.0, 3.0, 4.0];
        let expected: f64 = values.iter().sum();
        let out = downsample_quarter_hourly(&quarter_series(&values)).unwrap();
        assert_eq!(out.series.samples[0].value, expected);
        assert_eq!(expected, 10.0);
    }

    #[test]
    fn downsample_truncates_partial_hour_with_warning() {
        let out = downsample_quarter_hourly(&quarter_series(&[1.0, 2.0, 3.0, 4.0, 5.0])).unwrap();
        assert_eq!(out.series.len(), 1);
        assert!(out.warnings.iter().any(|w| w.contains("trailing")));
    }

    #[test]
    fn downsample_conserves_energy() {
        let values: Vec<f64> = (0..96).map(|i| quantize_volume_mwh(7.25 + 0.37 * i as f64)).collect();
        let series = quarter_series(&values);
        let out = downsample_quarter_hourly(&series).unwrap();
        // dyadic lattice values: both sums are exact, equality is bitwise
        assert_eq!(out.series.sum(), series.sum());
    }

    #[test]
    fn downsample_interpolates_short_gap() {
        let start = ts("2011-06-01T00:00:00");
        let mut samples: Vec<Sample> = (0..8)
            .map(|i| Sample {
                timestamp: start + Duration::minutes(15 * i),
                utc_offset_minutes: None,
                value: 8.0,
            })
            .collect();
        samples.remove(5); // one missing quarter inside the second hour
        let series = RawSeries { name: "gap".into(), resolution_minutes: 15, samples };
        let out = downsample_quarter_hourly(&series).unwrap();
        assert_eq!(out.series.len(), 2);
        assert_eq!(out.series.samples[1].value, 32.0);
        assert!(out.warnings.iter().any(|w| w.contains("interpolated")));
    }

    #[test]
    fn downsample_rejects_long_gap() {
        let start = ts("2011-06-01T00:00:00");
        let mut samples: Vec<Sample> = (0..12)
            .map(|i| Sample {
                timestamp: start + Duration::minutes(15 * i),
                utc_offset_minutes: None,
                value: 8.0,
            })
            .collect();
        samples.drain(4..8);
        let series = RawSeries { name: "gap".into(), resolution_minutes: 15, samples };
        assert!(matches!(
            downsample_quarter_hourly(&series),
            Err(IngestError::GapTooLong { .. })
        ));
    }

    // Frozen from the independent factor computation: 561.3 / 500 = 1.1226.
    #[test]
    fn rescale_uniform_factor() {
        let series = quarter_series(&[100.0, 150.0, 125.0, 125.0]);
        let sum = series.sum();
        assert_eq!(sum, 500.0);
        let target = 561.3;
        let expected_factor = target / sum;
        assert_relative_eq!(expected_factor, 1.1226, max_relative = 1e-12);

        let rescaled = rescale_to_annual_total(&series, target).unwrap();
        assert_relative_eq!(rescaled.sum(), target, max_relative = 1e-9);
        for (a, b) in rescaled.samples.iter().zip(series.samples.iter()) {
            assert_relative_eq!(a.value, b.value * expected_factor, max_relative = 1e-9);
        }
    }

    #[test]
    fn rescale_identity_when_target_equals_sum() {
        let series = quarter_series(&[100.0, 150.0, 125.0, 125.0]);
        let rescaled = rescale_to_annual_total(&series, series.sum()).unwrap();
        assert_eq!(rescaled, series);
    }

    #[test]
    fn rescale_rejects_zero_sum() {
        let series = quarter_series(&[0.0, 0.0]);
        assert!(matches!(
            rescale_to_annual_total(&series, 100.0),
            Err(IngestError::ZeroSumSeries)
        ));
    }

    fn hourly_year(year: i32) -> Vec<Sample> {
        let start = NaiveDate::from_ymd_opt(year, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let hours = if year % 4 == 0 { 8784 } else { 8760 };
        (0..hours)
            .map(|i| Sample {
                timestamp: start + Duration::hours(i),
                utc_offset_minutes: None,
                value: 100.0,
            })
            .collect()
    }

    #[test]
    fn normalize_dst_clean_year_unchanged() {
        let series = RawSeries { name: "load".into(), resolution_minutes: 60, samples: hourly_year(2011) };
        let out = normalize_dst(&series).unwrap();
        assert_eq!(out.series.len(), 8760);
        assert!(out.warnings.is_empty());
        assert_eq!(out.series, series);
    }

    #[test]
    fn normalize_dst_repairs_both_anomalies() {
        let mut samples = hourly_year(2011);
        // spring forward: drop 2011-03-27 02:00, leaving a 2h civil gap
        let spring = ts("2011-03-27T02:00:00");
        let spring_idx = samples.iter().position(|s| s.timestamp == spring).unwrap();
        samples[spring_idx - 1].value = 8.0;
        samples[spring_idx + 1].value = 12.0;
        samples.remove(spring_idx);
        // fall back: duplicate 2011-10-30 02:00 with readings 10 and 14
        let fall = ts("2011-10-30T02:00:00");
        let fall_idx = samples.iter().position(|s| s.timestamp == fall).unwrap();
        samples[fall_idx].value = 10.0;
        samples.insert(
            fall_idx + 1,
            Sample { timestamp: fall, utc_offset_minutes: None, value: 14.0 },
        );
        let series = RawSeries { name: "load".into(), resolution_minutes: 60, samples };

        let out = normalize_dst(&series).unwrap();
        assert_eq!(out.series.len(), 8760);
        let filled = out.series.samples.iter().find(|s| s.timestamp == spring).unwrap();
        assert_eq!(filled.value, 10.0); // midpoint of 8 and 12
        let merged = out.series.samples.iter().find(|s| s.timestamp == fall).unwrap();
        assert_eq!(merged.value, 12.0); // mean of 10 and 14
        assert_eq!(out.warnings.len(), 2);
    }

    #[test]
    fn normalize_dst_rejects_more_than_two_anomalies() {
        let mut samples = hourly_year(2011);
        for stamp in ["2011-02-01T02:00:00", "2011-05-01T02:00:00", "2011-08-01T02:00:00"] {
            let t = ts(stamp);
            let idx = samples.iter().position(|s| s.timestamp == t).unwrap();
            samples.remove(idx);
        }
        let series = RawSeries { name: "load".into(), resolution_minutes: 60, samples };
        assert!(matches!(
            normalize_dst(&series),
            Err(IngestError::TooManyDstAnomalies { .. })
        ));
    }

    #[test]
    fn normalize_dst_rejects_partial_year() {
        let samples: Vec<Sample> = hourly_year(2011).into_iter().take(100).collect();
        let series = RawSeries { name: "load".into(), resolution_minutes: 60, samples };
        assert!(matches!(normalize_dst(&series), Err(IngestError::NotAFullYear { got: 100 })));
    }
}
