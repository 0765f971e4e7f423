//! Volume-share metrics, histograms, and price statistics.
//!
//! All reductions use compensated (Neumaier) summation so that partitioned /
//! merged evaluation orders agree to well below 1e-12 relative.

use chrono::{DateTime, Datelike, Timelike, Utc, Weekday};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("input series are empty")]
    Empty,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("negative weight {0}")]
    NegativeWeight(f64),
    #[error("total weight is zero")]
    ZeroTotalWeight,
    #[error("bin width {0} is not strictly positive")]
    NonPositiveBinWidth(f64),
    #[error("no peak hours in range")]
    NoPeakHours,
}

/// Neumaier-compensated sum; deterministic for a given iteration order and
/// accurate enough that partition-and-merge orders agree to ~1 ulp.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Hourly ratio series between two labelled volume series.
#[derive(Debug, Clone)]
pub struct ShareSeries {
    pub ratios: Vec<f64>,
    pub numerator_label: String,
    pub denominator_label: String,
    /// Hours where the ratio exceeds 1; physically possible for some pairs
    /// and surfaced rather than clipped.
    pub over_unity_hours: usize,
}

impl ShareSeries {
    pub fn new(
        numerator: &[f64],
        denominator: &[f64],
        numerator_label: &str,
        denominator_label: &str,
    ) -> Result<Self, StatsError> {
        if numerator.len() != denominator.len() {
            return Err(StatsError::LengthMismatch {
                left: numerator.len(),
                right: denominator.len(),
            });
        }
        let ratios: Vec<f64> = numerator
            .iter()
            .zip(denominator)
            .map(|(n, d)| n / d)
            .collect();
        let over_unity_hours = ratios.iter().filter(|r| **r > 1.0).count();
        Ok(Self {
            ratios,
            numerator_label: numerator_label.to_string(),
            denominator_label: denominator_label.to_string(),
            over_unity_hours,
        })
    }
}

/// Weighted mean Σ(ratio·weight) / Σ(weight).
pub fn volume_weighted_mean(ratios: &[f64], weights_mwh: &[f64]) -> Result<f64, StatsError> {
    if ratios.is_empty() {
        return Err(StatsError::Empty);
    }
    if ratios.len() != weights_mwh.len() {
        return Err(StatsError::LengthMismatch {
            left: ratios.len(),
            right: weights_mwh.len(),
        });
    }
    if let Some(w) = weights_mwh.iter().find(|w| **w < 0.0) {
        return Err(StatsError::NegativeWeight(*w));
    }
    let total = compensated_sum(weights_mwh.iter().copied());
    if !(total > 0.0) {
        return Err(StatsError::ZeroTotalWeight);
    }
    let weighted = compensated_sum(ratios.iter().zip(weights_mwh).map(|(r, w)| r * w));
    Ok(weighted / total)
}

/// One histogram bin over ratio space: `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub hour_count: u64,
}

/// Histogram of hourly ratios with fixed-width bins anchored at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub bins: Vec<HistogramBin>,
    /// Hours dropped because the denominator was zero (flagged, not counted).
    pub excluded_hours: u64,
}

impl Histogram {
    pub fn total_hours(&self) -> u64 {
        self.bins.iter().map(|b| b.hour_count).sum()
    }
}

/// Bin the per-hour ratio numerator/denominator into `[k·w, (k+1)·w)` bins.
/// Zero-denominator hours are excluded and reported on the histogram.
pub fn share_histogram(
    numerator: &[f64],
    denominator: &[f64],
    bin_width: f64,
) -> Result<Histogram, StatsError> {
    if numerator.is_empty() {
        return Err(StatsError::Empty);
    }
    if numerator.len() != denominator.len() {
        return Err(StatsError::LengthMismatch {
            left: numerator.len(),
            right: denominator.len(),
        });
    }
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(StatsError::NonPositiveBinWidth(bin_width));
    }
    let mut counts: Vec<u64> = Vec::new();
    let mut excluded = 0u64;
    for (n, d) in numerator.iter().zip(denominator) {
        if *d <= 0.0 {
            excluded += 1;
            continue;
        }
        let ratio = n / d;
        // nudge ratios sitting on a decimal bin edge into the upper bin,
        // where exact arithmetic would place them
        let k = (ratio / bin_width + 1e-9).floor();
        if k < 0.0 {
            excluded += 1;
            continue;
        }
        let k = k as usize;
        if counts.len() <= k {
            counts.resize(k + 1, 0);
        }
        counts[k] += 1;
    }
    // For round decimal widths, derive edges by division so they print as
    // the exact decimals (7/20 = 0.35, not 7 * 0.05 = 0.35000000000000003).
    let inv = (1.0 / bin_width).round();
    let decimal_edges = inv.is_finite() && inv > 0.0 && (inv * bin_width - 1.0).abs() < 1e-9;
    let edge = |k: usize| {
        if decimal_edges {
            k as f64 / inv
        } else {
            k as f64 * bin_width
        }
    };
    let bins = counts
        .iter()
        .enumerate()
        .map(|(k, &hour_count)| HistogramBin {
            lo: edge(k),
            hi: edge(k + 1),
            hour_count,
        })
        .collect();
    Ok(Histogram {
        bin_width,
        bins,
        excluded_hours: excluded,
    })
}

/// Price moments of an hourly series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceStats {
    pub mean_eur_mwh: f64,
    /// Population standard deviation (divisor N); at 8,760 hours the sample
    /// variant differs by well under 0.01%.
    pub std_eur_mwh: f64,
    pub min_eur_mwh: f64,
    pub max_eur_mwh: f64,
    /// Strictly negative hours.
    pub negative_hour_count: u64,
}

/// One-pass (Welford) mean/std plus extrema and the negative-hour count.
pub fn price_stats(prices_eur_mwh: &[f64]) -> Result<PriceStats, StatsError> {
    if prices_eur_mwh.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut negative = 0u64;
    for (i, &p) in prices_eur_mwh.iter().enumerate() {
        let n = (i + 1) as f64;
        let delta = p - mean;
        mean += delta / n;
        m2 += delta * (p - mean);
        min = min.min(p);
        max = max.max(p);
        if p < 0.0 {
            negative += 1;
        }
    }
    Ok(PriceStats {
        mean_eur_mwh: mean,
        std_eur_mwh: (m2 / prices_eur_mwh.len() as f64).sqrt(),
        min_eur_mwh: min,
        max_eur_mwh: max,
        negative_hour_count: negative,
    })
}

/// Peak window: 08:00–20:00 on Monday–Friday (the exchange peak convention;
/// the timestamps are taken as local standard time).
pub fn is_peak_hour(hour_start: &DateTime<Utc>) -> bool {
    let weekday = matches!(
        hour_start.weekday(),
        Weekday::Mon | Weekday::Tue | Weekday::Wed | Weekday::Thu | Weekday::Fri
    );
    weekday && (8..20).contains(&hour_start.hour())
}

/// mean(peak-hour prices) − mean(all-hour prices).
pub fn peak_base_spread(
    prices_eur_mwh: &[f64],
    hours: &[DateTime<Utc>],
) -> Result<f64, StatsError> {
    if prices_eur_mwh.is_empty() {
        return Err(StatsError::Empty);
    }
    if prices_eur_mwh.len() != hours.len() {
        return Err(StatsError::LengthMismatch {
            left: prices_eur_mwh.len(),
            right: hours.len(),
        });
    }
    let peak: Vec<f64> = prices_eur_mwh
        .iter()
        .zip(hours)
        .filter(|(_, h)| is_peak_hour(h))
        .map(|(p, _)| *p)
        .collect();
    if peak.is_empty() {
        return Err(StatsError::NoPeakHours);
    }
    let peak_mean = compensated_sum(peak.iter().copied()) / peak.len() as f64;
    let all_mean = compensated_sum(prices_eur_mwh.iter().copied()) / prices_eur_mwh.len() as f64;
    Ok(peak_mean - all_mean)
}

/// Per-scenario, per-year report row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct YearlyReport {
    pub year: i32,
    pub vw_mean_share: f64,
    pub min_share: f64,
    pub max_share: f64,
    pub mean_price_eur_mwh: f64,
    pub std_price_eur_mwh: f64,
    pub negative_hour_count: u64,
    pub peak_base_spread_eur_mwh: f64,
    pub histogram: Histogram,
}

impl YearlyReport {
    pub fn build(
        year: i32,
        share: &ShareSeries,
        share_weights_mwh: &[f64],
        prices_eur_mwh: &[f64],
        hours: &[DateTime<Utc>],
        bin_width: f64,
    ) -> Result<Self, StatsError> {
        let vw_mean_share = volume_weighted_mean(&share.ratios, share_weights_mwh)?;
        let min_share = share.ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let max_share = share.ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let numerators: Vec<f64> = share
            .ratios
            .iter()
            .zip(share_weights_mwh)
            .map(|(r, w)| r * w)
            .collect();
        let histogram = share_histogram(&numerators, share_weights_mwh, bin_width)?;
        let price = price_stats(prices_eur_mwh)?;
        let spread = peak_base_spread(prices_eur_mwh, hours)?;
        Ok(Self {
            year,
            vw_mean_share,
            min_share,
            max_share,
            mean_price_eur_mwh: price.mean_eur_mwh,
            std_price_eur_mwh: price.std_eur_mwh,
            negative_hour_count: price.negative_hour_count,
            peak_base_spread_eur_mwh: spread,
            histogram,
        })
    }
}
