//! Counterfactual repricing of subsidized wind/PV supply.
//!
//! Feed-in-tariff volume enters the day-ahead auction at the -3000 EUR/MWh
//! floor so its settlement is guaranteed. The scenario engine removes that
//! volume from the cheap end of the ask curve, reinserts it at parametric
//! marginal costs, optionally enlarges the traded pool with OTC volume on
//! both sides, and re-clears every hour. The demand curve is never modified.

use rayon::prelude::*;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::clearing::{clear_with_bounds, ClearingError, ClearingResult};
use crate::curves::{
    quantize_volume_mwh, AuctionCurve, CurveError, CurveMode, PriceBounds, Side,
};
use crate::ingest::HourlyMarketRecord;
use crate::stats::price_stats;

/// Marginal cost assumption for a technology: either the floor sentinel
/// (still fully subsidized, bid at -3000) or a fixed cost in EUR/MWh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResCost {
    Floor,
    Fixed(f64),
}

impl ResCost {
    pub fn price_eur_mwh(&self, bounds: &PriceBounds) -> f64 {
        match self {
            ResCost::Floor => bounds.floor_eur_mwh,
            ResCost::Fixed(c) => *c,
        }
    }

    pub fn is_floor(&self) -> bool {
        matches!(self, ResCost::Floor)
    }
}

impl std::fmt::Display for ResCost {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResCost::Floor => write!(f, "floor"),
            ResCost::Fixed(c) => write!(f, "{c}"),
        }
    }
}

impl std::str::FromStr for ResCost {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, ScenarioError> {
        if s.eq_ignore_ascii_case("floor") {
            return Ok(ResCost::Floor);
        }
        let c: f64 = s
            .parse()
            .map_err(|_| ScenarioError::BadCost(s.to_string()))?;
        if !(0.0..=3000.0).contains(&c) {
            return Err(ScenarioError::CostOutOfRange(c));
        }
        Ok(ResCost::Fixed(c))
    }
}

impl Serialize for ResCost {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ResCost::Floor => serializer.serialize_str("floor"),
            ResCost::Fixed(c) => serializer.serialize_f64(*c),
        }
    }
}

impl<'de> Deserialize<'de> for ResCost {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Tag(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(c) => {
                if !(0.0..=3000.0).contains(&c) {
                    return Err(D::Error::custom(format!(
                        "marginal cost {c} outside [0, 3000] EUR/MWh"
                    )));
                }
                Ok(ResCost::Fixed(c))
            }
            Repr::Tag(s) if s.eq_ignore_ascii_case("floor") => Ok(ResCost::Floor),
            Repr::Tag(s) => Err(D::Error::custom(format!("unknown cost '{s}'"))),
        }
    }
}

/// Which technologies are settled at marginal cost; the other stays at the
/// floor (still subsidized).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ScenarioMode {
    Baseline,
    WindOnly,
    PvOnly,
    Both,
}

impl std::fmt::Display for ScenarioMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ScenarioMode::Baseline => "baseline",
            ScenarioMode::WindOnly => "windOnly",
            ScenarioMode::PvOnly => "pvOnly",
            ScenarioMode::Both => "both",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for ScenarioMode {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, ScenarioError> {
        match s {
            "baseline" => Ok(ScenarioMode::Baseline),
            "windOnly" | "wind-only" | "wind_only" => Ok(ScenarioMode::WindOnly),
            "pvOnly" | "pv-only" | "pv_only" => Ok(ScenarioMode::PvOnly),
            "both" => Ok(ScenarioMode::Both),
            other => Err(ScenarioError::UnknownMode(other.to_string())),
        }
    }
}

/// One OTC price band for pool expansion: a share of the added volume offered
/// at a price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtcBand {
    pub price_eur_mwh: f64,
    pub volume_share: f64,
}

/// Default stylized conventional OTC stack used when a pool-expansion run
/// does not configure its own bands.
pub fn default_otc_bands() -> Vec<OtcBand> {
    vec![
        OtcBand { price_eur_mwh: 5.0, volume_share: 0.2 },
        OtcBand { price_eur_mwh: 25.0, volume_share: 0.5 },
        OtcBand { price_eur_mwh: 45.0, volume_share: 0.3 },
    ]
}

/// Full scenario description. JSON keys: `c_wind`, `c_pv`, `mode`,
/// `pool_multiplier`, `otc_bands`; the floor sentinel is the string "floor".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub c_wind: ResCost,
    pub c_pv: ResCost,
    pub mode: ScenarioMode,
    #[serde(default = "one")]
    pub pool_multiplier: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub otc_bands: Option<Vec<OtcBand>>,
}

fn one() -> f64 {
    1.0
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::baseline()
    }
}

impl ScenarioConfig {
    pub fn baseline() -> Self {
        Self {
            c_wind: ResCost::Floor,
            c_pv: ResCost::Floor,
            mode: ScenarioMode::Baseline,
            pool_multiplier: 1.0,
            otc_bands: None,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.pool_multiplier >= 1.0) || !self.pool_multiplier.is_finite() {
            return Err(ScenarioError::BadPoolMultiplier(self.pool_multiplier));
        }
        if self.pool_multiplier > 1.0 {
            let bands = self
                .otc_bands
                .as_ref()
                .ok_or(ScenarioError::MissingOtcBands)?;
            let total: f64 = bands.iter().map(|b| b.volume_share).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(ScenarioError::OtcSharesNotUnit(total));
            }
            if bands.iter().any(|b| b.volume_share < 0.0) {
                return Err(ScenarioError::OtcSharesNotUnit(total));
            }
        }
        Ok(())
    }
}

/// Per-MWh marginal operation cost components of a variable RES unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalCostBreakdown {
    pub wear_tear_eur_mwh: f64,
    pub land_lease_eur_mwh: f64,
    pub concession_tax_eur_mwh: f64,
    pub forecast_error_eur_mwh: f64,
}

impl MarginalCostBreakdown {
    pub fn new(
        wear_tear: f64,
        land_lease: f64,
        concession_tax: f64,
        forecast_error: f64,
    ) -> Result<Self, ScenarioError> {
        for c in [wear_tear, land_lease, concession_tax, forecast_error] {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(ScenarioError::NegativeCostComponent(c));
            }
        }
        Ok(Self {
            wear_tear_eur_mwh: wear_tear,
            land_lease_eur_mwh: land_lease,
            concession_tax_eur_mwh: concession_tax,
            forecast_error_eur_mwh: forecast_error,
        })
    }

    /// Total marginal production cost: the sum of the four components.
    pub fn total_eur_mwh(&self) -> f64 {
        self.wear_tear_eur_mwh
            + self.land_lease_eur_mwh
            + self.concession_tax_eur_mwh
            + self.forecast_error_eur_mwh
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario mode '{0}'")]
    UnknownMode(String),
    #[error("cannot parse marginal cost '{0}'")]
    BadCost(String),
    #[error("marginal cost {0} outside [0, 3000] EUR/MWh")]
    CostOutOfRange(f64),
    #[error("negative cost component {0}")]
    NegativeCostComponent(f64),
    #[error("pool multiplier {0} must be >= 1")]
    BadPoolMultiplier(f64),
    #[error("pool multiplier > 1 requires otc_bands")]
    MissingOtcBands,
    #[error("otc band shares sum to {0}, expected 1")]
    OtcSharesNotUnit(f64),
    #[error("RES volume {res_mwh} MWh exceeds total supply {supply_mwh} MWh")]
    ResExceedsSupply { res_mwh: f64, supply_mwh: f64 },
    #[error("stripping {res_mwh} MWh would leave an empty supply curve")]
    StripEmptiesSupply { res_mwh: f64 },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Clearing(#[from] ClearingError),
    #[error("no records")]
    NoRecords,
    #[error("no costs given")]
    NoCosts,
}

/// Residual ask curve after removing RES volume, plus what was taken out.
#[derive(Debug, Clone)]
pub struct StripOutcome {
    pub residual: AuctionCurve,
    pub stripped_wind_mwh: f64,
    pub stripped_pv_mwh: f64,
    /// Volume that had to be removed above the floor because the floor
    /// segment was smaller than the RES feed-in (real aggregated curves are
    /// anonymous, so this is a data-quality signal, not an error).
    pub removed_above_floor_mwh: f64,
}

impl StripOutcome {
    pub fn warned(&self) -> bool {
        self.removed_above_floor_mwh > 0.0
    }
}

/// Remove `wind + pv` MWh from the lowest-priced end of the ask curve.
///
/// RES feed-in is assumed to occupy the cheapest supply volume (the floor
/// bids). If the floor segment is too small, removal walks up the merit order
/// and the overshoot is reported on the outcome.
pub fn strip_res_floor(
    supply: &AuctionCurve,
    wind_mwh: f64,
    pv_mwh: f64,
) -> Result<StripOutcome, ScenarioError> {
    strip_res_floor_with(supply, wind_mwh, pv_mwh, &PriceBounds::default())
}

pub fn strip_res_floor_with(
    supply: &AuctionCurve,
    wind_mwh: f64,
    pv_mwh: f64,
    bounds: &PriceBounds,
) -> Result<StripOutcome, ScenarioError> {
    let res = wind_mwh + pv_mwh;
    let total = supply.total_volume_mwh();
    if res > total {
        return Err(ScenarioError::ResExceedsSupply {
            res_mwh: res,
            supply_mwh: total,
        });
    }
    if res == 0.0 {
        return Ok(StripOutcome {
            residual: supply.clone(),
            stripped_wind_mwh: 0.0,
            stripped_pv_mwh: 0.0,
            removed_above_floor_mwh: 0.0,
        });
    }

    let mut remaining = res;
    let mut removed_above_floor = 0.0;
    let mut kept: Vec<(f64, f64)> = Vec::with_capacity(supply.len());
    for (price, volume) in supply.blocks() {
        if remaining <= 0.0 {
            kept.push((price, volume));
            continue;
        }
        let taken = volume.min(remaining);
        if price > bounds.floor_eur_mwh {
            removed_above_floor += taken;
        }
        remaining -= taken;
        let left = volume - taken;
        if left > 0.0 {
            kept.push((price, left));
        }
    }
    if kept.is_empty() {
        return Err(ScenarioError::StripEmptiesSupply { res_mwh: res });
    }
    let residual = AuctionCurve::from_blocks(Side::Supply, supply.mode(), &kept)?;
    Ok(StripOutcome {
        residual,
        stripped_wind_mwh: wind_mwh,
        stripped_pv_mwh: pv_mwh,
        removed_above_floor_mwh: removed_above_floor,
    })
}

/// Reinsert wind and PV blocks at their marginal-cost prices and
/// re-canonicalize. Inserting at the floor price undoes a floor strip
/// exactly, including bit-level volumes when they sit on the 2^-20 lattice.
pub fn reprice_res(
    residual: &AuctionCurve,
    wind_mwh: f64,
    c_wind_eur_mwh: f64,
    pv_mwh: f64,
    c_pv_eur_mwh: f64,
) -> Result<AuctionCurve, ScenarioError> {
    let mut blocks = residual.blocks();
    if wind_mwh > 0.0 {
        blocks.push((c_wind_eur_mwh, wind_mwh));
    }
    if pv_mwh > 0.0 {
        blocks.push((c_pv_eur_mwh, pv_mwh));
    }
    Ok(AuctionCurve::from_blocks(
        Side::Supply,
        residual.mode(),
        &blocks,
    )?)
}

/// Enlarge the traded pool: `(multiplier - 1) x cleared volume` of additional
/// OTC supply is offered across the price bands, matched by a price-inelastic
/// demand block at the cap. A multiplier of exactly 1 returns the record
/// unchanged.
pub fn apply_pool_expansion(
    record: &HourlyMarketRecord,
    pool_multiplier: f64,
    otc_bands: Option<&[OtcBand]>,
) -> Result<HourlyMarketRecord, ScenarioError> {
    if !(pool_multiplier >= 1.0) || !pool_multiplier.is_finite() {
        return Err(ScenarioError::BadPoolMultiplier(pool_multiplier));
    }
    if pool_multiplier == 1.0 {
        return Ok(record.clone());
    }
    let bands = otc_bands.ok_or(ScenarioError::MissingOtcBands)?;
    let share_total: f64 = bands.iter().map(|b| b.volume_share).sum();
    if (share_total - 1.0).abs() > 1e-9 || bands.iter().any(|b| b.volume_share < 0.0) {
        return Err(ScenarioError::OtcSharesNotUnit(share_total));
    }

    let v_add = (pool_multiplier - 1.0) * record.cleared_volume_mwh;
    let mut supply_blocks = record.supply_curve.blocks();
    let mut added_total = 0.0;
    for band in bands {
        let volume = quantize_volume_mwh(band.volume_share * v_add);
        if volume > 0.0 {
            supply_blocks.push((band.price_eur_mwh, volume));
            added_total += volume;
        }
    }
    let mut demand_blocks = record.demand_curve.blocks();
    if added_total > 0.0 {
        demand_blocks.push((DEFAULT_CAP_FOR_POOL, added_total));
    }

    let supply = AuctionCurve::from_blocks(Side::Supply, record.supply_curve.mode(), &supply_blocks)?;
    let demand = AuctionCurve::from_blocks(Side::Demand, record.demand_curve.mode(), &demand_blocks)?;
    Ok(HourlyMarketRecord {
        demand_curve: demand,
        supply_curve: supply,
        ..record.clone()
    })
}

const DEFAULT_CAP_FOR_POOL: f64 = crate::curves::DEFAULT_PRICE_CAP_EUR;

/// Outcome of one scenario hour; errors are collected, not fatal.
pub type HourOutcome = Result<ClearingResult, ScenarioError>;

/// A scenario evaluated over a year of records.
#[derive(Debug)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub hours: Vec<chrono::DateTime<chrono::Utc>>,
    pub outcomes: Vec<HourOutcome>,
    /// Hours where stripping had to reach above the floor segment.
    pub strip_warnings: usize,
}

impl ScenarioRun {
    /// Prices of all successfully settled hours, in input order.
    pub fn prices(&self) -> Vec<f64> {
        self.outcomes
            .iter()
            .filter_map(|o| o.as_ref().ok().map(|r| r.price_eur_mwh))
            .collect()
    }

    pub fn results(&self) -> Vec<&ClearingResult> {
        self.outcomes.iter().filter_map(|o| o.as_ref().ok()).collect()
    }

    pub fn error_count(&self) -> usize {
        self.outcomes.iter().filter(|o| o.is_err()).count()
    }
}

fn scenario_hour(
    record: &HourlyMarketRecord,
    config: &ScenarioConfig,
    bounds: &PriceBounds,
) -> Result<(ClearingResult, bool), ScenarioError> {
    let expanded;
    let record = if config.pool_multiplier > 1.0 {
        expanded = apply_pool_expansion(
            record,
            config.pool_multiplier,
            config.otc_bands.as_deref(),
        )?;
        &expanded
    } else {
        record
    };

    let (wind, pv) = match config.mode {
        ScenarioMode::Baseline => (0.0, 0.0),
        ScenarioMode::WindOnly => (record.wind_mwh, 0.0),
        ScenarioMode::PvOnly => (0.0, record.pv_mwh),
        ScenarioMode::Both => (record.wind_mwh, record.pv_mwh),
    };

    let (result, warned) = if wind == 0.0 && pv == 0.0 {
        (
            clear_with_bounds(&record.demand_curve, &record.supply_curve, bounds)?,
            false,
        )
    } else {
        let stripped = strip_res_floor_with(&record.supply_curve, wind, pv, bounds)?;
        let supply = reprice_res(
            &stripped.residual,
            wind,
            config.c_wind.price_eur_mwh(bounds),
            pv,
            config.c_pv.price_eur_mwh(bounds),
        )?;
        (
            clear_with_bounds(&record.demand_curve, &supply, bounds)?,
            stripped.warned(),
        )
    };
    Ok((result, warned))
}

/// Re-clear every hour of a year under a scenario. Hours are independent and
/// evaluated in parallel; the output order always matches the input order.
pub fn run_scenario(
    records: &[HourlyMarketRecord],
    config: &ScenarioConfig,
) -> Result<ScenarioRun, ScenarioError> {
    run_scenario_with(records, config, &PriceBounds::default())
}

pub fn run_scenario_with(
    records: &[HourlyMarketRecord],
    config: &ScenarioConfig,
    bounds: &PriceBounds,
) -> Result<ScenarioRun, ScenarioError> {
    if records.is_empty() {
        return Err(ScenarioError::NoRecords);
    }
    config.validate()?;
    let per_hour: Vec<Result<(ClearingResult, bool), ScenarioError>> = records
        .par_iter()
        .map(|r| scenario_hour(r, config, bounds))
        .collect();

    let mut outcomes = Vec::with_capacity(per_hour.len());
    let mut strip_warnings = 0usize;
    for h in per_hour {
        match h {
            Ok((result, warned)) => {
                if warned {
                    strip_warnings += 1;
                }
                outcomes.push(Ok(result));
            }
            Err(e) => outcomes.push(Err(e)),
        }
    }
    Ok(ScenarioRun {
        config: config.clone(),
        hours: records.iter().map(|r| r.hour_start).collect(),
        outcomes,
        strip_warnings,
    })
}

/// One sweep row: a marginal-cost assumption and the per-year price moments.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub cost: ResCost,
    /// (year, mean, population std) triples, ascending by year.
    pub by_year: Vec<(i32, f64, f64)>,
}

/// Sensitivity table over marginal-cost assumptions, one scenario run per
/// cost, rows in input cost order, columns the years present in the corpus.
#[derive(Debug, Clone)]
pub struct SweepTable {
    pub mode: ScenarioMode,
    pub years: Vec<i32>,
    pub rows: Vec<SweepRow>,
}

pub fn sensitivity_sweep(
    records: &[HourlyMarketRecord],
    costs: &[ResCost],
    mode: ScenarioMode,
) -> Result<SweepTable, ScenarioError> {
    sensitivity_sweep_with(records, costs, mode, &PriceBounds::default())
}

pub fn sensitivity_sweep_with(
    records: &[HourlyMarketRecord],
    costs: &[ResCost],
    mode: ScenarioMode,
    bounds: &PriceBounds,
) -> Result<SweepTable, ScenarioError> {
    if costs.is_empty() {
        return Err(ScenarioError::NoCosts);
    }
    if records.is_empty() {
        return Err(ScenarioError::NoRecords);
    }
    use chrono::Datelike;
    let mut years: Vec<i32> = records.iter().map(|r| r.hour_start.year()).collect();
    years.sort_unstable();
    years.dedup();

    let mut rows = Vec::with_capacity(costs.len());
    for &cost in costs {
        let config = ScenarioConfig {
            c_wind: if matches!(mode, ScenarioMode::WindOnly | ScenarioMode::Both) {
                cost
            } else {
                ResCost::Floor
            },
            c_pv: if matches!(mode, ScenarioMode::PvOnly | ScenarioMode::Both) {
                cost
            } else {
                ResCost::Floor
            },
            mode: if cost.is_floor() { ScenarioMode::Baseline } else { mode },
            pool_multiplier: 1.0,
            otc_bands: None,
        };
        let run = run_scenario_with(records, &config, bounds)?;
        let mut by_year = Vec::with_capacity(years.len());
        for &year in &years {
            let prices: Vec<f64> = run
                .outcomes
                .iter()
                .zip(records)
                .filter(|(o, r)| o.is_ok() && r.hour_start.year() == year)
                .map(|(o, _)| o.as_ref().unwrap().price_eur_mwh)
                .collect();
            let stats = price_stats(&prices).map_err(|_| ScenarioError::NoRecords)?;
            by_year.push((year, stats.mean_eur_mwh, stats.std_eur_mwh));
        }
        rows.push(SweepRow { cost, by_year });
    }
    Ok(SweepTable { mode, years, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clearing::{clear, ClearingStatus};
    use chrono::{TimeZone, Utc};

    fn supply(blocks: &[(f64, f64)]) -> AuctionCurve {
        AuctionCurve::from_blocks(Side::Supply, CurveMode::Linear, blocks).unwrap()
    }

    fn demand(blocks: &[(f64, f64)]) -> AuctionCurve {
        AuctionCurve::from_blocks(Side::Demand, CurveMode::Linear, blocks).unwrap()
    }

    fn record(
        wind: f64,
        pv: f64,
        demand_blocks: &[(f64, f64)],
        supply_blocks: &[(f64, f64)],
    ) -> HourlyMarketRecord {
        let supply_curve = supply(supply_blocks);
        let demand_curve = demand(demand_blocks);
        let cleared = clear(&demand_curve, &supply_curve).unwrap();
        HourlyMarketRecord {
            hour_start: Utc.with_ymd_and_hms(2011, 1, 1, 0, 0, 0).unwrap(),
            load_mwh: 200.0,
            wind_mwh: wind,
            pv_mwh: pv,
            cleared_volume_mwh: cleared.volume_mwh,
            realized_price_eur_mwh: cleared.price_eur_mwh,
            demand_curve,
            supply_curve,
        }
    }

    #[test]
    fn total_marginal_cost_sums_components() {
        assert_eq!(MarginalCostBreakdown::new(0.0, 0.0, 0.0, 0.0).unwrap().total_eur_mwh(), 0.0);
        // wear & tear at the published OECD median of 17 EUR/MWh for onshore
        // wind, plus stylized lease and forecast components
        assert_eq!(MarginalCostBreakdown::new(17.0, 3.0, 0.0, 5.0).unwrap().total_eur_mwh(), 25.0);
        assert_eq!(MarginalCostBreakdown::new(0.0, 0.0, 10.0, 0.0).unwrap().total_eur_mwh(), 10.0);
        assert!(MarginalCostBreakdown::new(-1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn strip_exact_floor_match() {
        // points are cumulative: blocks are 40 MWh at the floor, 60 at 10
        let s = AuctionCurve::from_points(
            Side::Supply,
            CurveMode::Linear,
            vec![
                crate::curves::CurvePoint { price_eur_mwh: -3000.0, cumulative_volume_mwh: 40.0 },
                crate::curves::CurvePoint { price_eur_mwh: 10.0, cumulative_volume_mwh: 100.0 },
            ],
        )
        .unwrap();
        let out = strip_res_floor(&s, 30.0, 10.0).unwrap();
        assert!(!out.warned());
        assert_eq!(out.residual.points().len(), 1);
        assert_eq!(out.residual.points()[0].price_eur_mwh, 10.0);
        assert_eq!(out.residual.points()[0].cumulative_volume_mwh, 60.0);
    }

    #[test]
    fn strip_nothing_is_identity() {
        let s = supply(&[(-3000.0, 40.0), (10.0, 60.0)]);
        let out = strip_res_floor(&s, 0.0, 0.0).unwrap();
        assert_eq!(out.residual, s);
    }

    // Hand-walked removal into the 0 EUR block: cumulative points (-3000, 20)
    // and (0, 50) are blocks of 20 and 30 MWh; stripping 30 consumes the
    // whole floor block plus 10 above it, leaving (0, 20) and a warning. The
    // residual total honors "reduced by exactly wind + pv": 50 - 30 = 20.
    #[test]
    fn strip_walks_past_floor_with_warning() {
        let s = AuctionCurve::from_points(
            Side::Supply,
            CurveMode::Linear,
            vec![
                crate::curves::CurvePoint { price_eur_mwh: -3000.0, cumulative_volume_mwh: 20.0 },
                crate::curves::CurvePoint { price_eur_mwh: 0.0, cumulative_volume_mwh: 50.0 },
            ],
        )
        .unwrap();
        let out = strip_res_floor(&s, 25.0, 5.0).unwrap();
        assert!(out.warned());
        assert_eq!(out.removed_above_floor_mwh, 10.0);
        assert_eq!(out.residual.points().len(), 1);
        assert_eq!(out.residual.points()[0].price_eur_mwh, 0.0);
        assert_eq!(out.residual.total_volume_mwh(), 20.0);
    }

    #[test]
    fn strip_rejects_res_above_total() {
        let s = supply(&[(-3000.0, 40.0)]);
        assert!(matches!(
            strip_res_floor(&s, 50.0, 0.0),
            Err(ScenarioError::ResExceedsSupply { .. })
        ));
    }

    #[test]
    fn reprice_at_floor_is_identity() {
        let s = supply(&[(-3000.0, 40.0), (10.0, 60.0)]);
        let out = strip_res_floor(&s, 30.0, 10.0).unwrap();
        let back = reprice_res(&out.residual, 30.0, -3000.0, 10.0, -3000.0).unwrap();
        assert_eq!(back, s);
        let d = demand(&[(3000.0, 80.0)]);
        assert_eq!(clear(&d, &back).unwrap(), clear(&d, &s).unwrap());
    }

    #[test]
    fn reprice_inserts_merged_block() {
        let residual = supply(&[(10.0, 60.0)]);
        let repriced = reprice_res(&residual, 30.0, 25.0, 10.0, 25.0).unwrap();
        assert_eq!(repriced.points().len(), 2);
        assert_eq!(repriced.points()[1].price_eur_mwh, 25.0);
        assert_eq!(repriced.points()[1].cumulative_volume_mwh, 100.0);
    }

    #[test]
    fn reprice_orders_cheaper_pv_first() {
        let residual = supply(&[(10.0, 60.0)]);
        let repriced = reprice_res(&residual, 30.0, 25.0, 10.0, 20.0).unwrap();
        let prices: Vec<f64> = repriced.points().iter().map(|p| p.price_eur_mwh).collect();
        assert_eq!(prices, vec![10.0, 20.0, 25.0]);
    }

    #[test]
    fn pool_multiplier_one_is_identity() {
        let r = record(10.0, 5.0, &[(3000.0, 70.0), (50.0, 50.0)], &[(-3000.0, 15.0), (20.0, 100.0)]);
        let same = apply_pool_expansion(&r, 1.0, None).unwrap();
        assert_eq!(same, r);
    }

    #[test]
    fn pool_expansion_adds_volume_both_sides() {
        let r = record(0.0, 0.0, &[(3000.0, 100.0)], &[(10.0, 100.0)]);
        assert_eq!(r.cleared_volume_mwh, 100.0);
        let bands = [OtcBand { price_eur_mwh: 30.0, volume_share: 1.0 }];
        let out = apply_pool_expansion(&r, 2.0, Some(&bands)).unwrap();
        assert_eq!(out.supply_curve.total_volume_mwh(), 200.0);
        assert_eq!(out.demand_curve.total_volume_mwh(), 200.0);
        assert_eq!(out.supply_curve.volume_at_price(30.0), 200.0);
        assert_eq!(out.supply_curve.volume_at_price(10.0), 100.0);
    }

    #[test]
    fn pool_expansion_requires_bands() {
        let r = record(0.0, 0.0, &[(3000.0, 100.0)], &[(10.0, 100.0)]);
        assert!(matches!(
            apply_pool_expansion(&r, 2.0, None),
            Err(ScenarioError::MissingOtcBands)
        ));
    }

    fn year_records() -> Vec<HourlyMarketRecord> {
        // a small deterministic set with varying wind/pv
        (0..48)
            .map(|i| {
                let wind = (i % 5) as f64 * 8.0;
                let pv = if i % 24 >= 8 && i % 24 < 16 { 12.0 } else { 0.0 };
                let res = wind + pv;
                let mut r = record(
                    wind,
                    pv,
                    &[(3000.0, 70.0), (60.0, 30.0), (-100.0, 20.0)],
                    &[(8.0, 40.0), (30.0, 40.0), (80.0, 40.0)],
                );
                if res > 0.0 {
                    let mut blocks = r.supply_curve.blocks();
                    blocks.push((-3000.0, res));
                    r.supply_curve =
                        AuctionCurve::from_blocks(Side::Supply, CurveMode::Linear, &blocks).unwrap();
                    let cleared = clear(&r.demand_curve, &r.supply_curve).unwrap();
                    r.cleared_volume_mwh = cleared.volume_mwh;
                    r.realized_price_eur_mwh = cleared.price_eur_mwh;
                }
                r.hour_start = Utc.with_ymd_and_hms(2011, 1, 1, 0, 0, 0).unwrap()
                    + chrono::Duration::hours(i);
                r
            })
            .collect()
    }

    #[test]
    fn baseline_scenario_equals_plain_clearing() {
        let records = year_records();
        let run = run_scenario(&records, &ScenarioConfig::baseline()).unwrap();
        assert_eq!(run.error_count(), 0);
        for (outcome, record) in run.outcomes.iter().zip(&records) {
            let direct = clear(&record.demand_curve, &record.supply_curve).unwrap();
            assert_eq!(*outcome.as_ref().unwrap(), direct);
        }
    }

    #[test]
    fn floor_reinsertion_equals_baseline() {
        let records = year_records();
        let baseline = run_scenario(&records, &ScenarioConfig::baseline()).unwrap();
        let floored = run_scenario(
            &records,
            &ScenarioConfig {
                c_wind: ResCost::Floor,
                c_pv: ResCost::Floor,
                mode: ScenarioMode::Both,
                pool_multiplier: 1.0,
                otc_bands: None,
            },
        )
        .unwrap();
        for (a, b) in baseline.outcomes.iter().zip(&floored.outcomes) {
            let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
            assert_eq!(a.price_eur_mwh.to_bits(), b.price_eur_mwh.to_bits());
            assert_eq!(a.volume_mwh.to_bits(), b.volume_mwh.to_bits());
            assert_eq!(a.status, b.status);
        }
    }

    #[test]
    fn wind_only_leaves_windless_hours_unchanged() {
        let records = year_records();
        let baseline = run_scenario(&records, &ScenarioConfig::baseline()).unwrap();
        let run = run_scenario(
            &records,
            &ScenarioConfig {
                c_wind: ResCost::Fixed(25.0),
                c_pv: ResCost::Floor,
                mode: ScenarioMode::WindOnly,
                pool_multiplier: 1.0,
                otc_bands: None,
            },
        )
        .unwrap();
        for ((a, b), r) in baseline.outcomes.iter().zip(&run.outcomes).zip(&records) {
            if r.wind_mwh == 0.0 {
                assert_eq!(a.as_ref().unwrap(), b.as_ref().unwrap());
            }
        }
    }

    #[test]
    fn pv_only_leaves_night_hours_unchanged() {
        let records = year_records();
        let baseline = run_scenario(&records, &ScenarioConfig::baseline()).unwrap();
        let run = run_scenario(
            &records,
            &ScenarioConfig {
                c_wind: ResCost::Floor,
                c_pv: ResCost::Fixed(25.0),
                mode: ScenarioMode::PvOnly,
                pool_multiplier: 1.0,
                otc_bands: None,
            },
        )
        .unwrap();
        for ((a, b), r) in baseline.outcomes.iter().zip(&run.outcomes).zip(&records) {
            if r.pv_mwh == 0.0 {
                assert_eq!(a.as_ref().unwrap(), b.as_ref().unwrap());
            }
        }
    }

    #[test]
    fn sweep_mean_monotone_in_cost() {
        let records = year_records();
        let costs: Vec<ResCost> = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0]
            .iter()
            .map(|c| ResCost::Fixed(*c))
            .collect();
        let table = sensitivity_sweep(&records, &costs, ScenarioMode::Both).unwrap();
        for w in table.rows.windows(2) {
            for (a, b) in w[0].by_year.iter().zip(&w[1].by_year) {
                assert!(b.1 >= a.1 - 1e-9, "mean price fell from {} to {}", a.1, b.1);
            }
        }
    }

    #[test]
    fn sweep_floor_reproduces_baseline_stats() {
        let records = year_records();
        let table = sensitivity_sweep(&records, &[ResCost::Floor], ScenarioMode::Both).unwrap();
        let baseline = run_scenario(&records, &ScenarioConfig::baseline()).unwrap();
        let stats = price_stats(&baseline.prices()).unwrap();
        assert_eq!(table.rows[0].by_year[0].1, stats.mean_eur_mwh);
        assert_eq!(table.rows[0].by_year[0].2, stats.std_eur_mwh);
    }

    #[test]
    fn scenario_json_roundtrip_with_floor_sentinel() {
        let cfg = ScenarioConfig {
            c_wind: ResCost::Fixed(25.0),
            c_pv: ResCost::Floor,
            mode: ScenarioMode::WindOnly,
            pool_multiplier: 2.0,
            otc_bands: Some(default_otc_bands()),
        };
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"floor\""));
        assert!(json.contains("windOnly"));
        let back: ScenarioConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn ask_raise_monotonicity_on_example() {
        let d = demand(&[(3000.0, 50.0), (40.0, 50.0)]);
        let cheap = supply(&[(-3000.0, 30.0), (20.0, 70.0)]);
        let stripped = strip_res_floor(&cheap, 30.0, 0.0).unwrap();
        let costly = reprice_res(&stripped.residual, 30.0, 25.0, 0.0, 0.0).unwrap();
        let a = clear(&d, &cheap).unwrap();
        let b = clear(&d, &costly).unwrap();
        assert!(b.price_eur_mwh >= a.price_eur_mwh);
        assert!(b.volume_mwh <= a.volume_mwh + 1e-6);
        assert_eq!(a.status, ClearingStatus::Cleared);
    }
}
