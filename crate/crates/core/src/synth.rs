//! Seeded synthetic yearly corpora (load, wind, PV, bid/ask curves).
//!
//! The real exchange feeds are proprietary, so a ChaCha12-seeded generator
//! produces hourly records that exercise the same share statistics and
//! merit-order phenomenology at desk scale: load with daily, weekly, and
//! seasonal structure, wind as a bounded mean-reverting process, PV as a
//! clear-sky bell shaped by a solar-elevation model, supply as floor-priced
//! RES plus a conventional merit stack scaled to the spot market share, and
//! demand as an inelastic block at the cap plus a descending elastic tail
//! whose foot reaches below zero so negative clearings can occur. Realized
//! price and volume are what the clearing engine reports on the curves.
//!
//! All energies are snapped to the 2^-20 MWh lattice, and noise processes are
//! bounded and mean-reverting: the corpus tests market mechanics, not price
//! forecasting realism.

use chrono::{DateTime, Datelike, TimeZone, Timelike, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clearing::clear_with_bounds;
use crate::counterfactual::ScenarioError;
use crate::curves::{
    quantize_volume_mwh, AuctionCurve, CurveMode, PriceBounds, Side, DEFAULT_PRICE_CAP_EUR,
    DEFAULT_PRICE_FLOOR_EUR,
};
use crate::ingest::HourlyMarketRecord;
use crate::stats::volume_weighted_mean;

/// RNG algorithm identifier recorded in corpus metadata.
pub const RNG_ALGORITHM: &str = "chacha12";

/// One conventional technology block of the merit stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeritBlock {
    pub label: String,
    pub capacity_mw: f64,
    pub marginal_cost_eur_mwh: f64,
}

/// Generator parameters. The defaults are pre-calibrated to land the volume
/// shares near the reference values (day-ahead/load ~35.8 %, RES/load
/// ~15.6 %, RES/market ~45 %).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub seed: u64,
    pub year: i32,
    pub mean_load_mw: f64,
    /// Daily sinusoid amplitude as a fraction of mean load.
    pub load_daily_amp: f64,
    /// Seasonal sinusoid amplitude as a fraction of mean load.
    pub load_seasonal_amp: f64,
    pub wind_capacity_mw: f64,
    pub pv_capacity_mw: f64,
    /// AR(1) persistence of the hourly wind factor, in [0, 1).
    pub wind_persistence: f64,
    pub merit_stack: Vec<MeritBlock>,
    /// Fraction of traded demand that is price-elastic, in [0, 1].
    pub elastic_demand_share: f64,
    /// Fraction of load offered/sought on the spot market, in (0, 1].
    pub spot_market_share: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            seed: 42,
            year: 2011,
            mean_load_mw: 60_000.0,
            load_daily_amp: 0.12,
            load_seasonal_amp: 0.15,
            wind_capacity_mw: 21_000.0,
            pv_capacity_mw: 30_000.0,
            wind_persistence: 0.97,
            merit_stack: default_merit_stack(),
            elastic_demand_share: 0.30,
            spot_market_share: 0.385,
        }
    }
}

/// Stylized conventional fleet, cheapest first.
pub fn default_merit_stack() -> Vec<MeritBlock> {
    let stack = [
        ("nuclear", 12_000.0, 8.0),
        ("lignite", 20_000.0, 18.0),
        ("hard_coal", 25_000.0, 32.0),
        ("gas", 20_000.0, 55.0),
        ("oil_peaker", 10_000.0, 90.0),
    ];
    stack
        .iter()
        .map(|(label, capacity_mw, cost)| MeritBlock {
            label: label.to_string(),
            capacity_mw: *capacity_mw,
            marginal_cost_eur_mwh: *cost,
        })
        .collect()
}

impl SynthParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.mean_load_mw <= 0.0 {
            return Err(SynthError::BadParam("mean_load_mw must be positive"));
        }
        for (name, v) in [
            ("load_daily_amp", self.load_daily_amp),
            ("load_seasonal_amp", self.load_seasonal_amp),
            ("elastic_demand_share", self.elastic_demand_share),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SynthError::BadFraction { name, value: v });
            }
        }
        if !(0.0..1.0).contains(&self.wind_persistence) {
            return Err(SynthError::BadFraction {
                name: "wind_persistence",
                value: self.wind_persistence,
            });
        }
        if !(self.spot_market_share > 0.0 && self.spot_market_share <= 1.0) {
            return Err(SynthError::BadFraction {
                name: "spot_market_share",
                value: self.spot_market_share,
            });
        }
        if self.wind_capacity_mw < 0.0 || self.pv_capacity_mw < 0.0 {
            return Err(SynthError::BadParam("capacities must be non-negative"));
        }
        if self.merit_stack.is_empty() {
            return Err(SynthError::BadParam("merit stack must not be empty"));
        }
        if self
            .merit_stack
            .iter()
            .any(|b| b.capacity_mw < 0.0 || !(0.0..=3000.0).contains(&b.marginal_cost_eur_mwh))
        {
            return Err(SynthError::BadParam("merit stack block out of range"));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid parameter: {0}")]
    BadParam(&'static str),
    #[error("{name} = {value} is not a valid fraction")]
    BadFraction { name: &'static str, value: f64 },
    #[error("infeasible calibration at hour {hour}: supply {supply_mwh} MWh below inelastic demand {demand_mwh} MWh at the cap")]
    Infeasible {
        hour: DateTime<Utc>,
        supply_mwh: f64,
        demand_mwh: f64,
    },
    #[error("share target {name} = {value} is outside (0, 1)")]
    InfeasibleTarget { name: &'static str, value: f64 },
    #[error("calibration did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Elastic demand tail: (price range start, end, share of elastic volume,
/// number of blocks). The sub-zero foot is what lets high-RES hours clear
/// negative, mirroring floor-bid behaviour on the demand side.
const DEMAND_TAIL: [(f64, f64, f64, usize); 2] =
    [(150.0, 5.0, 0.72, 10), (-2.0, -320.0, 0.28, 6)];

/// Bounded AR(1) noise stream.
struct Ar1 {
    value: f64,
    mean: f64,
    rho: f64,
    sigma: f64,
    lo: f64,
    hi: f64,
}

impl Ar1 {
    fn new(mean: f64, rho: f64, sigma: f64, lo: f64, hi: f64) -> Self {
        Self { value: mean, mean, rho, sigma, lo, hi }
    }

    fn step(&mut self, rng: &mut ChaCha12Rng) -> f64 {
        // uniform innovation in [-1, 1]; bounded by construction, no tails
        let eps: f64 = rng.random::<f64>() * 2.0 - 1.0;
        self.value = self.rho * self.value + (1.0 - self.rho) * self.mean + self.sigma * eps;
        self.value = self.value.clamp(self.lo, self.hi);
        self.value
    }
}

/// Solar elevation sine for a mid-German latitude; positive during daylight.
fn solar_elevation_sin(day_of_year: f64, hour_of_day: f64) -> f64 {
    const LAT_RAD: f64 = 51.0 * std::f64::consts::PI / 180.0;
    let decl = (23.44f64).to_radians() * (2.0 * std::f64::consts::PI * (day_of_year - 81.0) / 365.25).sin();
    let hour_angle = (hour_of_day - 12.0) * 15.0_f64.to_radians();
    LAT_RAD.sin() * decl.sin() + LAT_RAD.cos() * decl.cos() * hour_angle.cos()
}

fn hours_in_year(year: i32) -> i64 {
    let start = Utc.with_ymd_and_hms(year, 1, 1, 0, 0, 0).unwrap();
    let end = Utc.with_ymd_and_hms(year + 1, 1, 1, 0, 0, 0).unwrap();
    (end - start).num_hours()
}

/// Generate one full synthetic year of hourly market records. Deterministic
/// for a fixed seed; the RNG algorithm is pinned (ChaCha12) so corpora do not
/// drift with library upgrades.
pub fn generate_year(params: &SynthParams, mode: CurveMode) -> Result<Vec<HourlyMarketRecord>, SynthError> {
    params.validate()?;
    let bounds = PriceBounds::default();
    let n_hours = hours_in_year(params.year);
    let start = Utc.with_ymd_and_hms(params.year, 1, 1, 0, 0, 0).unwrap();

    // independent streams so the three processes do not interleave draws
    let mut load_rng = ChaCha12Rng::seed_from_u64(params.seed);
    load_rng.set_stream(1);
    let mut wind_rng = ChaCha12Rng::seed_from_u64(params.seed);
    wind_rng.set_stream(2);
    let mut pv_rng = ChaCha12Rng::seed_from_u64(params.seed);
    pv_rng.set_stream(3);

    let mut load_noise = Ar1::new(0.0, 0.85, 0.012, -0.05, 0.05);
    // stationary sd ~ sigma / sqrt(1 - rho^2)
    let wind_sigma = 0.155 * (1.0 - params.wind_persistence.powi(2)).sqrt();
    let mut wind_factor = Ar1::new(0.32, params.wind_persistence, wind_sigma.max(1e-6), 0.02, 0.82);
    let mut cloud = Ar1::new(0.62, 0.90, 0.10, 0.12, 1.0);

    let mut records = Vec::with_capacity(n_hours as usize);
    for i in 0..n_hours {
        let hour_start = start + chrono::Duration::hours(i);
        let doy = hour_start.ordinal() as f64;
        let hod = hour_start.hour() as f64;
        let weekend = matches!(hour_start.weekday(), chrono::Weekday::Sat | chrono::Weekday::Sun);

        let daily = (2.0 * std::f64::consts::PI * (hod - 9.0) / 24.0).sin();
        let seasonal = (2.0 * std::f64::consts::PI * (doy - 15.0) / 365.25).cos();
        let weekly = if weekend { -0.10 } else { 0.0 };
        let shape = 1.0
            + params.load_daily_amp * daily
            + params.load_seasonal_amp * seasonal
            + weekly
            + load_noise.step(&mut load_rng);
        let load_mwh = quantize_volume_mwh((params.mean_load_mw * shape).max(0.0));

        let wind_mwh = quantize_volume_mwh(params.wind_capacity_mw * wind_factor.step(&mut wind_rng));

        let elevation = solar_elevation_sin(doy, hod);
        let cloud_factor = cloud.step(&mut pv_rng);
        let pv_mwh = if elevation > 0.0 {
            quantize_volume_mwh(params.pv_capacity_mw * elevation * cloud_factor)
        } else {
            0.0 // no production for solar-elevation-negative hours
        };

        let record = assemble_hour(params, mode, &bounds, hour_start, load_mwh, wind_mwh, pv_mwh)?;
        records.push(record);
    }
    Ok(records)
}

fn assemble_hour(
    params: &SynthParams,
    mode: CurveMode,
    bounds: &PriceBounds,
    hour_start: DateTime<Utc>,
    load_mwh: f64,
    wind_mwh: f64,
    pv_mwh: f64,
) -> Result<HourlyMarketRecord, SynthError> {
    // Supply: all RES at the floor, conventional stack scaled to the share of
    // conventional output offered on the exchange.
    let mut supply_blocks: Vec<(f64, f64)> = Vec::with_capacity(params.merit_stack.len() + 1);
    let res_mwh = wind_mwh + pv_mwh;
    if res_mwh > 0.0 {
        supply_blocks.push((DEFAULT_PRICE_FLOOR_EUR, res_mwh));
    }
    for block in &params.merit_stack {
        let volume = quantize_volume_mwh(block.capacity_mw * params.spot_market_share);
        if volume > 0.0 {
            supply_blocks.push((block.marginal_cost_eur_mwh, volume));
        }
    }

    // Demand: inelastic block at the cap plus the descending elastic tail.
    let traded_target = params.spot_market_share * load_mwh;
    let inelastic = quantize_volume_mwh((1.0 - params.elastic_demand_share) * traded_target);
    let mut demand_blocks: Vec<(f64, f64)> = Vec::new();
    if inelastic > 0.0 {
        demand_blocks.push((DEFAULT_PRICE_CAP_EUR, inelastic));
    }
    let elastic_total = params.elastic_demand_share * traded_target;
    for (p_hi, p_lo, share, blocks) in DEMAND_TAIL {
        let block_volume = quantize_volume_mwh(share * elastic_total / blocks as f64);
        if block_volume <= 0.0 {
            continue;
        }
        for b in 0..blocks {
            let t = b as f64 / (blocks.max(2) - 1) as f64;
            let price = p_hi + t * (p_lo - p_hi);
            demand_blocks.push((price, block_volume));
        }
    }

    let supply_curve = AuctionCurve::from_blocks(Side::Supply, mode, &supply_blocks)
        .map_err(ScenarioError::from)?;
    let demand_curve = AuctionCurve::from_blocks(Side::Demand, mode, &demand_blocks)
        .map_err(ScenarioError::from)?;

    let supply_total = supply_curve.total_volume_mwh();
    if supply_total < inelastic {
        return Err(SynthError::Infeasible {
            hour: hour_start,
            supply_mwh: supply_total,
            demand_mwh: inelastic,
        });
    }

    let cleared = clear_with_bounds(&demand_curve, &supply_curve, bounds)
        .map_err(ScenarioError::from)?;
    let record = HourlyMarketRecord {
        hour_start,
        load_mwh,
        wind_mwh,
        pv_mwh,
        cleared_volume_mwh: cleared.volume_mwh,
        realized_price_eur_mwh: cleared.price_eur_mwh,
        demand_curve,
        supply_curve,
    };
    Ok(record)
}

/// Volume-share calibration targets (volume-weighted means).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShareTargets {
    /// Cleared day-ahead volume over load.
    pub market_load: f64,
    /// Wind + PV feed-in over load.
    pub res_load: f64,
    /// Wind + PV feed-in over cleared volume.
    pub res_market: f64,
}

/// Reference share targets from the 2011 market-zone statistics.
impl Default for ShareTargets {
    fn default() -> Self {
        Self {
            market_load: 0.358,
            res_load: 0.156,
            res_market: 0.450,
        }
    }
}

/// Measured volume-weighted share means of a corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredShares {
    pub market_load: f64,
    pub res_load: f64,
    pub res_market: f64,
}

/// Measure the three headline shares of a corpus.
pub fn measure_shares(records: &[HourlyMarketRecord]) -> Result<MeasuredShares, SynthError> {
    let loads: Vec<f64> = records.iter().map(|r| r.load_mwh).collect();
    let cleared: Vec<f64> = records.iter().map(|r| r.cleared_volume_mwh).collect();
    let market_load_ratio: Vec<f64> = records
        .iter()
        .map(|r| r.cleared_volume_mwh / r.load_mwh)
        .collect();
    let res_load_ratio: Vec<f64> = records
        .iter()
        .map(|r| (r.wind_mwh + r.pv_mwh) / r.load_mwh)
        .collect();
    let res_market_ratio: Vec<f64> = records
        .iter()
        .map(|r| (r.wind_mwh + r.pv_mwh) / r.cleared_volume_mwh)
        .collect();
    let err = |_| SynthError::BadParam("cannot measure shares of an empty corpus");
    Ok(MeasuredShares {
        market_load: volume_weighted_mean(&market_load_ratio, &loads).map_err(err)?,
        res_load: volume_weighted_mean(&res_load_ratio, &loads).map_err(err)?,
        res_market: volume_weighted_mean(&res_market_ratio, &cleared).map_err(err)?,
    })
}

/// Iteratively rescale wind/PV capacities and the spot market share until the
/// measured volume-weighted shares are within `tolerance` of the targets.
pub fn calibrate(
    params: &SynthParams,
    targets: &ShareTargets,
    tolerance: f64,
) -> Result<(SynthParams, MeasuredShares), SynthError> {
    const MAX_ITERATIONS: usize = 100;
    for (name, value) in [
        ("market_load", targets.market_load),
        ("res_load", targets.res_load),
        ("res_market", targets.res_market),
    ] {
        if !(0.0 < value && value < 1.0) {
            return Err(SynthError::InfeasibleTarget { name, value });
        }
    }

    let mut current = params.clone();
    for _ in 0..MAX_ITERATIONS {
        let records = generate_year(&current, CurveMode::Linear)?;
        let measured = measure_shares(&records)?;
        let converged = (measured.market_load - targets.market_load).abs() <= tolerance
            && (measured.res_load - targets.res_load).abs() <= tolerance;
        if converged {
            return Ok((current, measured));
        }
        let market_gain = (targets.market_load / measured.market_load).clamp(0.5, 2.0);
        let res_gain = (targets.res_load / measured.res_load).clamp(0.5, 2.0);
        current.spot_market_share = (current.spot_market_share * market_gain).clamp(0.01, 0.98);
        current.wind_capacity_mw *= res_gain;
        current.pv_capacity_mw *= res_gain;
    }
    Err(SynthError::NoConvergence(MAX_ITERATIONS))
}
