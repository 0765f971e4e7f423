//! Hourly market clearing: intersection of the demand and supply curves.
//!
//! The clearing price is located by an exact scan over the merged breakpoint
//! prices of both curves. Between breakpoints the excess demand is constant
//! (step mode) or linear (linear mode), so the crossing is solved in closed
//! form; no iterative root finding is involved and identical curves always
//! produce bit-identical results. A separate brute-force grid scan serves as
//! the verification oracle and never shares evaluation code with `clear`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{AuctionCurve, CurveMode, PriceBounds, Side};

/// Absolute tolerance on excess demand, MWh. Far below the 0.1 MWh exchange
/// lot size.
pub const EXCESS_DEMAND_TOL_MWH: f64 = 1e-6;

/// How an hour settled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClearingStatus {
    #[serde(rename = "cleared")]
    Cleared,
    #[serde(rename = "no-trade")]
    NoTrade,
    #[serde(rename = "boundary-floor")]
    BoundaryFloor,
    #[serde(rename = "boundary-cap")]
    BoundaryCap,
}

impl std::fmt::Display for ClearingStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ClearingStatus::Cleared => "cleared",
            ClearingStatus::NoTrade => "no-trade",
            ClearingStatus::BoundaryFloor => "boundary-floor",
            ClearingStatus::BoundaryCap => "boundary-cap",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for ClearingStatus {
    type Err = ClearingError;

    fn from_str(s: &str) -> Result<Self, ClearingError> {
        match s {
            "cleared" => Ok(ClearingStatus::Cleared),
            "no-trade" => Ok(ClearingStatus::NoTrade),
            "boundary-floor" => Ok(ClearingStatus::BoundaryFloor),
            "boundary-cap" => Ok(ClearingStatus::BoundaryCap),
            other => Err(ClearingError::UnknownStatus(other.to_string())),
        }
    }
}

/// Cleared price and volume for one hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClearingResult {
    pub price_eur_mwh: f64,
    pub volume_mwh: f64,
    pub status: ClearingStatus,
}

#[derive(Debug, Error)]
pub enum ClearingError {
    #[error("expected a demand curve on the demand side")]
    DemandSideMismatch,
    #[error("expected a supply curve on the supply side")]
    SupplySideMismatch,
    #[error("mixed interpolation modes: demand {demand}, supply {supply}")]
    MixedModes { demand: CurveMode, supply: CurveMode },
    #[error("price grid step {0} is not strictly positive")]
    NonPositiveGridStep(f64),
    #[error("unknown clearing status '{0}'")]
    UnknownStatus(String),
}

/// Signed excess demand at a price, settled against the volume brackets of
/// both curves: zero whenever partial acceptance of a marginal block can
/// balance the market at that price.
fn excess_demand(demand: &AuctionCurve, supply: &AuctionCurve, price: f64) -> f64 {
    let (d_lo, d_hi) = demand.volume_interval_at_price(price);
    let (s_lo, s_hi) = supply.volume_interval_at_price(price);
    if d_lo > s_hi {
        d_lo - s_hi
    } else if s_lo > d_hi {
        d_hi - s_lo
    } else {
        0.0
    }
}

fn validate(demand: &AuctionCurve, supply: &AuctionCurve) -> Result<(), ClearingError> {
    if demand.side() != Side::Demand {
        return Err(ClearingError::DemandSideMismatch);
    }
    if supply.side() != Side::Supply {
        return Err(ClearingError::SupplySideMismatch);
    }
    if demand.mode() != supply.mode() {
        return Err(ClearingError::MixedModes {
            demand: demand.mode(),
            supply: supply.mode(),
        });
    }
    Ok(())
}

/// Clear one hour with the default ±3000 EUR/MWh bounds.
pub fn clear(demand: &AuctionCurve, supply: &AuctionCurve) -> Result<ClearingResult, ClearingError> {
    clear_with_bounds(demand, supply, &PriceBounds::default())
}

/// Clear one hour.
///
/// The price p* satisfies excess demand zero (within tolerance) under the
/// curves' interpolation mode. A flat zero-excess interval bounded by a sign
/// change on both sides settles at its midpoint; an interval running into a
/// bound settles at its lowest price, which is also the brute-force oracle's
/// tie rule. Boundary congestion is reported as an explicit status rather
/// than silently clamped, so floor events stay distinguishable from interior
/// negative clearings.
pub fn clear_with_bounds(
    demand: &AuctionCurve,
    supply: &AuctionCurve,
    bounds: &PriceBounds,
) -> Result<ClearingResult, ClearingError> {
    validate(demand, supply)?;
    let tol = EXCESS_DEMAND_TOL_MWH;
    let floor = bounds.floor_eur_mwh;
    let cap = bounds.cap_eur_mwh;

    let mut breakpoints: Vec<f64> = Vec::with_capacity(demand.len() + supply.len() + 2);
    breakpoints.push(floor);
    breakpoints.extend(demand.prices().filter(|p| *p > floor && *p < cap));
    breakpoints.extend(supply.prices().filter(|p| *p > floor && *p < cap));
    breakpoints.push(cap);
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();

    let excess = |p: f64| excess_demand(demand, supply, p);
    let e_floor = excess(floor);
    let e_cap = excess(cap);
    // Demand holds no volume above the cap and supply none below the floor,
    // so the signed excess is always >= 0 at the floor and <= 0 at the cap.
    let has_pos = e_floor > tol;
    let has_neg = e_cap < -tol;

    // Lowest price with excess demand <= tol. The positive part of the excess
    // is right-continuous in both modes, so the infimum is attained either at
    // a breakpoint or at an in-segment linear root.
    let z_lo = if !has_pos {
        floor
    } else {
        let mut at = cap;
        let mut prev = floor;
        for &bp in breakpoints.iter().skip(1) {
            if excess(bp) <= tol {
                at = match demand.mode() {
                    CurveMode::Step => bp,
                    CurveMode::Linear => segment_root(&excess, prev, bp, tol),
                };
                break;
            }
            prev = bp;
        }
        at
    };

    // Highest price with excess demand >= -tol; the negative part is
    // left-continuous, mirroring the scan above.
    let z_hi = if !has_neg {
        cap
    } else {
        let mut at = floor;
        let mut prev = cap;
        for &bp in breakpoints.iter().rev().skip(1) {
            if excess(bp) >= -tol {
                at = match demand.mode() {
                    CurveMode::Step => bp,
                    CurveMode::Linear => segment_root(&excess, bp, prev, -tol),
                };
                break;
            }
            prev = bp;
        }
        at
    };

    let price = if has_pos && has_neg {
        0.5 * (z_lo + z_hi)
    } else {
        z_lo
    };

    let d_at = demand.volume_at_price(price);
    let s_at = supply.volume_at_price(price);
    let volume = d_at.min(s_at);

    let (status, volume) = if volume <= tol {
        (ClearingStatus::NoTrade, 0.0)
    } else if price == floor
        && supply.volume_at_price(floor) > demand.volume_at_price(floor) + tol
    {
        (ClearingStatus::BoundaryFloor, volume)
    } else if price == cap && demand.volume_at_price(cap) > supply.volume_at_price(cap) + tol {
        (ClearingStatus::BoundaryCap, volume)
    } else {
        (ClearingStatus::Cleared, volume)
    };

    Ok(ClearingResult {
        price_eur_mwh: price,
        volume_mwh: volume,
        status,
    })
}

/// Solve `excess(p) = target` inside the open segment (a, b), where the
/// excess is linear. Probes two interior points and extrapolates; the result
/// is clamped into [a, b] so jump discontinuities at either end degrade to the
/// attained endpoint.
fn segment_root(excess: &dyn Fn(f64) -> f64, a: f64, b: f64, target: f64) -> f64 {
    let third = (b - a) / 3.0;
    let m1 = a + third;
    let m2 = b - third;
    let e1 = excess(m1);
    let e2 = excess(m2);
    if e1 == e2 {
        return if e1 <= target { a } else { b };
    }
    let root = m1 + (target - e1) * (m2 - m1) / (e2 - e1);
    root.clamp(a, b)
}

/// Verification oracle: scan the price axis from floor to cap in `grid_step`
/// increments and return the price minimizing the absolute excess demand,
/// ties broken toward the lower price. Evaluation walks the raw block lists
/// directly and shares nothing with [`clear`].
pub fn clear_brute_force(
    demand: &AuctionCurve,
    supply: &AuctionCurve,
    grid_step_eur: f64,
) -> Result<ClearingResult, ClearingError> {
    clear_brute_force_with_bounds(demand, supply, grid_step_eur, &PriceBounds::default())
}

pub fn clear_brute_force_with_bounds(
    demand: &AuctionCurve,
    supply: &AuctionCurve,
    grid_step_eur: f64,
    bounds: &PriceBounds,
) -> Result<ClearingResult, ClearingError> {
    validate(demand, supply)?;
    if !(grid_step_eur > 0.0) || !grid_step_eur.is_finite() {
        return Err(ClearingError::NonPositiveGridStep(grid_step_eur));
    }
    let floor = bounds.floor_eur_mwh;
    let cap = bounds.cap_eur_mwh;
    let steps = ((cap - floor) / grid_step_eur).floor() as usize;

    // When the step is a round decimal, generate grid prices as n / (1/step)
    // so that decimal bid prices (the common case) are hit exactly.
    let inv = (1.0 / grid_step_eur).round();
    let decimal_grid = inv.is_finite() && inv > 0.0 && (inv * grid_step_eur - 1.0).abs() < 1e-9;
    let floor_ticks = (floor * inv).round();
    let grid_price = |k: usize| -> f64 {
        if k == steps {
            return cap;
        }
        if decimal_grid {
            (floor_ticks + k as f64) / inv
        } else {
            floor + k as f64 * grid_step_eur
        }
    };

    let supply_eval = BlockEval::new(supply);
    let demand_eval = BlockEval::new(demand);

    let tol = EXCESS_DEMAND_TOL_MWH;
    let mut best_k = 0usize;
    let mut best_gap = f64::INFINITY;
    for k in 0..=steps {
        let p = grid_price(k);
        let (s_lo, s_hi) = supply_eval.interval(p);
        let (d_lo, d_hi) = demand_eval.interval(p);
        let gap = (d_lo - s_hi).max(s_lo - d_hi).max(0.0);
        if gap < best_gap {
            best_gap = gap;
            best_k = k;
        }
    }

    let p = grid_price(best_k);
    let d_hi = demand_eval.interval(p).1;
    let s_hi = supply_eval.interval(p).1;
    let volume = d_hi.min(s_hi);
    let (status, volume) = if volume <= tol {
        (ClearingStatus::NoTrade, 0.0)
    } else if best_k == 0 && s_hi > d_hi + tol {
        (ClearingStatus::BoundaryFloor, volume)
    } else if best_k == steps && d_hi > s_hi + tol {
        (ClearingStatus::BoundaryCap, volume)
    } else {
        (ClearingStatus::Cleared, volume)
    };
    Ok(ClearingResult {
        price_eur_mwh: p,
        volume_mwh: volume,
        status,
    })
}

/// Oracle-side curve evaluation over the raw block list. Kept deliberately
/// separate from `AuctionCurve`'s own interpolation methods.
struct BlockEval {
    side: Side,
    mode: CurveMode,
    /// Blocks sorted ascending by price, with cumulative sums in that order.
    prices: Vec<f64>,
    ascending_cum: Vec<f64>,
    total: f64,
    /// Points in curve order, for linear interpolation.
    point_prices: Vec<f64>,
    point_cums: Vec<f64>,
}

impl BlockEval {
    fn new(curve: &AuctionCurve) -> Self {
        let mut blocks = curve.blocks();
        blocks.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut ascending_cum = Vec::with_capacity(blocks.len());
        let mut running = 0.0;
        for &(_, v) in &blocks {
            running += v;
            ascending_cum.push(running);
        }
        Self {
            side: curve.side(),
            mode: curve.mode(),
            prices: blocks.iter().map(|b| b.0).collect(),
            ascending_cum,
            total: running,
            point_prices: curve.points().iter().map(|p| p.price_eur_mwh).collect(),
            point_cums: curve
                .points()
                .iter()
                .map(|p| p.cumulative_volume_mwh)
                .collect(),
        }
    }

    fn cum_below(&self, count: usize) -> f64 {
        if count == 0 {
            0.0
        } else {
            self.ascending_cum[count - 1]
        }
    }

    fn interval(&self, price: f64) -> (f64, f64) {
        match (self.mode, self.side) {
            (CurveMode::Step, Side::Supply) => {
                let lt = self.prices.partition_point(|p| *p < price);
                let le = self.prices.partition_point(|p| *p <= price);
                (self.cum_below(lt), self.cum_below(le))
            }
            (CurveMode::Step, Side::Demand) => {
                let lt = self.prices.partition_point(|p| *p < price);
                let le = self.prices.partition_point(|p| *p <= price);
                (self.total - self.cum_below(le), self.total - self.cum_below(lt))
            }
            (CurveMode::Linear, _) => self.linear_interval(price),
        }
    }

    fn linear_interval(&self, price: f64) -> (f64, f64) {
        let pts = &self.point_prices;
        let cums = &self.point_cums;
        let n = pts.len();
        let first_price = pts[0];
        match self.side {
            Side::Supply => {
                if price < first_price {
                    (0.0, 0.0)
                } else if price == first_price {
                    (0.0, cums[0])
                } else if price >= pts[n - 1] {
                    (cums[n - 1], cums[n - 1])
                } else {
                    let mut i = 0;
                    while i + 1 < n && pts[i + 1] <= price {
                        i += 1;
                    }
                    let t = (price - pts[i]) / (pts[i + 1] - pts[i]);
                    let v = cums[i] + t * (cums[i + 1] - cums[i]);
                    (v, v)
                }
            }
            Side::Demand => {
                if price > first_price {
                    (0.0, 0.0)
                } else if price == first_price {
                    (0.0, cums[0])
                } else if price <= pts[n - 1] {
                    (cums[n - 1], cums[n - 1])
                } else {
                    let mut i = 0;
                    while i + 1 < n && pts[i + 1] >= price {
                        i += 1;
                    }
                    let t = (pts[i] - price) / (pts[i] - pts[i + 1]);
                    let v = cums[i] + t * (cums[i + 1] - cums[i]);
                    (v, v)
                }
            }
        }
    }
}
