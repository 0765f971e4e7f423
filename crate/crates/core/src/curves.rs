//! Aggregated hourly bid (demand) and ask (supply) curves.
//!
//! A curve is a monotone piecewise price–volume function stored as points of
//! cumulative volume: supply prices are non-decreasing with volume, demand
//! prices non-increasing. Two evaluation modes exist: `linear` interpolates
//! between points the way hourly-auction settlement curves are drawn, `step`
//! treats every block as all-or-nothing at its limit price. The exchange's
//! exact rule is not public, so both are kept and compared in reports.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exchange bid price floor, EUR/MWh.
pub const DEFAULT_PRICE_FLOOR_EUR: f64 = -3000.0;
/// Exchange bid price cap, EUR/MWh.
pub const DEFAULT_PRICE_CAP_EUR: f64 = 3000.0;
/// Default cap on the number of points a canonical curve may hold.
pub const DEFAULT_MAX_CURVE_POINTS: usize = 10_000;

const VOLUME_LATTICE: f64 = 1_048_576.0; // 2^20 steps per MWh

/// Snap an energy volume to the dyadic 2^-20 MWh lattice.
///
/// Sums and differences of lattice volumes below ~8.6e9 MWh are exact in f64,
/// which is what makes curve surgery (strip + reinsert) reproduce the original
/// curve bit-for-bit and keeps downsampling energy-conserving.
pub fn quantize_volume_mwh(volume_mwh: f64) -> f64 {
    (volume_mwh * VOLUME_LATTICE).round() / VOLUME_LATTICE
}

/// Market side of an auction curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Supply,
    Demand,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Supply => write!(f, "supply"),
            Side::Demand => write!(f, "demand"),
        }
    }
}

impl std::str::FromStr for Side {
    type Err = CurveError;

    fn from_str(s: &str) -> Result<Self, CurveError> {
        match s {
            "supply" => Ok(Side::Supply),
            "demand" => Ok(Side::Demand),
            other => Err(CurveError::UnknownSide(other.to_string())),
        }
    }
}

/// Price interpolation mode used when evaluating a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveMode {
    Linear,
    Step,
}

impl std::fmt::Display for CurveMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveMode::Linear => write!(f, "linear"),
            CurveMode::Step => write!(f, "step"),
        }
    }
}

impl std::str::FromStr for CurveMode {
    type Err = CurveError;

    fn from_str(s: &str) -> Result<Self, CurveError> {
        match s {
            "linear" => Ok(CurveMode::Linear),
            "step" => Ok(CurveMode::Step),
            other => Err(CurveError::UnknownMode(other.to_string())),
        }
    }
}

/// Exchange price bounds; ±3000 EUR/MWh on the market modelled here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceBounds {
    pub floor_eur_mwh: f64,
    pub cap_eur_mwh: f64,
}

impl Default for PriceBounds {
    fn default() -> Self {
        Self {
            floor_eur_mwh: DEFAULT_PRICE_FLOOR_EUR,
            cap_eur_mwh: DEFAULT_PRICE_CAP_EUR,
        }
    }
}

impl PriceBounds {
    pub fn contains(&self, price_eur_mwh: f64) -> bool {
        price_eur_mwh.is_finite()
            && price_eur_mwh >= self.floor_eur_mwh
            && price_eur_mwh <= self.cap_eur_mwh
    }
}

/// One point of a canonical curve: cumulative volume offered/sought up to
/// (and including) this limit price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub price_eur_mwh: f64,
    pub cumulative_volume_mwh: f64,
}

/// Average supply-curve slope over a cumulative-volume window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeMetric {
    /// dP/dV in EUR/MWh per MWh.
    pub dpdv_eur_per_mwh2: f64,
    /// The (lo, hi) cumulative-volume window the slope was taken over.
    pub window_mwh: (f64, f64),
}

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("empty bid list")]
    EmptyBidList,
    #[error("bid price {0} EUR/MWh outside exchange bounds")]
    OutOfBoundsPrice(f64),
    #[error("bid volume {0} MWh is not strictly positive")]
    NonPositiveVolume(f64),
    #[error("curve would hold {got} points, cap is {cap}")]
    TooManyPoints { got: usize, cap: usize },
    #[error("cumulative volume must be strictly increasing at point {0}")]
    NonIncreasingVolume(usize),
    #[error("price ordering violates {side} monotonicity at point {index}")]
    NonMonotonePrice { side: Side, index: usize },
    #[error("volume scale factor {0} is not strictly positive")]
    NonPositiveScale(f64),
    #[error("slope window ({lo}, {hi}) MWh is degenerate")]
    DegenerateWindow { lo: f64, hi: f64 },
    #[error("volume {volume} MWh outside curve range [0, {total}]")]
    VolumeOutOfRange { volume: f64, total: f64 },
    #[error("unknown curve side '{0}'")]
    UnknownSide(String),
    #[error("unknown curve mode '{0}'")]
    UnknownMode(String),
}

/// Canonical aggregated auction curve for one market side.
///
/// Invariants, enforced at construction: at least one point, cumulative
/// volumes strictly increasing, prices within bounds and strictly monotone in
/// the side's direction (equal-price blocks are merged).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionCurve {
    side: Side,
    mode: CurveMode,
    points: Vec<CurvePoint>,
}

impl AuctionCurve {
    /// Canonicalize a list of `(price, block volume)` bids into a curve:
    /// sort (supply ascending, demand descending by price), merge equal-price
    /// blocks, accumulate volumes.
    pub fn from_blocks(
        side: Side,
        mode: CurveMode,
        blocks: &[(f64, f64)],
    ) -> Result<Self, CurveError> {
        Self::from_blocks_with(side, mode, blocks, &PriceBounds::default(), DEFAULT_MAX_CURVE_POINTS)
    }

    pub fn from_blocks_with(
        side: Side,
        mode: CurveMode,
        blocks: &[(f64, f64)],
        bounds: &PriceBounds,
        max_points: usize,
    ) -> Result<Self, CurveError> {
        if blocks.is_empty() {
            return Err(CurveError::EmptyBidList);
        }
        for &(price, volume) in blocks {
            if !bounds.contains(price) {
                return Err(CurveError::OutOfBoundsPrice(price));
            }
            if !(volume > 0.0) || !volume.is_finite() {
                return Err(CurveError::NonPositiveVolume(volume));
            }
        }

        let mut sorted: Vec<(f64, f64)> = blocks.to_vec();
        match side {
            Side::Supply => sorted.sort_by(|a, b| a.0.total_cmp(&b.0)),
            Side::Demand => sorted.sort_by(|a, b| b.0.total_cmp(&a.0)),
        }

        let mut points: Vec<CurvePoint> = Vec::with_capacity(sorted.len());
        let mut cumulative = 0.0;
        for (price, volume) in sorted {
            cumulative += volume;
            match points.last_mut() {
                Some(last) if last.price_eur_mwh == price => {
                    last.cumulative_volume_mwh = cumulative;
                }
                _ => points.push(CurvePoint {
                    price_eur_mwh: price,
                    cumulative_volume_mwh: cumulative,
                }),
            }
        }
        if points.len() > max_points {
            return Err(CurveError::TooManyPoints {
                got: points.len(),
                cap: max_points,
            });
        }
        Ok(Self { side, mode, points })
    }

    /// Build a curve directly from canonical points (cumulative volumes).
    ///
    /// Unlike [`AuctionCurve::from_blocks`] this allows a first point with
    /// zero cumulative volume, which is how strictly linear curves such as
    /// `D(p) = 100 - p` are expressed.
    pub fn from_points(
        side: Side,
        mode: CurveMode,
        points: Vec<CurvePoint>,
    ) -> Result<Self, CurveError> {
        Self::from_points_with(side, mode, points, &PriceBounds::default(), DEFAULT_MAX_CURVE_POINTS)
    }

    pub fn from_points_with(
        side: Side,
        mode: CurveMode,
        points: Vec<CurvePoint>,
        bounds: &PriceBounds,
        max_points: usize,
    ) -> Result<Self, CurveError> {
        if points.is_empty() {
            return Err(CurveError::EmptyBidList);
        }
        if points.len() > max_points {
            return Err(CurveError::TooManyPoints {
                got: points.len(),
                cap: max_points,
            });
        }
        for (i, p) in points.iter().enumerate() {
            if !bounds.contains(p.price_eur_mwh) {
                return Err(CurveError::OutOfBoundsPrice(p.price_eur_mwh));
            }
            if !(p.cumulative_volume_mwh >= 0.0) || !p.cumulative_volume_mwh.is_finite() {
                return Err(CurveError::NonPositiveVolume(p.cumulative_volume_mwh));
            }
            if i > 0 {
                if p.cumulative_volume_mwh <= points[i - 1].cumulative_volume_mwh {
                    return Err(CurveError::NonIncreasingVolume(i));
                }
                let price_ok = match side {
                    Side::Supply => p.price_eur_mwh > points[i - 1].price_eur_mwh,
                    Side::Demand => p.price_eur_mwh < points[i - 1].price_eur_mwh,
                };
                if !price_ok {
                    return Err(CurveError::NonMonotonePrice { side, index: i });
                }
            }
        }
        Ok(Self { side, mode, points })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn mode(&self) -> CurveMode {
        self.mode
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total volume of the curve (last cumulative point).
    pub fn total_volume_mwh(&self) -> f64 {
        self.points.last().map(|p| p.cumulative_volume_mwh).unwrap_or(0.0)
    }

    /// The implied `(price, block volume)` list; zero-volume leading points
    /// are dropped. Rebuilding from these blocks reproduces the curve (exactly
    /// so when volumes sit on the 2^-20 MWh lattice).
    pub fn blocks(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.points.len());
        let mut prev = 0.0;
        for p in &self.points {
            let volume = p.cumulative_volume_mwh - prev;
            if volume > 0.0 {
                out.push((p.price_eur_mwh, volume));
            }
            prev = p.cumulative_volume_mwh;
        }
        out
    }

    /// Volume available at price `p`: for supply the maximal volume offered at
    /// price ≤ p, for demand the maximal volume sought at price ≥ p. Linear
    /// mode interpolates between points; beyond the last point the value
    /// saturates at the total volume.
    pub fn volume_at_price(&self, price_eur_mwh: f64) -> f64 {
        self.volume_interval_at_price(price_eur_mwh).1
    }

    /// `(lo, hi)` volume bracket at a price. The bracket is non-degenerate
    /// only where a block is marginal: in step mode at any block price, in
    /// linear mode at the curve's first point (the opening vertical segment).
    /// Clearing uses the bracket to settle partial acceptance of the marginal
    /// block; everywhere else `lo == hi == volume_at_price`.
    pub fn volume_interval_at_price(&self, price: f64) -> (f64, f64) {
        match (self.mode, self.side) {
            (CurveMode::Step, Side::Supply) => {
                let le = self.points.partition_point(|pt| pt.price_eur_mwh <= price);
                let lt = self.points.partition_point(|pt| pt.price_eur_mwh < price);
                (self.cum_at(lt), self.cum_at(le))
            }
            (CurveMode::Step, Side::Demand) => {
                let ge = self.points.partition_point(|pt| pt.price_eur_mwh >= price);
                let gt = self.points.partition_point(|pt| pt.price_eur_mwh > price);
                (self.cum_at(gt), self.cum_at(ge))
            }
            (CurveMode::Linear, Side::Supply) => {
                let first = self.points[0];
                if price < first.price_eur_mwh {
                    (0.0, 0.0)
                } else if price == first.price_eur_mwh {
                    (0.0, first.cumulative_volume_mwh)
                } else {
                    let v = self.linear_supply_volume(price);
                    (v, v)
                }
            }
            (CurveMode::Linear, Side::Demand) => {
                let first = self.points[0];
                if price > first.price_eur_mwh {
                    (0.0, 0.0)
                } else if price == first.price_eur_mwh {
                    (0.0, first.cumulative_volume_mwh)
                } else {
                    let v = self.linear_demand_volume(price);
                    (v, v)
                }
            }
        }
    }

    fn cum_at(&self, count: usize) -> f64 {
        if count == 0 {
            0.0
        } else {
            self.points[count - 1].cumulative_volume_mwh
        }
    }

    // price strictly above the first point; prices strictly increasing
    fn linear_supply_volume(&self, price: f64) -> f64 {
        let n = self.points.len();
        if price >= self.points[n - 1].price_eur_mwh {
            return self.points[n - 1].cumulative_volume_mwh;
        }
        // last index with price_i <= price; price < last point's price
        let idx = self.points.partition_point(|pt| pt.price_eur_mwh <= price) - 1;
        let a = self.points[idx];
        let b = self.points[idx + 1];
        let t = (price - a.price_eur_mwh) / (b.price_eur_mwh - a.price_eur_mwh);
        a.cumulative_volume_mwh + t * (b.cumulative_volume_mwh - a.cumulative_volume_mwh)
    }

    // price strictly below the first point; prices strictly decreasing
    fn linear_demand_volume(&self, price: f64) -> f64 {
        let n = self.points.len();
        if price <= self.points[n - 1].price_eur_mwh {
            return self.points[n - 1].cumulative_volume_mwh;
        }
        let idx = self.points.partition_point(|pt| pt.price_eur_mwh >= price) - 1;
        let a = self.points[idx];
        let b = self.points[idx + 1];
        let t = (a.price_eur_mwh - price) / (a.price_eur_mwh - b.price_eur_mwh);
        a.cumulative_volume_mwh + t * (b.cumulative_volume_mwh - a.cumulative_volume_mwh)
    }

    /// Price at cumulative volume `v` (inverse of the curve seen in the
    /// volume–price plane). Volumes up to the first point sit at the first
    /// point's price; step mode yields the staircase price of the block the
    /// volume falls into.
    pub fn price_at_volume(&self, volume_mwh: f64) -> Result<f64, CurveError> {
        let total = self.total_volume_mwh();
        if !(0.0..=total).contains(&volume_mwh) {
            return Err(CurveError::VolumeOutOfRange {
                volume: volume_mwh,
                total,
            });
        }
        if volume_mwh <= self.points[0].cumulative_volume_mwh {
            return Ok(self.points[0].price_eur_mwh);
        }
        // first index with cumulative volume >= v; v > first point's volume
        let idx = self
            .points
            .partition_point(|pt| pt.cumulative_volume_mwh < volume_mwh);
        let a = self.points[idx - 1];
        let b = self.points[idx];
        match self.mode {
            CurveMode::Step => Ok(b.price_eur_mwh),
            CurveMode::Linear => {
                let t = (volume_mwh - a.cumulative_volume_mwh)
                    / (b.cumulative_volume_mwh - a.cumulative_volume_mwh);
                Ok(a.price_eur_mwh + t * (b.price_eur_mwh - a.price_eur_mwh))
            }
        }
    }

    /// Multiply every cumulative volume by `k`, prices unchanged.
    pub fn scale_volume(&self, k: f64) -> Result<Self, CurveError> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(CurveError::NonPositiveScale(k));
        }
        let points = self
            .points
            .iter()
            .map(|p| CurvePoint {
                price_eur_mwh: p.price_eur_mwh,
                cumulative_volume_mwh: p.cumulative_volume_mwh * k,
            })
            .collect();
        Ok(Self {
            side: self.side,
            mode: self.mode,
            points,
        })
    }

    /// Average slope dP/dV over a cumulative-volume window, via inverse
    /// interpolation at the window ends.
    pub fn average_slope(&self, window_mwh: (f64, f64)) -> Result<SlopeMetric, CurveError> {
        let (lo, hi) = window_mwh;
        if !(hi > lo) {
            return Err(CurveError::DegenerateWindow { lo, hi });
        }
        let p_lo = self.price_at_volume(lo)?;
        let p_hi = self.price_at_volume(hi)?;
        Ok(SlopeMetric {
            dpdv_eur_per_mwh2: (p_hi - p_lo) / (hi - lo),
            window_mwh,
        })
    }

    /// All point prices, in storage order.
    pub(crate) fn prices(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.price_eur_mwh)
    }
}
