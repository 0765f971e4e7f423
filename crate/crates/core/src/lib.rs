//! Day-ahead auction reconstruction toolkit.
//!
//! Rebuilds hourly clearing prices from aggregated bid/ask curves, reruns the
//! auction with wind/PV supply repriced from the exchange floor to parametric
//! marginal costs, expands the traded pool with OTC volume, and reports share
//! statistics, histograms, and price moments over yearly corpora. A seeded
//! synthetic generator stands in for the proprietary exchange feeds so the
//! whole pipeline is reproducible end to end.

pub mod clearing;
pub mod counterfactual;
pub mod curves;
pub mod ingest;
pub mod stats;
pub mod synth;

pub use clearing::{clear, clear_brute_force, ClearingResult, ClearingStatus};
pub use curves::{quantize_volume_mwh, AuctionCurve, CurveMode, CurvePoint, PriceBounds, Side, SlopeMetric};
