//! Pricing and static hedging of mortgage prepayment risk.
//!
//! A mortgage portfolio is replicated by an index amortizing swap (IAS)
//! whose notional amortizes with a prepayment rate driven by the refinancing
//! incentive `K - kappa(t)`. Interest rates follow a Hull-White short-rate
//! model fitted to a bootstrapped discount curve. The crate then builds static
//! hedges out of co-terminal swaps and receiver swaptions and measures their
//! sensitivities by bump-and-reprice with common random numbers.
//!
//! Module map:
//!
//! - [`curve`]: discount curve, forward Libor and swap rates.
//! - [`shortrate`]: Hull-White bonds, exact path simulation, swaptions,
//!   floorlets, Bachelier conversion and calibration.
//! - [`mortgage`]: bullet and annuity schedules and the notional update.
//! - [`prepayment`]: CPR models and the loan-level binning/fitting pipeline.
//! - [`ias`]: deterministic and Monte Carlo IAS valuation.
//! - [`hedge`]: swap ladders, swaption grids and their calibration.
//! - [`greeks`]: Delta, Gamma and Vega profiles.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod error;
pub mod greeks;
pub mod hedge;
pub mod ias;
pub mod mortgage;
pub mod optim;
pub mod prepayment;
pub mod shortrate;

pub use error::{Error, Result};

/// One basis point.
pub const BP: f64 = 1e-4;
