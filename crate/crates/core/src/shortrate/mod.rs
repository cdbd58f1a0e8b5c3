//! Hull-White short-rate model: affine bonds, exact path simulation,
//! analytic swaptions and floorlets, normal-vol conversion and calibration.

mod bachelier;
mod calibration;
mod hull_white;
mod options;
mod simulation;

pub use bachelier::{bachelier_atm_price, bachelier_implied_vol, bachelier_implied_vol_strike, bachelier_price};
pub use calibration::{
    atm_terms, calibrate_eta, calibrate_hw, model_normal_vol, Calibration, SwaptionQuote,
    CALIBRATION_MAX_ITERATIONS, CALIBRATION_TOLERANCE,
};
pub use hull_white::HullWhite;
pub use options::{
    hw_floorlet_price, hw_swaption_price, receiver_swap_value_at, BondOptionKind, JamshidianSwaption,
    SwaptionKind,
};
pub use simulation::{simulate_paths, FactorPaths, PathSet, BLOCK_SIZE};

/// Counter-diagonal expiry/tenor pairs used for calibration.
pub const COUNTER_DIAGONAL_10Y: [(f64, f64); 5] = [(1.0, 10.0), (3.0, 7.0), (5.0, 5.0), (7.0, 3.0), (9.0, 1.0)];
