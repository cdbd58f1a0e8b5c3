#![allow(dead_code)]

use prepay::curve::{SwapQuote, YieldCurve};
use prepay::mortgage::{MortgageKind, MortgageSpec};
use prepay::prepayment::CprModel;
use prepay::ias::{par_mortgage_rate, IasScenario};
use prepay::shortrate::{calibrate_hw, HullWhite, SwaptionQuote};

pub const QUOTES: [(u32, f64); 13] = [
    (1, -0.0027),
    (2, -0.0014),
    (3, 0.0002),
    (4, 0.0017),
    (5, 0.0031),
    (6, 0.0045),
    (7, 0.0057),
    (8, 0.0069),
    (9, 0.0079),
    (10, 0.008883),
    (12, 0.0105),
    (15, 0.0123),
    (20, 0.0138),
];

/// Counter-diagonal of the January 2018 EUR normal vol matrix, bps.
pub const COUNTER_DIAGONAL_VOLS: [(f64, f64, f64); 5] =
    [(1.0, 10.0, 46.31), (3.0, 7.0, 56.28), (5.0, 5.0, 61.98), (7.0, 3.0, 64.79), (9.0, 1.0, 64.89)];

pub fn quotes() -> Vec<SwapQuote> {
    QUOTES.iter().map(|&(m, r)| SwapQuote::annual(m, r)).collect()
}

pub fn curve() -> YieldCurve {
    YieldCurve::bootstrap(&quotes()).unwrap()
}

pub fn vol_quotes() -> Vec<SwaptionQuote> {
    COUNTER_DIAGONAL_VOLS.iter().map(|&(e, t, v)| SwaptionQuote::new(e, t, v * 1e-4).unwrap()).collect()
}

pub fn calibrated() -> HullWhite {
    calibrate_hw(&curve(), &vol_quotes()).unwrap().model
}

pub fn reference_model() -> HullWhite {
    HullWhite::new(0.264, 0.017, curve()).unwrap()
}

pub fn rational() -> CprModel {
    CprModel::rational(0.1, 0.0).unwrap()
}

pub fn sigmoid() -> CprModel {
    CprModel::logistic(0.06, 0.10, -200.0, 3.0).unwrap()
}

pub fn atm_rate(kind: MortgageKind) -> f64 {
    par_mortgage_rate(&curve(), kind, 10).unwrap()
}

pub fn scenario(kind: MortgageKind, cpr: CprModel, n_paths: usize, seed: u64) -> IasScenario {
    IasScenario {
        mortgage: MortgageSpec::new(kind, 1.0, atm_rate(kind), 10).unwrap(),
        cpr,
        zeta: 0.0,
        n_paths,
        seed,
    }
}
