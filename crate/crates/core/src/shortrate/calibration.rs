//! Fitting `(lambda, eta)` to ATM normal swaption volatilities.

use serde::{Deserialize, Serialize};

use super::bachelier::bachelier_implied_vol;
use super::hull_white::HullWhite;
use super::options::{hw_swaption_price, SwaptionKind};
use crate::curve::YieldCurve;
use crate::error::{Error, Result};
use crate::optim::nelder_mead;

pub const CALIBRATION_TOLERANCE: f64 = 1e-10;
pub const CALIBRATION_MAX_ITERATIONS: usize = 2000;

/// ATM swaption quote with a normal volatility in decimals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwaptionQuote {
    pub expiry_years: f64,
    pub tenor_years: f64,
    pub normal_vol: f64,
}

impl SwaptionQuote {
    pub fn new(expiry_years: f64, tenor_years: f64, normal_vol: f64) -> Result<Self> {
        if !(expiry_years > 0.0 && tenor_years > 0.0) {
            return Err(Error::input(format!(
                "swaption quote {expiry_years}x{tenor_years} needs positive expiry and tenor"
            )));
        }
        if !(normal_vol >= 0.0 && normal_vol.is_finite()) {
            return Err(Error::input(format!("swaption vol {normal_vol} must be non-negative")));
        }
        Ok(Self { expiry_years, tenor_years, normal_vol })
    }

    pub fn label(&self) -> String {
        format!("{}Y-{}Y", self.expiry_years, self.tenor_years)
    }
}

/// ATM strike and annuity of a quoted swaption on a curve.
pub fn atm_terms(curve: &YieldCurve, expiry: f64, tenor: f64) -> Result<(f64, f64)> {
    let forward = curve.swap_rate(expiry, expiry + tenor, 1)?;
    let annuity = curve.annuity(expiry, expiry + tenor, 1)?;
    Ok((forward, annuity))
}

/// Normal vol implied by the Hull-White ATM price of a swaption.
pub fn model_normal_vol(model: &HullWhite, expiry: f64, tenor: f64) -> Result<f64> {
    let (forward, annuity) = atm_terms(model.curve(), expiry, tenor)?;
    let price = hw_swaption_price(model, expiry, tenor, forward, SwaptionKind::Receiver)?;
    bachelier_implied_vol(price.max(0.0), forward, annuity, expiry)
}

/// Calibrated parameters with the fitted vols per quote.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub model: HullWhite,
    pub fitted_vols: Vec<f64>,
    /// Sum of squared vol errors in bps^2.
    pub objective: f64,
    pub iterations: usize,
}

fn objective(curve: &YieldCurve, quotes: &[SwaptionQuote], lambda: f64, eta: f64) -> f64 {
    let Ok(model) = HullWhite::new(lambda, eta, curve.clone()) else {
        return f64::INFINITY;
    };
    quotes
        .iter()
        .map(|q| match model_normal_vol(&model, q.expiry_years, q.tenor_years) {
            Ok(v) => ((v - q.normal_vol) * 1e4).powi(2),
            Err(_) => f64::INFINITY,
        })
        .sum()
}

/// Least-squares fit of `(lambda, eta)` in vol space by Nelder-Mead on
/// `(ln lambda, ln eta)`.
pub fn calibrate_hw(curve: &YieldCurve, quotes: &[SwaptionQuote]) -> Result<Calibration> {
    if quotes.len() < 2 {
        return Err(Error::input("Hull-White calibration needs at least two swaption quotes"));
    }
    for q in quotes {
        SwaptionQuote::new(q.expiry_years, q.tenor_years, q.normal_vol)?;
        atm_terms(curve, q.expiry_years, q.tenor_years)?;
    }
    let f = |p: &[f64]| objective(curve, quotes, p[0].exp(), p[1].exp());

    // coarse start: best of a small grid in lambda with eta matched to the mean vol
    let mean_vol = quotes.iter().map(|q| q.normal_vol).sum::<f64>() / quotes.len() as f64;
    let start = [0.01, 0.05, 0.15, 0.3, 0.6]
        .iter()
        .flat_map(|&l: &f64| {
            [0.5, 1.0, 2.0].map(move |s| [l.ln(), (mean_vol.max(1e-5) * s * (1.0 + l)).ln()])
        })
        .min_by(|a, b| f(a).total_cmp(&f(b)))
        .expect("non-empty start grid");

    let mut total_iterations = 0;
    let mut best = nelder_mead(f, &start, 0.3, CALIBRATION_TOLERANCE, CALIBRATION_MAX_ITERATIONS);
    total_iterations += best.iterations;
    // restart from the optimum to guard against a collapsed simplex
    let mut restarts = 0;
    while restarts < 5 {
        let again = nelder_mead(f, &best.x, 0.05, CALIBRATION_TOLERANCE, CALIBRATION_MAX_ITERATIONS);
        total_iterations += again.iterations;
        let improved = again.value < best.value - CALIBRATION_TOLERANCE;
        let converged = again.converged;
        if again.value <= best.value {
            best = again;
        }
        restarts += 1;
        if converged && !improved {
            best.converged = true;
            break;
        }
    }
    let (lambda, eta) = (best.x[0].exp(), best.x[1].exp());
    if !best.converged || !best.value.is_finite() {
        return Err(Error::NoConvergence {
            what: "Hull-White calibration".into(),
            iterations: total_iterations,
            objective: best.value,
            best: vec![lambda, eta],
        });
    }
    let model = HullWhite::new(lambda, eta, curve.clone())?;
    let fitted_vols = quotes
        .iter()
        .map(|q| model_normal_vol(&model, q.expiry_years, q.tenor_years))
        .collect::<Result<Vec<_>>>()?;
    log::debug!("calibrated lambda={lambda:.6} eta={eta:.6} objective={:.3e}", best.value);
    Ok(Calibration { model, fitted_vols, objective: best.value, iterations: total_iterations })
}

/// Exact fit of `eta` to a single quote with `lambda` held fixed.
pub fn calibrate_eta(curve: &YieldCurve, quote: &SwaptionQuote, lambda: f64) -> Result<HullWhite> {
    let vol_at = |eta: f64| -> Result<f64> {
        model_normal_vol(&HullWhite::new(lambda, eta, curve.clone())?, quote.expiry_years, quote.tenor_years)
    };
    let (mut lo, mut hi) = (1e-10, 0.05);
    while vol_at(hi)? < quote.normal_vol {
        hi *= 2.0;
        if hi > 10.0 {
            return Err(Error::numerical(format!("no eta reproduces vol {} for {}", quote.normal_vol, quote.label())));
        }
    }
    if vol_at(lo)? > quote.normal_vol {
        return Err(Error::input(format!("vol {} for {} is below the model floor", quote.normal_vol, quote.label())));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if vol_at(mid)? < quote.normal_vol {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    HullWhite::new(lambda, 0.5 * (lo + hi), curve.clone())
}
