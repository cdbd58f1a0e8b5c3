//! Normal (Bachelier) swaption prices and implied volatilities.

use super::options::{norm_cdf, SwaptionKind};
use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn norm_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Bachelier swaption price `annuity * E[(+-(S_T - K))^+]` with normal vol.
pub fn bachelier_price(
    kind: SwaptionKind,
    forward: f64,
    strike: f64,
    annuity: f64,
    vol: f64,
    expiry: f64,
) -> Result<f64> {
    check_common(annuity, expiry)?;
    if !(vol >= 0.0 && vol.is_finite()) {
        return Err(Error::input(format!("normal vol {vol} must be non-negative")));
    }
    let moneyness = match kind {
        SwaptionKind::Payer => forward - strike,
        SwaptionKind::Receiver => strike - forward,
    };
    let std = vol * expiry.sqrt();
    if std == 0.0 {
        return Ok(annuity * moneyness.max(0.0));
    }
    let d = moneyness / std;
    Ok(annuity * (moneyness * norm_cdf(d) + std * norm_pdf(d)))
}

/// ATM price `annuity * vol * sqrt(T / 2 pi)`.
pub fn bachelier_atm_price(annuity: f64, vol: f64, expiry: f64) -> f64 {
    annuity * vol * expiry.sqrt() * INV_SQRT_2PI
}

/// Normal vol reproducing an ATM swaption price.
pub fn bachelier_implied_vol(price: f64, forward_swap_rate: f64, annuity_factor: f64, expiry: f64) -> Result<f64> {
    bachelier_implied_vol_strike(SwaptionKind::Payer, price, forward_swap_rate, forward_swap_rate, annuity_factor, expiry)
}

/// Normal vol reproducing a swaption price at any strike.
pub fn bachelier_implied_vol_strike(
    kind: SwaptionKind,
    price: f64,
    forward: f64,
    strike: f64,
    annuity: f64,
    expiry: f64,
) -> Result<f64> {
    check_common(annuity, expiry)?;
    if !(price.is_finite() && forward.is_finite() && strike.is_finite()) {
        return Err(Error::input("implied vol inputs must be finite"));
    }
    let moneyness = match kind {
        SwaptionKind::Payer => forward - strike,
        SwaptionKind::Receiver => strike - forward,
    };
    let intrinsic = annuity * moneyness.max(0.0);
    if price < intrinsic * (1.0 - 1e-14) - 1e-300 || price < 0.0 {
        return Err(Error::input(format!(
            "price {price} lies below the no-arbitrage bound {intrinsic}"
        )));
    }
    if moneyness == 0.0 {
        return Ok(price / (annuity * expiry.sqrt() * INV_SQRT_2PI));
    }
    if price <= intrinsic {
        return Ok(0.0);
    }
    let f = |v: f64| bachelier_price(kind, forward, strike, annuity, v, expiry).expect("validated inputs") - price;
    let mut lo = 0.0;
    let mut hi = (price / (annuity * expiry.sqrt() * INV_SQRT_2PI)).max(1e-6);
    let mut expansions = 0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::numerical("implied vol could not be bracketed"));
        }
    }
    // vega is positive: Newton inside a shrinking bracket
    let mut v = 0.5 * (lo + hi);
    for _ in 0..200 {
        let value = f(v);
        if value > 0.0 {
            hi = v;
        } else {
            lo = v;
        }
        let std = v * expiry.sqrt();
        let vega = if std > 0.0 { annuity * expiry.sqrt() * norm_pdf(moneyness / std) } else { 0.0 };
        let newton = if vega > 0.0 { v - value / vega } else { f64::NAN };
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - v).abs() <= 1e-16 * v.max(1e-12) || hi - lo <= 1e-18 {
            return Ok(next);
        }
        v = next;
    }
    Ok(v)
}

fn check_common(annuity: f64, expiry: f64) -> Result<()> {
    if !(annuity > 0.0 && annuity.is_finite()) {
        return Err(Error::input(format!("annuity factor {annuity} must be positive")));
    }
    if !(expiry > 0.0 && expiry.is_finite()) {
        return Err(Error::input(format!("expiry {expiry} must be positive")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn atm_closed_form_round_trip() {
        let price = bachelier_atm_price(4.5, 0.005, 4.0);
        let vol = bachelier_implied_vol(price, 0.01, 4.5, 4.0).unwrap();
        assert!((vol - 0.005).abs() < 1e-15);
        let general = bachelier_price(SwaptionKind::Receiver, 0.01, 0.01, 4.5, 0.005, 4.0).unwrap();
        assert!((general - price).abs() < 1e-15);
    }

    #[test]
    fn zero_price_is_zero_vol() {
        assert_eq!(bachelier_implied_vol(0.0, 0.01, 4.5, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_price_and_bad_annuity_rejected() {
        assert!(bachelier_implied_vol(-1e-4, 0.01, 4.5, 4.0).unwrap_err().is_input());
        assert!(bachelier_implied_vol(1e-4, 0.01, 0.0, 4.0).unwrap_err().is_input());
        assert!(bachelier_implied_vol(1e-4, 0.01, 4.5, 0.0).unwrap_err().is_input());
        assert!(bachelier_implied_vol_strike(SwaptionKind::Payer, 1e-5, 0.02, 0.01, 4.5, 1.0)
            .unwrap_err()
            .is_input());
    }

    #[test]
    fn five_by_five_table_anchor_annuity() {
        // 262.28 bps premium at 61.98 bps normal vol implies an annuity near 4.74
        let annuity = 262.28e-4 / (61.98e-4 * (5.0f64 / (2.0 * std::f64::consts::PI)).sqrt());
        assert!((annuity - 4.744).abs() < 1e-3, "{annuity}");
        let vol = bachelier_implied_vol(262.28e-4, 0.009, annuity, 5.0).unwrap();
        assert!((vol - 61.98e-4).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn off_atm_round_trip(vol in 1e-4f64..0.02, gap in -0.02f64..0.02, expiry in 0.1f64..15.0) {
            for kind in [SwaptionKind::Payer, SwaptionKind::Receiver] {
                let forward = 0.01;
                let price = bachelier_price(kind, forward, forward + gap, 3.0, vol, expiry).unwrap();
                let implied = bachelier_implied_vol_strike(kind, price, forward, forward + gap, 3.0, expiry).unwrap();
                let repriced = bachelier_price(kind, forward, forward + gap, 3.0, implied, expiry).unwrap();
                prop_assert!((repriced - price).abs() <= 1e-10 * price.max(1e-12));
            }
        }
    }
}
