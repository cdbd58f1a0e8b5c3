//! Zero-coupon bond options, Jamshidian swaptions and floorlets under
//! Hull-White. Every price can be taken at time 0 or conditionally on the
//! factor `x(t)` at a later date `t`.

use serde::{Deserialize, Serialize};

use super::hull_white::HullWhite;
use crate::curve::payment_schedule;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondOptionKind {
    Call,
    Put,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwaptionKind {
    Payer,
    Receiver,
}

pub(crate) fn norm_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

impl HullWhite {
    /// European option on the bond `P(expiry, maturity)` valued at time 0.
    pub fn zero_bond_option(
        &self,
        kind: BondOptionKind,
        expiry: f64,
        maturity: f64,
        strike: f64,
    ) -> Result<f64> {
        self.zero_bond_option_at(kind, 0.0, 0.0, expiry, maturity, strike)
    }

    /// European bond option valued at `t <= expiry` given the factor `x(t)`.
    pub fn zero_bond_option_at(
        &self,
        kind: BondOptionKind,
        t: f64,
        x_t: f64,
        expiry: f64,
        maturity: f64,
        strike: f64,
    ) -> Result<f64> {
        if !(t <= expiry && expiry <= maturity) {
            return Err(Error::input(format!(
                "bond option needs t <= expiry <= maturity, got {t}, {expiry}, {maturity}"
            )));
        }
        self.curve().discount(maturity)?;
        Ok(self.bond_option_unchecked(kind, t, x_t, expiry, maturity, strike))
    }

    pub(crate) fn bond_option_unchecked(
        &self,
        kind: BondOptionKind,
        t: f64,
        x_t: f64,
        expiry: f64,
        maturity: f64,
        strike: f64,
    ) -> f64 {
        let p_t = self.log_bond_factor(t, expiry, x_t).exp();
        let p_s = self.log_bond_factor(t, maturity, x_t).exp();
        bond_option_from_prices(kind, p_t, p_s, strike, self.bond_option_vol(t, expiry, maturity))
    }
}

fn bond_option_from_prices(kind: BondOptionKind, p_t: f64, p_s: f64, strike: f64, sigma_p: f64) -> f64 {
    if sigma_p < 1e-14 {
        return match kind {
            BondOptionKind::Call => (p_s - strike * p_t).max(0.0),
            BondOptionKind::Put => (strike * p_t - p_s).max(0.0),
        };
    }
    let h = (p_s / (strike * p_t)).ln() / sigma_p + 0.5 * sigma_p;
    match kind {
        BondOptionKind::Call => p_s * norm_cdf(h) - strike * p_t * norm_cdf(h - sigma_p),
        BondOptionKind::Put => strike * p_t * norm_cdf(sigma_p - h) - p_s * norm_cdf(-h),
    }
}

/// Swaption on an annual fixed-vs-float swap, decomposed into zero-coupon
/// bond options at the critical factor level.
#[derive(Debug, Clone, PartialEq)]
pub struct JamshidianSwaption {
    pub kind: SwaptionKind,
    pub strike: f64,
    /// Expiry followed by the fixed payment dates.
    pub schedule: Vec<f64>,
    coupons: Vec<f64>,
    bond_strikes: Vec<f64>,
    critical_factor: f64,
}

impl JamshidianSwaption {
    /// Annual swaption `expiry x tenor` on unit notional.
    pub fn new(
        model: &HullWhite,
        expiry: f64,
        tenor: f64,
        strike: f64,
        kind: SwaptionKind,
    ) -> Result<Self> {
        if !(expiry > 0.0 && tenor > 0.0) {
            return Err(Error::input(format!("swaption {expiry}x{tenor} needs positive expiry and tenor")));
        }
        if !strike.is_finite() {
            return Err(Error::input("swaption strike must be finite"));
        }
        let schedule = payment_schedule(expiry, expiry + tenor, 1)?;
        model.curve().discount(expiry + tenor)?;
        let coupons: Vec<f64> = schedule
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let c = strike * (w[1] - w[0]);
                if k + 2 == schedule.len() { c + 1.0 } else { c }
            })
            .collect();
        if *coupons.last().expect("non-empty schedule") <= 0.0 {
            return Err(Error::input(format!("swaption strike {strike} leaves no positive final coupon")));
        }
        let intercepts: Vec<f64> = schedule[1..]
            .iter()
            .map(|&s| model.log_bond_intercept(expiry, s))
            .collect();
        let slopes: Vec<f64> = schedule[1..].iter().map(|&s| model.b_tilde(s - expiry)).collect();
        let critical_factor = critical_factor(&coupons, &intercepts, &slopes)?;
        let bond_strikes = intercepts
            .iter()
            .zip(&slopes)
            .map(|(a, b)| (a - b * critical_factor).exp())
            .collect();
        Ok(Self { kind, strike, schedule, coupons, bond_strikes, critical_factor })
    }

    pub fn expiry(&self) -> f64 {
        self.schedule[0]
    }

    pub fn critical_factor(&self) -> f64 {
        self.critical_factor
    }

    /// Price at time 0.
    pub fn price(&self, model: &HullWhite) -> f64 {
        self.price_at(model, 0.0, 0.0)
    }

    /// Price at `t <= expiry` given `x(t)`.
    pub fn price_at(&self, model: &HullWhite, t: f64, x_t: f64) -> f64 {
        let expiry = self.expiry();
        let kind = match self.kind {
            SwaptionKind::Receiver => BondOptionKind::Call,
            SwaptionKind::Payer => BondOptionKind::Put,
        };
        let p_t = model.log_bond_factor(t, expiry, x_t).exp();
        self.schedule[1..]
            .iter()
            .zip(&self.coupons)
            .zip(&self.bond_strikes)
            .map(|((&s, &c), &x)| {
                let p_s = model.log_bond_factor(t, s, x_t).exp();
                c * bond_option_from_prices(kind, p_t, p_s, x, model.bond_option_vol(t, expiry, s))
            })
            .sum()
    }

    /// Whether the option is exercised at expiry in state `x(expiry)`.
    pub fn exercised(&self, x_expiry: f64) -> bool {
        match self.kind {
            SwaptionKind::Receiver => x_expiry < self.critical_factor,
            SwaptionKind::Payer => x_expiry > self.critical_factor,
        }
    }
}

/// Solves `sum_i c_i exp(a_i - b_i x) = 1` for `x` with a safeguarded Newton
/// iteration on an expanding bracket.
fn critical_factor(coupons: &[f64], intercepts: &[f64], slopes: &[f64]) -> Result<f64> {
    let g = |x: f64| -> (f64, f64) {
        let mut value = -1.0;
        let mut deriv = 0.0;
        for ((c, a), b) in coupons.iter().zip(intercepts).zip(slopes) {
            let term = c * (a - b * x).exp();
            value += term;
            deriv -= b * term;
        }
        (value, deriv)
    };
    let (mut lo, mut hi) = (-0.05, 0.05);
    let mut expansions = 0;
    while g(lo).0 <= 0.0 || g(hi).0 >= 0.0 {
        expansions += 1;
        if expansions > 60 {
            return Err(Error::numerical("Jamshidian critical rate could not be bracketed"));
        }
        if g(lo).0 <= 0.0 {
            lo *= 2.0;
        }
        if g(hi).0 >= 0.0 {
            hi *= 2.0;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, d) = g(x);
        if v == 0.0 {
            return Ok(x);
        }
        if v > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - v / d;
        let next = if d < 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-16 * x.abs().max(1e-3) || hi - lo <= 1e-17 {
            return Ok(next);
        }
        x = next;
    }
    let (v, _) = g(x);
    if v.abs() < 1e-12 {
        Ok(x)
    } else {
        Err(Error::numerical(format!("Jamshidian critical rate did not converge (residual {v:e})")))
    }
}

/// European swaption price at time 0 per unit notional.
pub fn hw_swaption_price(
    model: &HullWhite,
    expiry: f64,
    tenor: f64,
    strike: f64,
    kind: SwaptionKind,
) -> Result<f64> {
    Ok(JamshidianSwaption::new(model, expiry, tenor, strike, kind)?.price(model))
}

/// Floorlet paying `tau (K - L(T1; T1, T2))^+` at `T2`, valued at time 0 as
/// `(1 + tau K)` calls on `P(T1, T2)` struck at `1 / (1 + tau K)`.
pub fn hw_floorlet_price(model: &HullWhite, t1: f64, t2: f64, strike: f64) -> Result<f64> {
    if !(t2 > t1 && t1 >= 0.0) {
        return Err(Error::input(format!("floorlet period [{t1}, {t2}] is empty")));
    }
    if !strike.is_finite() {
        return Err(Error::input("floorlet strike must be finite"));
    }
    let tau = t2 - t1;
    let gross = 1.0 + tau * strike;
    if gross <= 0.0 {
        return Ok(0.0);
    }
    Ok(gross * model.zero_bond_option(BondOptionKind::Call, t1, t2, 1.0 / gross)?)
}

/// Value at `t` of receiving `strike` annually against floating on the swap
/// with dates `schedule` (start date first), given `x(t)`. `t` must lie
/// before the start or on one of the schedule dates.
pub fn receiver_swap_value_at(model: &HullWhite, schedule: &[f64], strike: f64, t: f64, x_t: f64) -> f64 {
    let bond = |s: f64| model.log_bond_factor(t, s, x_t).exp();
    let end = *schedule.last().expect("non-empty schedule");
    if t >= end - 1e-12 {
        return 0.0;
    }
    let float_start = if t < schedule[0] - 1e-12 { bond(schedule[0]) } else { 1.0 };
    let fixed: f64 = schedule
        .windows(2)
        .filter(|w| w[1] > t + 1e-12)
        .map(|w| strike * (w[1] - w[0]) * bond(w[1]))
        .sum();
    fixed + bond(end) - float_start
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{SwapQuote, YieldCurve};
    use approx::assert_relative_eq;

    fn market_curve() -> YieldCurve {
        let q = [(1, -0.0027), (2, -0.0014), (3, 0.0002), (5, 0.0031), (7, 0.0057), (10, 0.0089), (15, 0.0123), (20, 0.0138)];
        YieldCurve::bootstrap(&q.iter().map(|&(m, r)| SwapQuote::annual(m, r)).collect::<Vec<_>>()).unwrap()
    }

    fn model() -> HullWhite {
        HullWhite::new(0.264, 0.017, market_curve()).unwrap()
    }

    #[test]
    fn bond_put_call_parity() {
        let hw = model();
        for &(t, x, expiry, maturity, strike) in
            &[(0.0, 0.0, 2.0, 5.0, 0.98), (1.0, 0.01, 3.0, 10.0, 0.9), (2.0, -0.02, 2.5, 4.0, 1.01)]
        {
            let call = hw.zero_bond_option_at(BondOptionKind::Call, t, x, expiry, maturity, strike).unwrap();
            let put = hw.zero_bond_option_at(BondOptionKind::Put, t, x, expiry, maturity, strike).unwrap();
            let p_t = hw.bond_price_factor(t, expiry, x).unwrap();
            let p_s = hw.bond_price_factor(t, maturity, x).unwrap();
            assert!((call - put - (p_s - strike * p_t)).abs() < 1e-12);
        }
    }

    #[test]
    fn vanishing_volatility_atm_swaption_is_worthless() {
        let hw = HullWhite::new(0.264, 1e-14, market_curve()).unwrap();
        let atm = hw.curve().swap_rate(5.0, 10.0, 1).unwrap();
        for kind in [SwaptionKind::Payer, SwaptionKind::Receiver] {
            assert!(hw_swaption_price(&hw, 5.0, 5.0, atm, kind).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn swaption_parity_and_intrinsic_bound() {
        let hw = model();
        let curve = hw.curve();
        let annuity = curve.annuity(3.0, 10.0, 1).unwrap();
        let forward = curve.swap_rate(3.0, 10.0, 1).unwrap();
        for &k in &[0.0, 0.005, forward, 0.02] {
            let payer = hw_swaption_price(&hw, 3.0, 7.0, k, SwaptionKind::Payer).unwrap();
            let receiver = hw_swaption_price(&hw, 3.0, 7.0, k, SwaptionKind::Receiver).unwrap();
            // payer - receiver = forward payer swap
            assert!((payer - receiver - (forward - k) * annuity).abs() < 1e-12);
            assert!(payer >= ((forward - k) * annuity).max(0.0) - 1e-15);
            assert!(receiver >= ((k - forward) * annuity).max(0.0) - 1e-15);
        }
    }

    #[test]
    fn deep_itm_receiver_approaches_forward_swap() {
        let hw = model();
        let k = 0.5;
        let receiver = hw_swaption_price(&hw, 2.0, 5.0, k, SwaptionKind::Receiver).unwrap();
        let curve = hw.curve();
        let swap = k * curve.annuity(2.0, 7.0, 1).unwrap() - (curve.discount(2.0).unwrap() - curve.discount(7.0).unwrap());
        assert_relative_eq!(receiver, swap, max_relative = 1e-12);
    }

    #[test]
    fn zero_strike_payer_is_near_intrinsic() {
        let hw = HullWhite::new(0.264, 0.002, YieldCurve::flat(0.03, 20).unwrap()).unwrap();
        let payer = hw_swaption_price(&hw, 2.0, 5.0, 0.0, SwaptionKind::Payer).unwrap();
        let intrinsic = hw.curve().discount(2.0).unwrap() - hw.curve().discount(7.0).unwrap();
        assert!(payer >= intrinsic - 1e-15);
        assert!(payer - intrinsic < 1e-10);
    }

    #[test]
    fn floorlet_equals_one_period_receiver() {
        let hw = model();
        for &k in &[-0.005, 0.0, 0.003, 0.02] {
            let floorlet = hw_floorlet_price(&hw, 4.0, 5.0, k).unwrap();
            let swaption = hw_swaption_price(&hw, 4.0, 1.0, k, SwaptionKind::Receiver).unwrap();
            assert!((floorlet - swaption).abs() < 1e-10, "K={k}");
        }
    }

    #[test]
    fn floorlet_strike_limits() {
        let hw = model();
        assert_eq!(hw_floorlet_price(&hw, 4.0, 5.0, -5.0).unwrap(), 0.0);
        let k = 2.0;
        let curve = hw.curve();
        let sure = curve.discount(5.0).unwrap() * (1.0 + k) - curve.discount(4.0).unwrap();
        assert_relative_eq!(hw_floorlet_price(&hw, 4.0, 5.0, k).unwrap(), sure, max_relative = 1e-12);
    }

    #[test]
    fn exercise_boundary_matches_swap_value() {
        let hw = model();
        let k = hw.curve().swap_rate(5.0, 10.0, 1).unwrap();
        let swpt = JamshidianSwaption::new(&hw, 5.0, 5.0, k, SwaptionKind::Receiver).unwrap();
        for &dx in &[-1e-4, 1e-4] {
            let x = swpt.critical_factor() + dx;
            let value = receiver_swap_value_at(&hw, &swpt.schedule, k, 5.0, x);
            assert_eq!(value > 0.0, swpt.exercised(x));
        }
        assert!(receiver_swap_value_at(&hw, &swpt.schedule, k, 5.0, swpt.critical_factor()).abs() < 1e-12);
    }

    #[test]
    fn conditional_price_at_expiry_is_intrinsic() {
        let hw = model();
        let swpt = JamshidianSwaption::new(&hw, 3.0, 4.0, 0.008, SwaptionKind::Receiver).unwrap();
        for &x in &[-0.02, 0.0, 0.02] {
            let at_expiry = swpt.price_at(&hw, 3.0, x);
            let swap = receiver_swap_value_at(&hw, &swpt.schedule, 0.008, 3.0, x);
            assert!((at_expiry - swap.max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn bond_option_rejects_bad_ordering() {
        let hw = model();
        assert!(hw.zero_bond_option(BondOptionKind::Call, 5.0, 4.0, 1.0).unwrap_err().is_input());
        assert!(hw_floorlet_price(&hw, 5.0, 5.0, 0.01).unwrap_err().is_input());
    }
}
