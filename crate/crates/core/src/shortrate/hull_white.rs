use crate::curve::YieldCurve;
use crate::error::{Error, Result};

/// One-factor Hull-White model `dr = lambda (theta(t) - r) dt + eta dW`
/// fitted to an initial discount curve.
///
/// Internally the short rate is split as `r(t) = x(t) + phi(t)` where `x` is
/// a zero-mean Ornstein-Uhlenbeck factor started at 0 and
/// `phi(t) = f(0,t) + eta^2 / (2 lambda^2) (1 - e^{-lambda t})^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HullWhite {
    lambda: f64,
    eta: f64,
    curve: YieldCurve,
}

impl HullWhite {
    pub fn new(lambda: f64, eta: f64, curve: YieldCurve) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::input(format!("mean reversion {lambda} must be positive")));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::input(format!("volatility {eta} must be positive")));
        }
        Ok(Self { lambda, eta, curve })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn curve(&self) -> &YieldCurve {
        &self.curve
    }

    /// Same dynamics on a different initial curve.
    pub fn with_curve(&self, curve: YieldCurve) -> Self {
        Self { curve, ..self.clone() }
    }

    /// `(1 - e^{-lambda tau}) / lambda`, i.e. `-B(tau)` of the affine bond formula.
    pub fn b_tilde(&self, tau: f64) -> f64 {
        decay_integral(self.lambda, tau)
    }

    /// Affine coefficient `B(tau) = -(1 - e^{-lambda tau}) / lambda`.
    pub fn b(&self, tau: f64) -> f64 {
        -self.b_tilde(tau)
    }

    /// Affine coefficient `A(t, T)` so that `P(t,T) = exp(A + B(T-t) r(t))`.
    pub fn a(&self, t: f64, maturity: f64) -> Result<f64> {
        self.check_times(t, maturity)?;
        let bt = self.b_tilde(maturity - t);
        Ok(self.curve.log_discount_unchecked(maturity) - self.curve.log_discount_unchecked(t)
            + bt * self.curve.forward_unchecked(t)
            - self.convexity(t, bt))
    }

    /// Zero-coupon bond price `P(t, T)` given the short rate `r(t)`.
    pub fn bond_price(&self, t: f64, maturity: f64, r_t: f64) -> Result<f64> {
        let a = self.a(t, maturity)?;
        Ok((a + self.b(maturity - t) * r_t).exp())
    }

    /// Zero-coupon bond price `P(t, T)` given the factor `x(t)`.
    pub fn bond_price_factor(&self, t: f64, maturity: f64, x_t: f64) -> Result<f64> {
        self.check_times(t, maturity)?;
        Ok(self.log_bond_factor(t, maturity, x_t).exp())
    }

    /// `ln P(t, T | x)`; times must already be validated.
    pub(crate) fn log_bond_factor(&self, t: f64, maturity: f64, x_t: f64) -> f64 {
        let bt = self.b_tilde(maturity - t);
        self.curve.log_discount_unchecked(maturity) - self.curve.log_discount_unchecked(t)
            - bt * (x_t + self.psi(t))
            - self.convexity(t, bt)
    }

    /// Deterministic part of `ln P(t,T|x) = intercept - b_tilde(T-t) x`.
    pub(crate) fn log_bond_intercept(&self, t: f64, maturity: f64) -> f64 {
        self.log_bond_factor(t, maturity, 0.0)
    }

    fn convexity(&self, t: f64, bt: f64) -> f64 {
        self.eta * self.eta / (4.0 * self.lambda)
            * bt
            * bt
            * (1.0 - (-2.0 * self.lambda * t).exp())
    }

    /// `eta^2 / (2 lambda^2) (1 - e^{-lambda t})^2`.
    pub fn psi(&self, t: f64) -> f64 {
        let d = 1.0 - (-self.lambda * t).exp();
        self.eta * self.eta / (2.0 * self.lambda * self.lambda) * d * d
    }

    /// Short rate from the factor.
    pub fn short_rate(&self, t: f64, x_t: f64) -> f64 {
        x_t + self.curve.forward_unchecked(t) + self.psi(t)
    }

    /// Factor from the short rate.
    pub fn factor(&self, t: f64, r_t: f64) -> f64 {
        r_t - self.curve.forward_unchecked(t) - self.psi(t)
    }

    /// Drift target `theta(t)` matching the initial curve.
    pub fn theta(&self, t: f64) -> Result<f64> {
        let f = self.curve.instantaneous_forward(t)?;
        let slope = self.curve.forward_slope(t)?;
        let l = self.lambda;
        Ok(slope / l + f + self.eta * self.eta / (2.0 * l * l) * (1.0 - (-2.0 * l * t).exp()))
    }

    /// Conditional variance of `x(t + dt)` given `x(t)`.
    pub fn factor_variance(&self, dt: f64) -> f64 {
        self.eta * self.eta * decay_integral(2.0 * self.lambda, dt)
    }

    /// Variance of `int_0^t x(s) ds` with `x(0) = 0`.
    pub fn integral_variance(&self, t: f64) -> f64 {
        let l = self.lambda;
        self.eta * self.eta / (l * l)
            * (t - 2.0 * decay_integral(l, t) + decay_integral(2.0 * l, t))
    }

    /// Volatility of `ln P(T, S)` seen from `t`, the bond-option `sigma_p`.
    pub fn bond_option_vol(&self, t: f64, expiry: f64, maturity: f64) -> f64 {
        self.factor_variance(expiry - t).sqrt() * self.b_tilde(maturity - expiry)
    }

    fn check_times(&self, t: f64, maturity: f64) -> Result<()> {
        if !(t >= 0.0 && maturity >= t) {
            return Err(Error::input(format!("bond times must satisfy 0 <= t <= T, got t={t}, T={maturity}")));
        }
        // validates the curve domain for both ends
        self.curve.discount(maturity)?;
        Ok(())
    }
}

/// `(1 - e^{-k tau}) / k` with the `tau` limit for tiny `k tau`.
pub(crate) fn decay_integral(k: f64, tau: f64) -> f64 {
    let z = k * tau;
    if z.abs() < 1e-8 {
        tau * (1.0 - 0.5 * z)
    } else {
        -(-z).exp_m1() / k
    }
}
