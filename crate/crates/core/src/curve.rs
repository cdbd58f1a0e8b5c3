//! Discount curve bootstrapped from spot par-swap quotes.
//!
//! Discount factors are interpolated log-linearly between pillars, which is
//! the same as holding the instantaneous forward rate constant on each
//! pillar interval. Payment schedules use year fractions `1 / frequency`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BISECTION_LOWER: f64 = 1e-8;
const BISECTION_UPPER: f64 = 2.0;
const BISECTION_TOLERANCE: f64 = 1e-14;
const TIME_EPSILON: f64 = 1e-12;

/// Step used for finite differences of `ln P(0, t)`.
pub const FORWARD_FD_STEP: f64 = 1e-4;

/// A spot-starting par swap quote used as a curve instrument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapQuote {
    pub maturity_years: u32,
    pub par_rate: f64,
    pub fixed_frequency: u32,
}

impl SwapQuote {
    pub fn annual(maturity_years: u32, par_rate: f64) -> Self {
        Self {
            maturity_years,
            par_rate,
            fixed_frequency: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.maturity_years < 1 {
            return Err(Error::input("swap quote maturity must be at least one year"));
        }
        if !self.par_rate.is_finite() {
            return Err(Error::input(format!(
                "swap quote {}y has a non-finite par rate",
                self.maturity_years
            )));
        }
        if self.fixed_frequency < 1 || self.fixed_frequency > 12 {
            return Err(Error::input(format!(
                "swap quote {}y has unsupported fixed frequency {}",
                self.maturity_years, self.fixed_frequency
            )));
        }
        Ok(())
    }
}

/// Immutable discount curve `t -> P(0, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct YieldCurve {
    pillar_times: Vec<f64>,
    discount_factors: Vec<f64>,
    log_discount: Vec<f64>,
    allow_extrapolation: bool,
}

impl YieldCurve {
    /// Builds a curve from explicit pillars. A pillar at `t = 0` with `P = 1`
    /// is prepended when absent.
    pub fn from_pillars(times: &[f64], discount_factors: &[f64]) -> Result<Self> {
        if times.len() != discount_factors.len() || times.is_empty() {
            return Err(Error::input("pillar times and discount factors must be non-empty and of equal length"));
        }
        let mut pillar_times = Vec::with_capacity(times.len() + 1);
        let mut dfs = Vec::with_capacity(times.len() + 1);
        if times[0].abs() > TIME_EPSILON {
            pillar_times.push(0.0);
            dfs.push(1.0);
        }
        for (&t, &p) in times.iter().zip(discount_factors) {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::input(format!("discount factor {p} at t={t} is not positive")));
            }
            if let Some(&prev) = pillar_times.last() {
                if t <= prev {
                    return Err(Error::input("pillar times must be strictly increasing"));
                }
            } else if (p - 1.0).abs() > 1e-15 {
                return Err(Error::input("discount factor at t=0 must equal one"));
            }
            pillar_times.push(t);
            dfs.push(p);
        }
        if pillar_times.len() < 2 {
            return Err(Error::input("curve needs at least one pillar after t=0"));
        }
        let log_discount = dfs.iter().map(|p| p.ln()).collect();
        Ok(Self {
            pillar_times,
            discount_factors: dfs,
            log_discount,
            allow_extrapolation: false,
        })
    }

    /// Curve with a constant continuously-compounded zero rate, pillars at
    /// every whole year up to `horizon`.
    pub fn flat(rate: f64, horizon: u32) -> Result<Self> {
        let times: Vec<f64> = (1..=horizon).map(f64::from).collect();
        let dfs: Vec<f64> = times.iter().map(|t| (-rate * t).exp()).collect();
        Self::from_pillars(&times, &dfs)
    }

    /// Sequential bootstrap: one new pillar per quote, solved by bisection on
    /// the new discount factor so the quote reprices at par.
    pub fn bootstrap(quotes: &[SwapQuote]) -> Result<Self> {
        if quotes.is_empty() {
            return Err(Error::input("bootstrap needs at least one swap quote"));
        }
        for q in quotes {
            q.validate()?;
        }
        for pair in quotes.windows(2) {
            if pair[1].maturity_years <= pair[0].maturity_years {
                return Err(Error::input(format!(
                    "swap quote maturities must be strictly increasing ({}y follows {}y)",
                    pair[1].maturity_years, pair[0].maturity_years
                )));
            }
        }

        let mut curve = Self {
            pillar_times: vec![0.0],
            discount_factors: vec![1.0],
            log_discount: vec![0.0],
            allow_extrapolation: false,
        };
        for quote in quotes {
            let maturity = f64::from(quote.maturity_years);
            let schedule = payment_schedule(0.0, maturity, quote.fixed_frequency)?;
            curve.pillar_times.push(maturity);
            curve.discount_factors.push(1.0);
            curve.log_discount.push(0.0);

            let mismatch = |curve: &mut Self, p: f64| -> f64 {
                curve.set_last_pillar(p);
                curve.par_rate_on(&schedule) - quote.par_rate
            };
            let mut lo = BISECTION_LOWER;
            let mut hi = BISECTION_UPPER;
            let f_lo = mismatch(&mut curve, lo);
            let f_hi = mismatch(&mut curve, hi);
            if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
                return Err(Error::numerical(format!(
                    "bootstrap could not bracket the discount factor for the {}y quote",
                    quote.maturity_years
                )));
            }
            // par rate is strictly decreasing in the new discount factor
            while hi - lo > BISECTION_TOLERANCE {
                let mid = 0.5 * (lo + hi);
                if mismatch(&mut curve, mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            curve.set_last_pillar(0.5 * (lo + hi));
        }
        Ok(curve)
    }

    /// Enables flat-forward extrapolation beyond the last pillar.
    pub fn with_extrapolation(mut self, allow: bool) -> Self {
        self.allow_extrapolation = allow;
        self
    }

    pub fn allows_extrapolation(&self) -> bool {
        self.allow_extrapolation
    }

    pub fn pillar_times(&self) -> &[f64] {
        &self.pillar_times
    }

    pub fn discount_factors(&self) -> &[f64] {
        &self.discount_factors
    }

    pub fn last_time(&self) -> f64 {
        *self.pillar_times.last().expect("curve has pillars")
    }

    fn set_last_pillar(&mut self, p: f64) {
        let n = self.discount_factors.len() - 1;
        self.discount_factors[n] = p;
        self.log_discount[n] = p.ln();
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t < -TIME_EPSILON {
            return Err(Error::input(format!("curve time {t} must be finite and non-negative")));
        }
        if t > self.last_time() + TIME_EPSILON && !self.allow_extrapolation {
            return Err(Error::Extrapolation {
                t,
                last: self.last_time(),
            });
        }
        Ok(())
    }

    /// `ln P(0, t)` with flat-forward continuation on both ends. Callers check
    /// the domain first.
    pub(crate) fn log_discount_unchecked(&self, t: f64) -> f64 {
        let times = &self.pillar_times;
        let logs = &self.log_discount;
        let n = times.len();
        let idx = times.partition_point(|&x| x < t);
        if idx < n && times[idx] == t {
            return logs[idx];
        }
        let (i0, i1) = if idx == 0 {
            (0, 1)
        } else if idx >= n {
            (n - 2, n - 1)
        } else {
            (idx - 1, idx)
        };
        let w = (t - times[i0]) / (times[i1] - times[i0]);
        logs[i0] + w * (logs[i1] - logs[i0])
    }

    /// Discount factor `P(0, t)`.
    pub fn discount(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.log_discount_unchecked(t.max(0.0)).exp())
    }

    /// Simple forward rate `L(0; t_start, t_end)`.
    pub fn forward_libor(&self, t_start: f64, t_end: f64) -> Result<f64> {
        if !(t_end > t_start) {
            return Err(Error::input(format!(
                "forward period [{t_start}, {t_end}] is degenerate"
            )));
        }
        let p0 = self.discount(t_start)?;
        let p1 = self.discount(t_end)?;
        Ok((p0 - p1) / ((t_end - t_start) * p1))
    }

    /// Fixed-leg annuity `sum_k tau_k P(0, T_k)` for the schedule `(t_m, t_n]`.
    pub fn annuity(&self, t_m: f64, t_n: f64, frequency: u32) -> Result<f64> {
        let schedule = payment_schedule(t_m, t_n, frequency)?;
        self.check_time(t_n)?;
        Ok(annuity_on(&schedule, |t| self.log_discount_unchecked(t).exp()))
    }

    /// Forward-start par swap rate `(P(0,T_m) - P(0,T_n)) / annuity`.
    pub fn swap_rate(&self, t_m: f64, t_n: f64, frequency: u32) -> Result<f64> {
        let schedule = payment_schedule(t_m, t_n, frequency)?;
        self.check_time(t_m)?;
        self.check_time(t_n)?;
        Ok(self.par_rate_on(&schedule))
    }

    fn par_rate_on(&self, schedule: &[f64]) -> f64 {
        let df = |t: f64| self.log_discount_unchecked(t).exp();
        let start = df(schedule[0]);
        let end = df(*schedule.last().expect("non-empty schedule"));
        (start - end) / annuity_on(schedule, df)
    }

    /// Instantaneous forward `f(0, t)` by central differences of `ln P`.
    pub fn instantaneous_forward(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.forward_unchecked(t))
    }

    pub(crate) fn forward_unchecked(&self, t: f64) -> f64 {
        let h = FORWARD_FD_STEP;
        -(self.log_discount_unchecked(t + h) - self.log_discount_unchecked(t - h)) / (2.0 * h)
    }

    /// `d f(0, t) / dt` by the central second difference of `ln P`.
    pub fn forward_slope(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let h = FORWARD_FD_STEP;
        let lp = |s: f64| self.log_discount_unchecked(s);
        Ok(-(lp(t + h) - 2.0 * lp(t) + lp(t - h)) / (h * h))
    }
}

/// Payment dates `T_m, T_m + 1/f, ..., T_n` (the first entry is the start date).
pub fn payment_schedule(t_m: f64, t_n: f64, frequency: u32) -> Result<Vec<f64>> {
    if frequency == 0 {
        return Err(Error::input("payment frequency must be positive"));
    }
    if !(t_n > t_m) || t_m < 0.0 {
        return Err(Error::input(format!("swap schedule [{t_m}, {t_n}] is empty")));
    }
    let periods = (t_n - t_m) * f64::from(frequency);
    let n = periods.round();
    if n < 1.0 || (periods - n).abs() > 1e-9 {
        return Err(Error::input(format!(
            "swap schedule [{t_m}, {t_n}] is not a whole number of periods at frequency {frequency}"
        )));
    }
    let n = n as usize;
    let tau = 1.0 / f64::from(frequency);
    let mut dates: Vec<f64> = (0..=n).map(|k| t_m + k as f64 * tau).collect();
    dates[n] = t_n;
    Ok(dates)
}

pub(crate) fn annuity_on(schedule: &[f64], df: impl Fn(f64) -> f64) -> f64 {
    schedule
        .windows(2)
        .map(|w| (w[1] - w[0]) * df(w[1]))
        .sum()
}
