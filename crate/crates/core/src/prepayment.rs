//! Prepayment behaviour: CPR models, SMM/CPR conversion, the loan-level
//! binning and logistic fit, and a synthetic loan generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, LogNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::levenberg_marquardt;

/// Annualize a single monthly mortality: `1 - (1 - SMM)^12`.
pub fn smm_to_cpr(smm: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&smm) {
        return Err(Error::input(format!("SMM {smm} outside [0, 1]")));
    }
    Ok(-(12.0 * (-smm).ln_1p()).exp_m1())
}

/// Monthly mortality equivalent to an annual rate.
pub fn cpr_to_smm(cpr: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&cpr) {
        return Err(Error::input(format!("CPR {cpr} outside [0, 1]")));
    }
    Ok(-((-cpr).ln_1p() / 12.0).exp_m1())
}

/// Annual prepayment rate as a function of the refinancing incentive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum CprModel {
    Constant { lambda: f64 },
    /// `lambda_max` once the incentive exceeds `epsilon_star`, zero otherwise.
    Rational { lambda_max: f64, epsilon_star: f64 },
    /// `alpha1 + alpha2 / (1 + exp(alpha3 eps + alpha4))`.
    Logistic { alpha1: f64, alpha2: f64, alpha3: f64, alpha4: f64 },
}

impl CprModel {
    pub fn constant(lambda: f64) -> Result<Self> {
        check_unit("constant CPR", lambda)?;
        Ok(CprModel::Constant { lambda })
    }

    pub fn rational(lambda_max: f64, epsilon_star: f64) -> Result<Self> {
        check_unit("maximum CPR", lambda_max)?;
        if !epsilon_star.is_finite() {
            return Err(Error::input("rational threshold must be finite"));
        }
        Ok(CprModel::Rational { lambda_max, epsilon_star })
    }

    pub fn logistic(alpha1: f64, alpha2: f64, alpha3: f64, alpha4: f64) -> Result<Self> {
        if ![alpha1, alpha2, alpha3, alpha4].iter().all(|a| a.is_finite()) {
            return Err(Error::input("logistic parameters must be finite"));
        }
        check_unit("logistic floor alpha1", alpha1)?;
        check_unit("logistic cap alpha1 + alpha2", alpha1 + alpha2)?;
        Ok(CprModel::Logistic { alpha1, alpha2, alpha3, alpha4 })
    }

    /// Re-checks the construction invariants (for deserialized values).
    pub fn validated(self) -> Result<Self> {
        match self {
            CprModel::Constant { lambda } => Self::constant(lambda),
            CprModel::Rational { lambda_max, epsilon_star } => Self::rational(lambda_max, epsilon_star),
            CprModel::Logistic { alpha1, alpha2, alpha3, alpha4 } => {
                Self::logistic(alpha1, alpha2, alpha3, alpha4)
            }
        }
    }

    /// Annual CPR at incentive `epsilon = K - kappa`.
    pub fn evaluate(&self, epsilon: f64) -> f64 {
        match *self {
            CprModel::Constant { lambda } => lambda,
            CprModel::Rational { lambda_max, epsilon_star } => {
                if epsilon > epsilon_star { lambda_max } else { 0.0 }
            }
            CprModel::Logistic { alpha1, alpha2, alpha3, alpha4 } => {
                let e = (alpha3 * epsilon + alpha4).exp();
                (alpha1 + alpha2 / (1.0 + e)).clamp(0.0, 1.0)
            }
        }
    }

    /// Smallest and largest value the model can return.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            CprModel::Constant { lambda } => (lambda, lambda),
            CprModel::Rational { lambda_max, .. } => (0.0, lambda_max),
            CprModel::Logistic { alpha1, alpha2, .. } => {
                (alpha1.min(alpha1 + alpha2), alpha1.max(alpha1 + alpha2))
            }
        }
    }
}

fn check_unit(what: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::input(format!("{what} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// Loan-level record: balance at the start of a month and the amount
/// prepaid during it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoanObservation {
    /// Month as `YYYY-MM`.
    pub period: String,
    pub starting_balance: f64,
    pub prepaid_amount: f64,
    pub incentive: f64,
}

impl LoanObservation {
    pub fn validate(&self) -> Result<()> {
        let p = self.period.as_bytes();
        let well_formed = p.len() == 7
            && p[4] == b'-'
            && p[..4].iter().chain(&p[5..]).all(u8::is_ascii_digit)
            && matches!(self.period[5..].parse::<u8>(), Ok(1..=12));
        if !well_formed {
            return Err(Error::input(format!("period '{}' is not YYYY-MM", self.period)));
        }
        if !(self.starting_balance >= 0.0 && self.starting_balance.is_finite()) {
            return Err(Error::input(format!("negative or non-finite balance in {}", self.period)));
        }
        if !(self.prepaid_amount >= 0.0 && self.prepaid_amount <= self.starting_balance) {
            return Err(Error::input(format!(
                "prepaid amount {} outside [0, {}] in {}",
                self.prepaid_amount, self.starting_balance, self.period
            )));
        }
        if !self.incentive.is_finite() {
            return Err(Error::input(format!("non-finite incentive in {}", self.period)));
        }
        Ok(())
    }
}

/// Balance-weighted CPR per period: `SMM = sum prepaid / sum balance`.
pub fn empirical_cpr_timeseries(observations: &[LoanObservation]) -> Result<Vec<(String, f64)>> {
    let mut totals: std::collections::BTreeMap<&str, (f64, f64)> = Default::default();
    for obs in observations {
        obs.validate()?;
        let e = totals.entry(obs.period.as_str()).or_default();
        e.0 += obs.starting_balance;
        e.1 += obs.prepaid_amount;
    }
    let mut out = Vec::with_capacity(totals.len());
    for (period, (balance, prepaid)) in totals {
        if balance <= 0.0 {
            log::warn!("period {period} has zero aggregate balance; skipped");
            continue;
        }
        out.push((period.to_string(), smm_to_cpr(prepaid / balance)?));
    }
    Ok(out)
}

/// Equal-width incentive bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub n_bins: usize,
    pub lower: f64,
    pub upper: f64,
}

impl Default for BinSpec {
    fn default() -> Self {
        Self { n_bins: 56, lower: -0.015, upper: 0.04 }
    }
}

impl BinSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_bins == 0 || !(self.upper > self.lower) || !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(Error::input(format!(
                "bin range [{}, {}] with {} bins is invalid",
                self.lower, self.upper, self.n_bins
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        (self.upper - self.lower) / self.n_bins as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.n_bins).map(|b| self.lower + b as f64 * self.width()).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_bins).map(|b| self.lower + (b as f64 + 0.5) * self.width()).collect()
    }

    /// Bin of an incentive, `None` outside the closed range.
    pub fn index(&self, incentive: f64) -> Option<usize> {
        if !(incentive >= self.lower && incentive <= self.upper) {
            return None;
        }
        let b = ((incentive - self.lower) / self.width()).floor() as usize;
        Some(b.min(self.n_bins - 1))
    }
}

/// Per-bin annualized prepayment rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCpr {
    pub bin_edges: Vec<f64>,
    pub centers: Vec<f64>,
    /// `None` for empty bins.
    pub lambda_per_bin: Vec<Option<f64>>,
    pub counts: Vec<usize>,
    /// Observations outside the binning range.
    pub dropped: usize,
}

const BIN_CHUNK: usize = 8192;

/// Average loan-level SMM per incentive bin, annualized.
pub fn bin_observations(observations: &[LoanObservation], spec: &BinSpec) -> Result<BinnedCpr> {
    spec.validate()?;
    for obs in observations {
        obs.validate()?;
    }
    let n = spec.n_bins;
    // fixed chunks folded in order keep the sums independent of thread count
    let partials: Vec<(Vec<f64>, Vec<usize>, usize)> = observations
        .par_chunks(BIN_CHUNK)
        .map(|chunk| {
            let mut sums = vec![0.0; n];
            let mut counts = vec![0usize; n];
            let mut dropped = 0;
            for obs in chunk {
                if obs.starting_balance <= 0.0 {
                    dropped += 1;
                    continue;
                }
                match spec.index(obs.incentive) {
                    Some(b) => {
                        sums[b] += obs.prepaid_amount / obs.starting_balance;
                        counts[b] += 1;
                    }
                    None => dropped += 1,
                }
            }
            (sums, counts, dropped)
        })
        .collect();
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    let mut dropped = 0;
    for (s, c, d) in partials {
        for b in 0..n {
            sums[b] += s[b];
            counts[b] += c[b];
        }
        dropped += d;
    }
    if dropped > 0 {
        log::info!("{dropped} observations outside [{}, {}] dropped", spec.lower, spec.upper);
    }
    let lambda_per_bin = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c == 0 { Ok(None) } else { smm_to_cpr(s / c as f64).map(Some) })
        .collect::<Result<Vec<_>>>()?;
    Ok(BinnedCpr { bin_edges: spec.edges(), centers: spec.centers(), lambda_per_bin, counts, dropped })
}

/// Logistic curve fitted to binned CPRs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CprFit {
    pub binned: BinnedCpr,
    pub model: CprModel,
    pub alpha: [f64; 4],
    /// `Lambda_b - fitted(center_b)`, `None` for empty bins.
    pub residuals: Vec<Option<f64>>,
    pub objective: f64,
}

pub const FIT_TOLERANCE: f64 = 1e-10;

fn logistic_value(a: &[f64], eps: f64) -> f64 {
    a[0] + a[1] / (1.0 + (a[2] * eps + a[3]).exp())
}

/// Unweighted least-squares objective `sum_b (Lambda_b - logistic(center_b))^2`.
pub fn logistic_objective(binned: &BinnedCpr, alpha: &[f64; 4]) -> f64 {
    binned
        .centers
        .iter()
        .zip(&binned.lambda_per_bin)
        .filter_map(|(&c, l)| l.map(|l| (l - logistic_value(alpha, c)).powi(2)))
        .sum()
}

/// Fits the logistic curve to binned data by damped Gauss-Newton from
/// eight starting points.
pub fn fit_logistic(binned: &BinnedCpr) -> Result<CprFit> {
    let points: Vec<(f64, f64)> = binned
        .centers
        .iter()
        .zip(&binned.lambda_per_bin)
        .filter_map(|(&c, l)| l.map(|l| (c, l)))
        .collect();
    if points.len() < 4 {
        return Err(Error::input(format!(
            "logistic fit needs at least 4 non-empty bins, found {}",
            points.len()
        )));
    }
    let lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-4);
    let first = points[0].0;
    let last = points[points.len() - 1].0;

    let residuals = |a: &[f64], r: &mut [f64], jac: &mut [f64]| {
        for (k, &(eps, l)) in points.iter().enumerate() {
            let e = (a[2] * eps + a[3]).exp();
            let d = 1.0 + e;
            r[k] = a[0] + a[1] / d - l;
            let common = if e.is_finite() { -a[1] * e / (d * d) } else { 0.0 };
            jac[4 * k] = 1.0;
            jac[4 * k + 1] = 1.0 / d;
            jac[4 * k + 2] = common * eps;
            jac[4 * k + 3] = common;
        }
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    for &slope in &[-100.0, -300.0, -800.0, -2000.0] {
        for &frac in &[0.3, 0.6] {
            let mid = first + frac * (last - first);
            let start = [lo, span, slope, -slope * mid];
            let m = levenberg_marquardt(residuals, &start, points.len(), FIT_TOLERANCE, 500);
            if m.value.is_finite() && best.as_ref().is_none_or(|(v, _)| m.value < *v) {
                best = Some((m.value, m.x));
            }
        }
    }
    let (_, a) = best.ok_or_else(|| Error::numerical("logistic fit failed from every start"))?;
    let alpha = [a[0], a[1], a[2], a[3]];
    let model = CprModel::logistic(alpha[0], alpha[1], alpha[2], alpha[3]).map_err(|e| {
        Error::numerical(format!("fitted logistic is not a valid CPR curve: {e}"))
    })?;
    let residuals = binned
        .centers
        .iter()
        .zip(&binned.lambda_per_bin)
        .map(|(&c, l)| l.map(|l| l - logistic_value(&alpha, c)))
        .collect();
    Ok(CprFit {
        binned: binned.clone(),
        model,
        alpha,
        residuals,
        objective: logistic_objective(binned, &alpha),
    })
}

/// Binning followed by the logistic fit.
pub fn bin_and_fit(observations: &[LoanObservation], spec: &BinSpec) -> Result<CprFit> {
    let binned = bin_observations(observations, spec)?;
    fit_logistic(&binned)
}

/// Parameters of the synthetic loan-level data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticLoans {
    pub true_model: CprModel,
    pub start_year: u32,
    pub n_periods: usize,
    pub loans_per_period: usize,
    /// Incentives drawn uniformly from this range.
    pub incentive_range: (f64, f64),
    /// Log-mean and log-sd of the starting balance.
    pub balance_log_mean: f64,
    pub balance_log_sd: f64,
    /// Each loan is split into this many equal parts that prepay independently.
    pub parts_per_loan: u64,
    pub seed: u64,
}

impl Default for SyntheticLoans {
    fn default() -> Self {
        Self {
            true_model: CprModel::Logistic { alpha1: 0.06, alpha2: 0.10, alpha3: -200.0, alpha4: 3.0 },
            start_year: 2014,
            n_periods: 24,
            loans_per_period: 2000,
            incentive_range: (-0.02, 0.045),
            balance_log_mean: 12.0,
            balance_log_sd: 0.5,
            parts_per_loan: 200,
            seed: 20180123,
        }
    }
}

impl SyntheticLoans {
    pub fn generate(&self) -> Result<Vec<LoanObservation>> {
        self.true_model.validated()?;
        let (lo, hi) = self.incentive_range;
        if !(hi > lo) || self.parts_per_loan == 0 {
            return Err(Error::input("synthetic generator needs a non-empty incentive range and parts"));
        }
        let incentive = Uniform::new_inclusive(lo, hi).map_err(|e| Error::input(e.to_string()))?;
        let balance = LogNormal::new(self.balance_log_mean, self.balance_log_sd)
            .map_err(|e| Error::input(e.to_string()))?;
        let mut out = Vec::with_capacity(self.n_periods * self.loans_per_period);
        for p in 0..self.n_periods {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(p as u64);
            let year = self.start_year as usize + p / 12;
            let period = format!("{year:04}-{:02}", p % 12 + 1);
            for _ in 0..self.loans_per_period {
                let eps = incentive.sample(&mut rng);
                let b = (balance.sample(&mut rng) * 100.0).round() / 100.0;
                let smm = cpr_to_smm(self.true_model.evaluate(eps))?;
                let parts = Binomial::new(self.parts_per_loan, smm)
                    .map_err(|e| Error::input(e.to_string()))?
                    .sample(&mut rng);
                let prepaid = (b * parts as f64 / self.parts_per_loan as f64 * 100.0).round() / 100.0;
                out.push(LoanObservation {
                    period: period.clone(),
                    starting_balance: b,
                    prepaid_amount: prepaid.min(b),
                    incentive: (eps * 1e8).round() / 1e8,
                });
            }
        }
        Ok(out)
    }
}
