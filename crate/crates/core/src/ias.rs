//! Index amortizing swap valuation.
//!
//! The swap receives the mortgage rate `K` against Libor on a notional that
//! follows the mortgage amortization, with prepayment rates driven by the
//! incentive `K - kappa(T_i)` where `kappa` is the remaining-maturity swap
//! rate plus a spread. Period `i` pays at `T_i` on notional `N(T_{i-1})`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::YieldCurve;
use crate::error::{Error, Result};
use crate::mortgage::{notional_path, psi, scheduled_survival, MortgageKind, MortgageSpec};
use crate::prepayment::CprModel;
use crate::shortrate::{hw_floorlet_price, FactorPaths, HullWhite};

/// Everything needed to value one IAS by simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IasScenario {
    pub mortgage: MortgageSpec,
    pub cpr: CprModel,
    /// Spread added to the swap rate to obtain the market mortgage rate.
    pub zeta: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl IasScenario {
    pub fn validate(&self) -> Result<()> {
        self.mortgage.validate()?;
        self.cpr.validated()?;
        if !self.zeta.is_finite() {
            return Err(Error::input("incentive spread must be finite"));
        }
        if self.n_paths < 2 || !self.n_paths.is_multiple_of(2) {
            return Err(Error::input(format!("path count {} must be even and at least 2", self.n_paths)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        self.mortgage.grid()
    }

    pub fn maturity(&self) -> usize {
        self.mortgage.maturity_years as usize
    }
}

/// Log zero-coupon bond coefficients between every pair of grid dates:
/// `ln P(T_i, T_k | x) = intercept[i][k] - slope[i][k] x`.
#[derive(Debug, Clone)]
pub(crate) struct BondTable {
    n: usize,
    intercept: Vec<f64>,
    slope: Vec<f64>,
}

impl BondTable {
    pub(crate) fn new(model: &HullWhite, grid: &[f64]) -> Self {
        let n = grid.len();
        let mut intercept = vec![0.0; n * n];
        let mut slope = vec![0.0; n * n];
        for i in 0..n {
            for k in i..n {
                intercept[i * n + k] = model.log_bond_intercept(grid[i], grid[k]);
                slope[i * n + k] = model.b_tilde(grid[k] - grid[i]);
            }
        }
        Self { n, intercept, slope }
    }

    #[inline]
    pub(crate) fn bond(&self, i: usize, k: usize, x: f64) -> f64 {
        let idx = i * self.n + k;
        (self.intercept[idx] - self.slope[idx] * x).exp()
    }

    /// Annual par swap rate from `T_i` to `T_end` seen at `T_i`.
    pub(crate) fn swap_rate(&self, i: usize, end: usize, x: f64) -> f64 {
        let annuity: f64 = (i + 1..=end).map(|k| self.bond(i, k, x)).sum();
        (1.0 - self.bond(i, end, x)) / annuity
    }
}

/// Simulated notional trajectories and prepayment triggers.
#[derive(Debug, Clone, PartialEq)]
pub struct NotionalPaths {
    pub grid_times: Vec<f64>,
    pub n_paths: usize,
    /// Row-major `[n_paths x (M+1)]`, `N(T_0) = N_0` and `N(T_M) = 0`.
    pub notional: Vec<f64>,
    /// Row-major `[n_paths x (M+1)]`, `1{K > kappa(T_i)}` for `i = 1..M-1`.
    pub exercise: Vec<bool>,
}

impl NotionalPaths {
    pub fn maturity(&self) -> usize {
        self.grid_times.len() - 1
    }

    pub fn notional_at(&self, path: usize, i: usize) -> f64 {
        self.notional[path * self.grid_times.len() + i]
    }

    pub fn exercised(&self, path: usize, i: usize) -> bool {
        self.exercise[path * self.grid_times.len() + i]
    }

    /// Notional of period `k = 1..M` (paid at `T_k`), i.e. `N(T_{k-1})`.
    pub fn period_notional(&self, path: usize, k: usize) -> f64 {
        self.notional_at(path, k - 1)
    }
}

fn check_grid(scenario: &IasScenario, factors: &FactorPaths) -> Result<()> {
    if factors.grid() != scenario.grid().as_slice() {
        return Err(Error::input("factor paths must be simulated on the mortgage payment grid"));
    }
    Ok(())
}

/// Notional recursion `N(T_i) = N(T_{i-1}) psi(Lambda(T_i))` along each path.
pub fn simulate_notional(
    model: &HullWhite,
    scenario: &IasScenario,
    factors: &FactorPaths,
) -> Result<NotionalPaths> {
    scenario.validate()?;
    factors.check_model(model)?;
    check_grid(scenario, factors)?;
    let spec = scenario.mortgage;
    let m = scenario.maturity();
    let grid = scenario.grid();
    let bonds = BondTable::new(model, &grid);
    let cols = m + 1;
    let n = factors.n_paths();
    // scheduled survival per period: bullet 1, annuity 1 + K - C/N
    let survival: Vec<f64> =
        (0..m).map(|i| scheduled_survival(spec.kind, spec.rate, m as f64, i as f64)).collect();

    let mut notional = vec![0.0; n * cols];
    let mut exercise = vec![false; n * cols];
    notional
        .par_chunks_mut(cols)
        .zip(exercise.par_chunks_mut(cols))
        .enumerate()
        .for_each(|(j, (row, flags))| {
            row[0] = spec.notional;
            for i in 1..m {
                let kappa = bonds.swap_rate(i, m, factors.factor(j, i)) + scenario.zeta;
                let epsilon = spec.rate - kappa;
                flags[i] = epsilon > 0.0;
                let lambda = scenario.cpr.evaluate(epsilon);
                row[i] = row[i - 1] * survival[i - 1] * (1.0 - lambda);
            }
            row[m] = 0.0;
        });
    if let Some(j) = notional.iter().position(|v| !v.is_finite()) {
        return Err(Error::numerical(format!("non-finite notional on path {}", j / cols)));
    }
    Ok(NotionalPaths { grid_times: grid, n_paths: n, notional, exercise })
}

/// Monte Carlo estimate with the standard error over antithetic pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McPrice {
    pub value: f64,
    pub stderr: f64,
    pub n_paths: usize,
    /// Average of each antithetic pair, in path order.
    #[serde(skip)]
    pub pair_values: Vec<f64>,
}

impl McPrice {
    pub fn from_pairs(pair_values: Vec<f64>) -> Self {
        let n = pair_values.len() as f64;
        let mean = pair_values.iter().sum::<f64>() / n;
        let var = if pair_values.len() > 1 {
            pair_values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self { value: mean, stderr: (var / n).sqrt(), n_paths: 2 * pair_values.len(), pair_values }
    }
}

/// Pathwise `sum_i N(T_{i-1}) / M(T_i) (tau K - tau L(T_{i-1}))`.
pub fn price_ias_paths(
    model: &HullWhite,
    scenario: &IasScenario,
    factors: &FactorPaths,
    notionals: &NotionalPaths,
) -> Result<McPrice> {
    check_grid(scenario, factors)?;
    factors.check_model(model)?;
    let m = scenario.maturity();
    let grid = scenario.grid();
    let bonds = BondTable::new(model, &grid);
    let k = scenario.mortgage.rate;
    let path_value = |j: usize| -> f64 {
        (1..=m)
            .map(|i| {
                let libor_growth = 1.0 / bonds.bond(i - 1, i, factors.factor(j, i - 1));
                let discount = (-factors.log_money_market(model, j, i)).exp();
                notionals.notional_at(j, i - 1) * discount * (1.0 + k - libor_growth)
            })
            .sum()
    };
    let pairs: Vec<f64> = (0..factors.n_paths() / 2)
        .into_par_iter()
        .map(|p| 0.5 * (path_value(2 * p) + path_value(2 * p + 1)))
        .collect();
    if let Some(p) = pairs.iter().position(|v| !v.is_finite()) {
        return Err(Error::numerical(format!("non-finite IAS value on path {}", 2 * p)));
    }
    Ok(McPrice::from_pairs(pairs))
}

/// Simulates factors and notionals and prices the IAS.
pub fn price_ias_mc(model: &HullWhite, scenario: &IasScenario) -> Result<McPrice> {
    scenario.validate()?;
    let factors = FactorPaths::simulate(model, &scenario.grid(), scenario.n_paths, scenario.seed)?;
    let notionals = simulate_notional(model, scenario, &factors)?;
    price_ias_paths(model, scenario, &factors, &notionals)
}

/// Amortizing swap receiving `strike` with notional `period_notionals[k-1]`
/// over `(T_{k-1}, T_k]`, `k = 1..M`, on yearly dates.
pub fn price_amortizing_swap(curve: &YieldCurve, strike: f64, period_notionals: &[f64]) -> Result<f64> {
    let mut value = 0.0;
    let mut prev = 1.0;
    for (k, &n) in period_notionals.iter().enumerate() {
        let df = curve.discount((k + 1) as f64)?;
        value += n * (df * (1.0 + strike) - prev);
        prev = df;
    }
    Ok(value)
}

/// Amortizing swap whose notional follows the mortgage under deterministic
/// prepayment rates `cpr[i-1] = Lambda(T_i)`, `i = 1..M-1`.
pub fn price_deterministic_as(curve: &YieldCurve, spec: &MortgageSpec, cpr: &[f64]) -> Result<f64> {
    if let Some(l) = cpr.iter().find(|l| !(0.0..1.0).contains(*l)) {
        return Err(Error::input(format!("prepayment rate {l} outside [0, 1)")));
    }
    let path = notional_path(spec, cpr)?;
    price_amortizing_swap(curve, spec.rate, &path[..path.len() - 1])
}

/// Mortgage rate at which the prepayment-free amortizing swap is worth zero.
pub fn par_mortgage_rate(curve: &YieldCurve, kind: MortgageKind, maturity_years: u32) -> Result<f64> {
    let m = f64::from(maturity_years);
    if kind == MortgageKind::Bullet {
        return curve.swap_rate(0.0, m, 1);
    }
    let zero = vec![0.0; maturity_years.saturating_sub(1) as usize];
    let value = |k: f64| -> Result<f64> {
        price_deterministic_as(curve, &MortgageSpec::new(kind, 1.0, k, maturity_years)?, &zero)
    };
    let (mut lo, mut hi) = (-0.2, 0.5);
    if value(lo)? > 0.0 || value(hi)? < 0.0 {
        return Err(Error::numerical("par mortgage rate not bracketed in [-20%, 50%]"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if value(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two-period annuity IAS with a rational trigger at zero incentive:
/// the amortizing swap on the no-prepayment notional minus
/// `(N^Up - N^Low)` floorlets on the second period.
pub fn price_two_period_closed_form(model: &HullWhite, spec: &MortgageSpec, cpr: &CprModel) -> Result<f64> {
    spec.validate()?;
    let CprModel::Rational { lambda_max, epsilon_star } = *cpr else {
        return Err(Error::input("two-period closed form needs the rational prepayment model"));
    };
    if spec.maturity_years != 2 || spec.kind != MortgageKind::Annuity || epsilon_star != 0.0 {
        return Err(Error::input(
            "two-period closed form needs a 2y annuity and a rational trigger at zero incentive",
        ));
    }
    let n0 = spec.notional;
    let n_up = n0 * psi(spec.kind, spec.rate, 0.0, 2.0, 0.0)?;
    let n_low = n0 * psi(spec.kind, spec.rate, lambda_max, 2.0, 0.0)?;
    let swap = price_amortizing_swap(model.curve(), spec.rate, &[n0, n_up])?;
    let floorlet = hw_floorlet_price(model, 1.0, 2.0, spec.rate)?;
    Ok(swap - (n_up - n_low) * floorlet)
}

/// Mean notional per date and the constant-per-period prepayment rates
/// that reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageNotional {
    pub mean: Vec<f64>,
    /// `implied_cpr[i-1]` solves `mean[i] = mean[i-1] psi(Lambda)`, `i = 1..M-1`.
    pub implied_cpr: Vec<f64>,
}

pub fn average_notional(paths: &NotionalPaths, spec: &MortgageSpec) -> Result<AverageNotional> {
    if paths.n_paths == 0 {
        return Err(Error::input("average notional needs at least one path"));
    }
    let cols = paths.grid_times.len();
    let m = cols - 1;
    let mean: Vec<f64> = (0..cols)
        .map(|i| (0..paths.n_paths).map(|j| paths.notional_at(j, i)).sum::<f64>() / paths.n_paths as f64)
        .collect();
    let implied_cpr = (1..m)
        .map(|i| {
            let survival = scheduled_survival(spec.kind, spec.rate, m as f64, (i - 1) as f64);
            if mean[i - 1] <= 0.0 || survival <= 0.0 {
                0.0
            } else {
                (1.0 - mean[i] / (mean[i - 1] * survival)).clamp(0.0, 1.0)
            }
        })
        .collect();
    Ok(AverageNotional { mean, implied_cpr })
}
