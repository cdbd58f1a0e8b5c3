//! Bump-and-reprice sensitivities with common random numbers.
//!
//! Delta and Gamma bump one spot swap quote at a time by `+-h`, re-bootstrap
//! the curve and reprice with the Hull-White parameters held fixed, so
//! Monte Carlo valuations reuse the same factor paths. Vega bumps one
//! calibration vol by `+h`, recalibrates `(lambda, eta)` and reprices with the
//! same seed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{SwapQuote, YieldCurve};
use crate::error::{Error, Result};
use crate::hedge::{calibrate_gamma, price_portfolio, HedgePortfolio, SwaptionGrid};
use crate::ias::{price_ias_paths, simulate_notional, IasScenario};
use crate::shortrate::{calibrate_hw, FactorPaths, HullWhite, JamshidianSwaption, SwaptionKind, SwaptionQuote};

pub const DEFAULT_BUMP: f64 = 1e-4;

/// Greeks are reported per one million of notional.
pub const REPORTING_NOTIONAL: f64 = 1e6;

/// A value with optional antithetic-pair samples for error estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct Valuation {
    pub value: f64,
    pub pair_values: Vec<f64>,
}

impl Valuation {
    pub fn exact(value: f64) -> Self {
        Self { value, pair_values: vec![] }
    }
}

/// Sensitivities per bucket in currency per bp (or bp^2) per million notional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreekProfile {
    pub labels: Vec<String>,
    pub values: Vec<f64>,
    /// Monte Carlo standard error per bucket; zero for analytic valuations.
    pub stderr: Vec<f64>,
    pub h: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl GreekProfile {
    /// Bucket with the largest absolute value.
    pub fn max_bucket(&self) -> Option<usize> {
        (0..self.values.len()).max_by(|&a, &b| self.values[a].abs().total_cmp(&self.values[b].abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Curve with quote `bucket` (or every quote when `None`) shifted by `shift`.
pub fn bumped_curve(quotes: &[SwapQuote], bucket: Option<usize>, shift: f64) -> Result<YieldCurve> {
    let bumped: Vec<SwapQuote> = quotes
        .iter()
        .enumerate()
        .map(|(b, q)| {
            let hit = bucket.is_none_or(|target| target == b);
            SwapQuote { par_rate: if hit { q.par_rate + shift } else { q.par_rate }, ..*q }
        })
        .collect();
    YieldCurve::bootstrap(&bumped).map_err(|e| {
        let what = bucket.map_or("parallel shift".to_string(), |b| format!("{}y quote", quotes[b].maturity_years));
        match e {
            Error::Input(msg) => Error::Input(format!("bump of {what}: {msg}")),
            Error::Numerical(msg) => Error::Numerical(format!("bump of {what}: {msg}")),
            other => other,
        }
    })
}

fn pair_stderr(samples: &[Vec<f64>], weights: &[f64]) -> f64 {
    if samples.iter().any(|s| s.is_empty()) {
        return 0.0;
    }
    let n = samples[0].len();
    if n < 2 {
        return 0.0;
    }
    let combo: Vec<f64> = (0..n).map(|p| samples.iter().zip(weights).map(|(s, w)| w * s[p]).sum()).collect();
    let mean = combo.iter().sum::<f64>() / n as f64;
    let var = combo.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    (var / n as f64).sqrt()
}

/// Delta and Gamma profiles over the spot swap quotes.
///
/// `scale` converts a valuation in currency into the reporting unit, e.g.
/// `REPORTING_NOTIONAL / N_0`.
pub fn delta_gamma_profile<F>(
    quotes: &[SwapQuote],
    lambda: f64,
    eta: f64,
    h: f64,
    scale: f64,
    valuer: F,
) -> Result<(GreekProfile, GreekProfile)>
where
    F: Fn(&HullWhite) -> Result<Valuation> + Sync,
{
    if !(h > 0.0) {
        return Err(Error::input("bump size must be positive"));
    }
    let base_model = HullWhite::new(lambda, eta, YieldCurve::bootstrap(quotes)?)?;
    let base = valuer(&base_model)?;
    let bumps: Vec<(Valuation, Valuation)> = (0..quotes.len())
        .into_par_iter()
        .map(|b| {
            let up = valuer(&base_model.with_curve(bumped_curve(quotes, Some(b), h)?))?;
            let down = valuer(&base_model.with_curve(bumped_curve(quotes, Some(b), -h)?))?;
            Ok((up, down))
        })
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<String> = quotes.iter().map(|q| format!("{}y", q.maturity_years)).collect();
    let n_paths = 2 * base.pair_values.len();
    let d_scale = 1e-4 * scale / (2.0 * h);
    let g_scale = 1e-8 * scale / (h * h);
    let delta = GreekProfile {
        labels: labels.clone(),
        values: bumps.iter().map(|(u, d)| (u.value - d.value) * d_scale).collect(),
        stderr: bumps
            .iter()
            .map(|(u, d)| pair_stderr(&[u.pair_values.clone(), d.pair_values.clone()], &[d_scale, -d_scale]))
            .collect(),
        h,
        n_paths,
        seed: 0,
    };
    let gamma = GreekProfile {
        labels,
        values: bumps.iter().map(|(u, d)| (u.value - 2.0 * base.value + d.value) * g_scale).collect(),
        stderr: bumps
            .iter()
            .map(|(u, d)| {
                pair_stderr(
                    &[u.pair_values.clone(), base.pair_values.clone(), d.pair_values.clone()],
                    &[g_scale, -2.0 * g_scale, g_scale],
                )
            })
            .collect(),
        h,
        n_paths,
        seed: 0,
    };
    Ok((delta, gamma))
}

/// Delta to a simultaneous shift of every quote.
pub fn parallel_delta<F>(quotes: &[SwapQuote], lambda: f64, eta: f64, h: f64, scale: f64, valuer: F) -> Result<f64>
where
    F: Fn(&HullWhite) -> Result<Valuation>,
{
    let base = HullWhite::new(lambda, eta, YieldCurve::bootstrap(quotes)?)?;
    let up = valuer(&base.with_curve(bumped_curve(quotes, None, h)?))?;
    let down = valuer(&base.with_curve(bumped_curve(quotes, None, -h)?))?;
    Ok((up.value - down.value) * 1e-4 * scale / (2.0 * h))
}

/// Forward-difference Vega per calibration quote with recalibration.
pub fn vega_profile<F>(
    curve: &YieldCurve,
    vol_quotes: &[SwaptionQuote],
    h: f64,
    scale: f64,
    valuer: F,
) -> Result<GreekProfile>
where
    F: Fn(&HullWhite) -> Result<Valuation> + Sync,
{
    if !(h > 0.0) {
        return Err(Error::input("bump size must be positive"));
    }
    let base_model = calibrate_hw(curve, vol_quotes)?.model;
    let base = valuer(&base_model)?;
    let bumped: Vec<Valuation> = (0..vol_quotes.len())
        .into_par_iter()
        .map(|b| {
            let mut quotes = vol_quotes.to_vec();
            quotes[b].normal_vol += h;
            let model = calibrate_hw(curve, &quotes)
                .map_err(|e| Error::numerical(format!("recalibration after bumping {}: {e}", quotes[b].label())))?
                .model;
            valuer(&model)
        })
        .collect::<Result<Vec<_>>>()?;
    let v_scale = 1e-4 * scale / h;
    Ok(GreekProfile {
        labels: vol_quotes.iter().map(SwaptionQuote::label).collect(),
        values: bumped.iter().map(|v| (v.value - base.value) * v_scale).collect(),
        stderr: bumped
            .iter()
            .map(|v| pair_stderr(&[v.pair_values.clone(), base.pair_values.clone()], &[v_scale, -v_scale]))
            .collect(),
        h,
        n_paths: 2 * base.pair_values.len(),
        seed: 0,
    })
}

/// Monte Carlo IAS valuer. Factor paths are simulated once per
/// `(lambda, eta)` with the scenario seed, so every bump shares them.
pub struct IasValuer {
    scenario: IasScenario,
    cache: std::sync::Mutex<Vec<std::sync::Arc<FactorPaths>>>,
}

impl IasValuer {
    pub fn new(scenario: IasScenario) -> Result<Self> {
        scenario.validate()?;
        Ok(Self { scenario, cache: Default::default() })
    }

    pub fn scenario(&self) -> &IasScenario {
        &self.scenario
    }

    fn factors(&self, model: &HullWhite) -> Result<std::sync::Arc<FactorPaths>> {
        {
            let cache = self.cache.lock().expect("factor cache poisoned");
            if let Some(f) = cache.iter().find(|f| f.check_model(model).is_ok()) {
                return Ok(f.clone());
            }
        }
        let sc = &self.scenario;
        let fresh = std::sync::Arc::new(FactorPaths::simulate(model, &sc.grid(), sc.n_paths, sc.seed)?);
        let mut cache = self.cache.lock().expect("factor cache poisoned");
        if let Some(f) = cache.iter().find(|f| f.check_model(model).is_ok()) {
            return Ok(f.clone());
        }
        cache.push(fresh.clone());
        Ok(fresh)
    }

    pub fn value(&self, model: &HullWhite) -> Result<Valuation> {
        let factors = self.factors(model)?;
        let notionals = simulate_notional(model, &self.scenario, &factors)?;
        let price = price_ias_paths(model, &self.scenario, &factors, &notionals)?;
        Ok(Valuation { value: price.value, pair_values: price.pair_values })
    }

    /// Drops cached paths of other parameter sets.
    pub fn clear(&self) {
        self.cache.lock().expect("factor cache poisoned").clear();
    }
}

/// Analytic valuer for a fixed hedge portfolio.
pub fn portfolio_valuer(portfolio: &HedgePortfolio) -> impl Fn(&HullWhite) -> Result<Valuation> + Sync + '_ {
    move |model| Ok(Valuation::exact(price_portfolio(model, portfolio)?.value))
}

/// Marks a profile with the Monte Carlo metadata of a scenario.
pub fn with_metadata(mut profile: GreekProfile, scenario: &IasScenario) -> GreekProfile {
    profile.n_paths = scenario.n_paths;
    profile.seed = scenario.seed;
    profile
}

/// Swaption weights fitted to the IAS Gamma next to the value-calibrated ones.
#[derive(Debug, Clone)]
pub struct GammaHedge {
    pub value_weights: SwaptionGrid,
    pub gamma_weights: SwaptionGrid,
    /// `(w* + w*_Gamma) / 2`.
    pub averaged: SwaptionGrid,
    pub gamma_ias: GreekProfile,
    pub gamma_ladder: GreekProfile,
    /// Gamma of one long unit of each swaption cell, per bucket.
    pub gamma_swaptions: Vec<Vec<f64>>,
}

impl GammaHedge {
    /// Gamma of the ladder short the given swaption weights.
    pub fn portfolio_gamma(&self, weights: &SwaptionGrid) -> Vec<f64> {
        let cells = &self.value_weights.cells;
        (0..self.gamma_ladder.values.len())
            .map(|b| {
                let options: f64 = cells
                    .iter()
                    .zip(&self.gamma_swaptions)
                    .map(|(c, g)| {
                        let w = weights.cells.iter().position(|x| x == c).map_or(0.0, |p| weights.weights[p]);
                        w * g[b]
                    })
                    .sum();
                self.gamma_ladder.values[b] - options
            })
            .collect()
    }

    /// `|Gamma_IAS - Gamma_Pi(w)|_2`.
    pub fn gamma_error(&self, weights: &SwaptionGrid) -> f64 {
        self.portfolio_gamma(weights)
            .iter()
            .zip(&self.gamma_ias.values)
            .map(|(p, i)| (i - p).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Refits the swaption weights of a value-calibrated portfolio to the IAS
/// Gamma profile over the curve quotes, keeping its ladder and cells.
pub fn gamma_hedge(
    quotes: &[SwapQuote],
    model: &HullWhite,
    scenario: &IasScenario,
    value_calibrated: &HedgePortfolio,
    h: f64,
) -> Result<GammaHedge> {
    let scale = REPORTING_NOTIONAL / scenario.mortgage.notional;
    let (lambda, eta) = (model.lambda(), model.eta());
    let valuer = IasValuer::new(scenario.clone())?;
    let (_, gamma_ias) = delta_gamma_profile(quotes, lambda, eta, h, scale, |m| valuer.value(m))?;
    let ladder = value_calibrated.with_swaptions(SwaptionGrid::empty(value_calibrated.maturity()));
    let (_, gamma_ladder) = delta_gamma_profile(quotes, lambda, eta, h, scale, portfolio_valuer(&ladder))?;
    let strike = value_calibrated.strike;
    let cells = value_calibrated.swaptions.cells.clone();
    let gamma_swaptions = cells
        .iter()
        .map(|c| {
            let unit = |m: &HullWhite| -> Result<Valuation> {
                let s = JamshidianSwaption::new(
                    m,
                    c.start as f64,
                    (c.end - c.start) as f64,
                    strike,
                    SwaptionKind::Receiver,
                )?;
                Ok(Valuation::exact(s.price(m)))
            };
            Ok(delta_gamma_profile(quotes, lambda, eta, h, scale, unit)?.1.values)
        })
        .collect::<Result<Vec<_>>>()?;
    let gamma_weights = calibrate_gamma(
        &gamma_ias.values,
        &gamma_ladder.values,
        &gamma_swaptions,
        &cells,
        value_calibrated.maturity(),
    )?;
    let averaged = value_calibrated.swaptions.combine(0.5, &gamma_weights, 0.5);
    Ok(GammaHedge {
        value_weights: value_calibrated.swaptions.clone(),
        gamma_weights,
        averaged,
        gamma_ias: with_metadata(gamma_ias, scenario),
        gamma_ladder,
        gamma_swaptions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hedge::SwaptionGrid;

    fn quotes() -> Vec<SwapQuote> {
        [(1, 0.002), (2, 0.003), (3, 0.004), (5, 0.006), (7, 0.008), (10, 0.01), (12, 0.011)]
            .iter()
            .map(|&(m, r)| SwapQuote::annual(m, r))
            .collect()
    }

    #[test]
    fn receiver_swap_delta_is_minus_annuity() {
        let q = quotes();
        let curve = YieldCurve::bootstrap(&q).unwrap();
        let k = curve.swap_rate(0.0, 10.0, 1).unwrap();
        let swap = HedgePortfolio { strike: k, ladder: vec![1.0; 10], swaptions: SwaptionGrid::empty(10) };
        let (delta, gamma) =
            delta_gamma_profile(&q, 0.264, 0.017, DEFAULT_BUMP, 1e4, portfolio_valuer(&swap)).unwrap();
        let annuity = curve.annuity(0.0, 10.0, 1).unwrap();
        let ten = q.iter().position(|x| x.maturity_years == 10).unwrap();
        assert!((delta.values[ten] / -annuity - 1.0).abs() < 1e-3, "{} vs {}", delta.values[ten], -annuity);
        for (b, d) in delta.values.iter().enumerate() {
            if b != ten {
                assert!(d.abs() < 1e-3 * annuity, "bucket {b}: {d}");
            }
        }
        assert!(gamma.max_abs() < 1e-2 * annuity);
    }

    #[test]
    fn swap_ladder_has_no_vega() {
        let q = quotes();
        let curve = YieldCurve::bootstrap(&q).unwrap();
        let ladder = HedgePortfolio { strike: 0.01, ladder: vec![1.0, 0.9, 0.8], swaptions: SwaptionGrid::empty(3) };
        let vols = [
            SwaptionQuote::new(1.0, 5.0, 0.005).unwrap(),
            SwaptionQuote::new(3.0, 3.0, 0.006).unwrap(),
            SwaptionQuote::new(5.0, 2.0, 0.0065).unwrap(),
        ];
        let vega = vega_profile(&curve, &vols, DEFAULT_BUMP, 1e6, portfolio_valuer(&ladder)).unwrap();
        assert!(vega.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn bumping_reports_instrument() {
        let q = vec![SwapQuote::annual(1, -0.99989)];
        let err = bumped_curve(&q, Some(0), -0.0002).unwrap_err();
        assert!(err.to_string().contains("1y quote"), "{err}");
    }
}
