//! Static hedges of an IAS with co-terminal swaps and receiver swaptions.
//!
//! Notionals are indexed by payment period `k = 1..M` (period `k` pays at
//! `T_k` on `N(T_{k-1})`). A receiver swaption `(i, l)` expires at `T_i` and,
//! when the prepayment trigger fires at `T_i`, covers periods `i+1..=l`. A
//! portfolio short `w_{i,l}` of them has notional
//! `N_Pi(k) = N_AS(k) - sum_{i < k <= l} w_{i,l} 1_i` on top of a swap
//! ladder `N_AS`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ias::{BondTable, IasScenario, NotionalPaths};
use crate::optim::{min_norm_least_squares, nonnegative_normal_equations};
use crate::shortrate::{receiver_swap_value_at, FactorPaths, HullWhite, JamshidianSwaption, SwaptionKind};

/// Receiver swaption expiring at `T_start` on the swap `T_start -> T_end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SwaptionCell {
    pub start: usize,
    pub end: usize,
}

impl SwaptionCell {
    pub fn label(&self) -> String {
        format!("{}Y-{}Y", self.start, self.end - self.start)
    }

    pub fn covers(&self, period: usize) -> bool {
        self.start < period && period <= self.end
    }
}

/// Which swaptions a calibration may use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActiveSet {
    /// Co-terminal swaptions `(i, M)`, `i = 1..M-1`.
    Diagonal,
    /// Every `(i, l)` with `1 <= i < l <= M`.
    Full,
    Cells(Vec<SwaptionCell>),
}

impl ActiveSet {
    pub fn single(start: usize, end: usize) -> Self {
        ActiveSet::Cells(vec![SwaptionCell { start, end }])
    }

    pub fn cells(&self, maturity: usize) -> Result<Vec<SwaptionCell>> {
        let cells = match self {
            ActiveSet::Diagonal => (1..maturity).map(|i| SwaptionCell { start: i, end: maturity }).collect(),
            ActiveSet::Full => (1..maturity)
                .flat_map(|i| (i + 1..=maturity).map(move |l| SwaptionCell { start: i, end: l }))
                .collect(),
            ActiveSet::Cells(c) => c.clone(),
        };
        if cells.is_empty() {
            return Err(Error::input("active swaption set is empty"));
        }
        for c in &cells {
            if !(c.start >= 1 && c.start < c.end && c.end <= maturity) {
                return Err(Error::input(format!(
                    "swaption cell ({}, {}) outside the grid of a {maturity}y mortgage",
                    c.start, c.end
                )));
            }
        }
        Ok(cells)
    }
}

/// Swaption weights on a set of grid cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwaptionGrid {
    pub maturity: usize,
    pub cells: Vec<SwaptionCell>,
    pub weights: Vec<f64>,
}

impl SwaptionGrid {
    pub fn empty(maturity: usize) -> Self {
        Self { maturity, cells: vec![], weights: vec![] }
    }

    /// Weight reduction on period `k` given the exercise flags of a path.
    fn reduction(&self, k: usize, flag: impl Fn(usize) -> bool) -> f64 {
        self.cells
            .iter()
            .zip(&self.weights)
            .filter(|(c, _)| c.covers(k) && flag(c.start))
            .map(|(_, w)| w)
            .sum()
    }

    /// Weights laid out as an `(M-1) x M` matrix `w[i-1][l-1]`.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.maturity]; self.maturity.saturating_sub(1)];
        for (c, w) in self.cells.iter().zip(&self.weights) {
            out[c.start - 1][c.end - 1] += w;
        }
        out
    }

    /// `a w1 + b w2` on the union of cells.
    pub fn combine(&self, a: f64, other: &SwaptionGrid, b: f64) -> SwaptionGrid {
        let mut cells = self.cells.clone();
        for c in &other.cells {
            if !cells.contains(c) {
                cells.push(*c);
            }
        }
        cells.sort();
        let weight = |g: &SwaptionGrid, c: &SwaptionCell| {
            g.cells.iter().position(|x| x == c).map_or(0.0, |p| g.weights[p])
        };
        let weights = cells.iter().map(|c| a * weight(self, c) + b * weight(other, c)).collect();
        SwaptionGrid { maturity: self.maturity.max(other.maturity), cells, weights }
    }
}

/// Swap ladder plus short receiver swaptions, all struck at `strike`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HedgePortfolio {
    pub strike: f64,
    /// Ladder notional of period `k` at index `k-1`.
    pub ladder: Vec<f64>,
    pub swaptions: SwaptionGrid,
}

impl HedgePortfolio {
    pub fn maturity(&self) -> usize {
        self.ladder.len()
    }

    /// Notionals of the delayed-start co-terminal swaps: the swap starting at
    /// `T_{i-1}` carries `ladder[i-1] - ladder[i-2]`.
    pub fn ladder_increments(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.ladder
            .iter()
            .map(|&n| {
                let d = n - prev;
                prev = n;
                d
            })
            .collect()
    }

    /// Same ladder and swaptions with new weights.
    pub fn with_swaptions(&self, swaptions: SwaptionGrid) -> Self {
        Self { swaptions, ..self.clone() }
    }
}

/// Mean notional per period `k = 1..M`.
pub fn average_period_notional(paths: &NotionalPaths) -> Vec<f64> {
    let m = paths.maturity();
    (1..=m)
        .map(|k| (0..paths.n_paths).map(|j| paths.period_notional(j, k)).sum::<f64>() / paths.n_paths as f64)
        .collect()
}

/// Pathwise maximum notional per period `k = 1..M`.
pub fn upper_envelope(paths: &NotionalPaths) -> Result<Vec<f64>> {
    if paths.n_paths == 0 {
        return Err(Error::input("upper envelope needs at least one path"));
    }
    let m = paths.maturity();
    Ok((1..=m)
        .map(|k| (0..paths.n_paths).map(|j| paths.period_notional(j, k)).fold(f64::NEG_INFINITY, f64::max))
        .collect())
}

/// Linear hedge: swap ladder on the average notional, no swaptions.
pub fn build_linear_hedge(paths: &NotionalPaths, strike: f64) -> HedgePortfolio {
    HedgePortfolio {
        strike,
        ladder: average_period_notional(paths),
        swaptions: SwaptionGrid::empty(paths.maturity()),
    }
}

/// Hedge notional of period `k` on path `j`.
pub fn portfolio_notional(paths: &NotionalPaths, portfolio: &HedgePortfolio, k: usize, j: usize) -> f64 {
    portfolio.ladder[k - 1] - portfolio.swaptions.reduction(k, |i| paths.exercised(j, i))
}

/// Sufficient statistics of the quadratic hedge objective.
///
/// `co[i][i'] = sum_j 1_i 1_i'` and `gap[i][k] = sum_j 1_i (N_AS(k) - n_j(k))`
/// for exercise dates `i = 1..M-1` and periods `k = 1..M`.
#[derive(Debug, Clone)]
pub struct HedgeStatistics {
    pub maturity: usize,
    pub n_paths: usize,
    pub envelope: Vec<f64>,
    pub co_exercise: DMatrix<f64>,
    pub gap: DMatrix<f64>,
}

const STAT_CHUNK: usize = 1024;

impl HedgeStatistics {
    pub fn new(paths: &NotionalPaths, envelope: &[f64]) -> Result<Self> {
        let m = paths.maturity();
        if envelope.len() != m {
            return Err(Error::input("envelope length must equal the number of periods"));
        }
        let n = paths.n_paths;
        let chunks: Vec<(DMatrix<f64>, DMatrix<f64>)> = (0..n.div_ceil(STAT_CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut co = DMatrix::zeros(m - 1, m - 1);
                let mut gap = DMatrix::zeros(m - 1, m);
                for j in c * STAT_CHUNK..((c + 1) * STAT_CHUNK).min(n) {
                    let flags: Vec<usize> = (1..m).filter(|&i| paths.exercised(j, i)).collect();
                    for &i in &flags {
                        for &i2 in &flags {
                            co[(i - 1, i2 - 1)] += 1.0;
                        }
                        for k in 1..=m {
                            gap[(i - 1, k - 1)] += envelope[k - 1] - paths.period_notional(j, k);
                        }
                    }
                }
                (co, gap)
            })
            .collect();
        let mut co_exercise = DMatrix::zeros(m - 1, m - 1);
        let mut gap = DMatrix::zeros(m - 1, m);
        for (c, g) in chunks {
            co_exercise += c;
            gap += g;
        }
        Ok(Self { maturity: m, n_paths: n, envelope: envelope.to_vec(), co_exercise, gap })
    }

    /// Normal equations `G w = h` of the objective restricted to `cells`.
    pub fn normal_equations(&self, cells: &[SwaptionCell]) -> (DMatrix<f64>, DVector<f64>) {
        let g = DMatrix::from_fn(cells.len(), cells.len(), |a, b| {
            let (ca, cb) = (cells[a], cells[b]);
            let lo = ca.start.max(cb.start);
            let hi = ca.end.min(cb.end);
            let overlap = hi.saturating_sub(lo) as f64;
            overlap * self.co_exercise[(ca.start - 1, cb.start - 1)]
        });
        let h = DVector::from_fn(cells.len(), |a, _| {
            let c = cells[a];
            (c.start + 1..=c.end).map(|k| self.gap[(c.start - 1, k - 1)]).sum()
        });
        (g, h)
    }

    /// The co-terminal system written out entry by entry:
    /// `A_{ii'} = (M - max(i,i')) sum_j 1_i 1_i'`, `b_i = sum_{k>i} gap[i][k]`.
    pub fn diagonal_system(&self) -> (DMatrix<f64>, DVector<f64>) {
        let m = self.maturity;
        let a = DMatrix::from_fn(m - 1, m - 1, |r, c| {
            (m - (r + 1).max(c + 1)) as f64 * self.co_exercise[(r, c)]
        });
        let b = DVector::from_fn(m - 1, |r, _| (r + 2..=m).map(|k| self.gap[(r, k - 1)]).sum());
        (a, b)
    }
}

/// Weights minimizing the mean squared notional mismatch.
#[derive(Debug, Clone)]
pub struct HedgeCalibration {
    pub portfolio: HedgePortfolio,
    /// `F(w*) = sum_k mean_j (n_j(k) - N_Pi_j(k))^2`.
    pub objective: f64,
    /// Per-period mean squared mismatch.
    pub residual_profile: Vec<f64>,
    pub rank: usize,
    pub null_directions: Vec<Vec<f64>>,
}

const RANK_TOLERANCE: f64 = 1e-12;

fn finish(
    paths: &NotionalPaths,
    portfolio: HedgePortfolio,
    rank: usize,
    null_directions: Vec<Vec<f64>>,
) -> HedgeCalibration {
    let residual_profile = mismatch_profile(paths, &portfolio);
    if !null_directions.is_empty() {
        log::warn!(
            "hedge system is rank deficient ({} null directions); minimum-norm weights returned",
            null_directions.len()
        );
    }
    HedgeCalibration {
        objective: residual_profile.iter().sum(),
        portfolio,
        residual_profile,
        rank,
        null_directions,
    }
}

/// Co-terminal swaption weights from the closed-form linear system.
pub fn calibrate_diagonal(paths: &NotionalPaths, strike: f64) -> Result<HedgeCalibration> {
    let envelope = upper_envelope(paths)?;
    let stats = HedgeStatistics::new(paths, &envelope)?;
    let (a, b) = stats.diagonal_system();
    let ls = min_norm_least_squares(&a, &b, RANK_TOLERANCE)?;
    let m = paths.maturity();
    let portfolio = HedgePortfolio {
        strike,
        ladder: envelope,
        swaptions: SwaptionGrid {
            maturity: m,
            cells: ActiveSet::Diagonal.cells(m)?,
            weights: ls.solution,
        },
    };
    Ok(finish(paths, portfolio, ls.rank, ls.null_directions))
}

/// Weights on an arbitrary active set; `no_short` restricts to `w >= 0`.
pub fn calibrate_numeric(
    paths: &NotionalPaths,
    strike: f64,
    active: &ActiveSet,
    no_short: bool,
) -> Result<HedgeCalibration> {
    let m = paths.maturity();
    let cells = active.cells(m)?;
    let envelope = upper_envelope(paths)?;
    let stats = HedgeStatistics::new(paths, &envelope)?;
    let (g, h) = stats.normal_equations(&cells);
    let (weights, rank, null_directions) = if no_short {
        let w = nonnegative_normal_equations(&g, &h)?;
        (w, cells.len(), vec![])
    } else {
        let ls = min_norm_least_squares(&g, &h, RANK_TOLERANCE)?;
        (ls.solution, ls.rank, ls.null_directions)
    };
    let portfolio = HedgePortfolio {
        strike,
        ladder: envelope,
        swaptions: SwaptionGrid { maturity: m, cells, weights },
    };
    Ok(finish(paths, portfolio, rank, null_directions))
}

/// Per-period mean squared difference between IAS and hedge notionals.
pub fn mismatch_profile(paths: &NotionalPaths, portfolio: &HedgePortfolio) -> Vec<f64> {
    let m = paths.maturity();
    let n = paths.n_paths;
    let chunks: Vec<Vec<f64>> = (0..n.div_ceil(STAT_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; m];
            for j in c * STAT_CHUNK..((c + 1) * STAT_CHUNK).min(n) {
                for k in 1..=m {
                    let d = paths.period_notional(j, k) - portfolio_notional(paths, portfolio, k, j);
                    acc[k - 1] += d * d;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; m];
    for c in chunks {
        for k in 0..m {
            total[k] += c[k];
        }
    }
    total.iter().map(|s| s / n as f64).collect()
}

/// Hedge objective `F(w)` for a given portfolio.
pub fn hedge_objective(paths: &NotionalPaths, portfolio: &HedgePortfolio) -> f64 {
    mismatch_profile(paths, portfolio).iter().sum()
}

/// Least-squares fit of swaption weights to a Gamma target:
/// `min_w |target - sum_c w_c gamma_c|` where `target = Gamma_IAS - Gamma_ladder`
/// and the portfolio is short the swaptions.
pub fn calibrate_gamma(
    gamma_ias: &[f64],
    gamma_ladder: &[f64],
    gamma_swaptions: &[Vec<f64>],
    cells: &[SwaptionCell],
    maturity: usize,
) -> Result<SwaptionGrid> {
    let buckets = gamma_ias.len();
    if gamma_ladder.len() != buckets || gamma_swaptions.iter().any(|g| g.len() != buckets) {
        return Err(Error::input("gamma vectors must share the bump grid"));
    }
    if gamma_swaptions.len() != cells.len() {
        return Err(Error::input("one gamma vector per swaption cell is required"));
    }
    // Pi = ladder - sum w swaption  =>  Gamma_Pi = Gamma_ladder - sum w Gamma_c
    let a = DMatrix::from_fn(buckets, cells.len(), |r, c| -gamma_swaptions[c][r]);
    let b = DVector::from_fn(buckets, |r, _| gamma_ias[r] - gamma_ladder[r]);
    let ls = min_norm_least_squares(&a, &b, RANK_TOLERANCE)?;
    Ok(SwaptionGrid { maturity, cells: cells.to_vec(), weights: ls.solution })
}

/// Time-0 value of the swap ladder.
pub fn ladder_value(model: &HullWhite, portfolio: &HedgePortfolio) -> Result<f64> {
    crate::ias::price_amortizing_swap(model.curve(), portfolio.strike, &portfolio.ladder)
}

/// Premium breakdown of a hedge portfolio at time 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioPrice {
    pub ladder_value: f64,
    /// `(cell, weight, unit price, weight x price)`.
    pub swaptions: Vec<(SwaptionCell, f64, f64, f64)>,
    /// Sum of `weight x price` over swaptions.
    pub swaption_cost: f64,
    /// `ladder_value - swaption_cost`.
    pub value: f64,
}

pub fn price_portfolio(model: &HullWhite, portfolio: &HedgePortfolio) -> Result<PortfolioPrice> {
    let ladder = ladder_value(model, portfolio)?;
    let mut rows = Vec::with_capacity(portfolio.swaptions.cells.len());
    for (c, &w) in portfolio.swaptions.cells.iter().zip(&portfolio.swaptions.weights) {
        let p = JamshidianSwaption::new(
            model,
            c.start as f64,
            (c.end - c.start) as f64,
            portfolio.strike,
            SwaptionKind::Receiver,
        )?
        .price(model);
        rows.push((*c, w, p, w * p));
    }
    let cost: f64 = rows.iter().map(|r| r.3).sum();
    Ok(PortfolioPrice { ladder_value: ladder, swaptions: rows, swaption_cost: cost, value: ladder - cost })
}

/// Mean over paths of IAS and portfolio values at `T_k`, `k = 0..M-1`, and
/// their absolute difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HedgeErrorProfile {
    pub times: Vec<f64>,
    pub ias_value: Vec<f64>,
    pub portfolio_value: Vec<f64>,
    pub error: Vec<f64>,
}

/// Forward values at each `T_k` on common paths. The IAS leg sums
/// `N(T_{i-1}) M(T_k)/M(T_{i-1}) (P(T_{i-1},T_i)(1+K) - 1)` over the remaining
/// periods; the portfolio leg uses analytic bond and swaption prices given
/// `x(T_k)`, with expired swaptions exercised by the prepayment trigger.
pub fn hedge_error_profile(
    model: &HullWhite,
    scenario: &IasScenario,
    factors: &FactorPaths,
    paths: &NotionalPaths,
    portfolio: &HedgePortfolio,
) -> Result<HedgeErrorProfile> {
    factors.check_model(model)?;
    let m = scenario.maturity();
    if paths.maturity() != m || portfolio.maturity() != m || factors.grid().len() != m + 1 {
        return Err(Error::input("scenario, paths and portfolio must share the payment grid"));
    }
    let grid = scenario.grid();
    let bonds = BondTable::new(model, &grid);
    let k_rate = scenario.mortgage.rate;
    let strike = portfolio.strike;
    let swaptions = portfolio
        .swaptions
        .cells
        .iter()
        .map(|c| {
            JamshidianSwaption::new(model, c.start as f64, (c.end - c.start) as f64, strike, SwaptionKind::Receiver)
        })
        .collect::<Result<Vec<_>>>()?;
    let weights = &portfolio.swaptions.weights;
    let cells = &portfolio.swaptions.cells;
    let n = factors.n_paths();

    let per_date: Vec<(f64, f64)> = (0..m)
        .into_par_iter()
        .map(|k| {
            let mut ias_sum = 0.0;
            let mut pi_sum = 0.0;
            for j in 0..n {
                let log_m_k = factors.log_money_market(model, j, k);
                let mut ias = 0.0;
                for i in k + 1..=m {
                    let x_prev = factors.factor(j, i - 1);
                    let growth = if i - 1 == k {
                        1.0
                    } else {
                        (log_m_k - factors.log_money_market(model, j, i - 1)).exp()
                    };
                    ias += paths.notional_at(j, i - 1) * growth * (bonds.bond(i - 1, i, x_prev) * (1.0 + k_rate) - 1.0);
                }
                ias_sum += ias;

                let x_k = factors.factor(j, k);
                let mut pi = 0.0;
                for i in k + 1..=m {
                    let start = if i - 1 == k { 1.0 } else { bonds.bond(k, i - 1, x_k) };
                    pi += portfolio.ladder[i - 1] * (bonds.bond(k, i, x_k) * (1.0 + strike) - start);
                }
                for ((cell, swpt), &w) in cells.iter().zip(&swaptions).zip(weights) {
                    if w == 0.0 || cell.end <= k {
                        continue;
                    }
                    let t_k = grid[k];
                    let value = if cell.start > k {
                        swpt.price_at(model, t_k, x_k)
                    } else if paths.exercised(j, cell.start) {
                        receiver_swap_value_at(model, &swpt.schedule, strike, t_k, x_k)
                    } else {
                        0.0
                    };
                    pi -= w * value;
                }
                pi_sum += pi;
            }
            (ias_sum / n as f64, pi_sum / n as f64)
        })
        .collect();

    Ok(HedgeErrorProfile {
        times: grid[..m].to_vec(),
        ias_value: per_date.iter().map(|p| p.0).collect(),
        portfolio_value: per_date.iter().map(|p| p.1).collect(),
        error: per_date.iter().map(|p| (p.0 - p.1).abs()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paths_from(notional: Vec<Vec<f64>>, exercise: Vec<Vec<bool>>) -> NotionalPaths {
        let m = notional[0].len() - 1;
        NotionalPaths {
            grid_times: (0..=m).map(|i| i as f64).collect(),
            n_paths: notional.len(),
            notional: notional.concat(),
            exercise: exercise.concat(),
        }
    }

    #[test]
    fn two_period_single_path_system() {
        // M = 2, trigger at T_1, IAS period-2 notional 0.7 below envelope 1.0
        let paths = paths_from(
            vec![vec![1.0, 0.7, 0.0], vec![1.0, 1.0, 0.0]],
            vec![vec![false, true, false], vec![false, false, false]],
        );
        let envelope = upper_envelope(&paths).unwrap();
        assert_eq!(envelope, vec![1.0, 1.0]);
        let stats = HedgeStatistics::new(&paths, &envelope).unwrap();
        let (a, b) = stats.diagonal_system();
        assert_eq!(a[(0, 0)], 1.0);
        assert!((b[0] - 0.3).abs() < 1e-15);
        let cal = calibrate_diagonal(&paths, 0.01).unwrap();
        assert!((cal.portfolio.swaptions.weights[0] - 0.3).abs() < 1e-14);
        assert!(cal.objective < 1e-28);
    }

    #[test]
    fn never_exercised_date_gets_zero_weight() {
        let paths = paths_from(
            vec![vec![1.0, 1.0, 0.8, 0.0], vec![1.0, 1.0, 1.0, 0.0]],
            vec![vec![false, false, true, false], vec![false, false, false, false]],
        );
        let cal = calibrate_diagonal(&paths, 0.01).unwrap();
        assert_eq!(cal.null_directions.len(), 1);
        assert_eq!(cal.portfolio.swaptions.weights[0], 0.0);
        assert!((cal.portfolio.swaptions.weights[1] - 0.2).abs() < 1e-14);
    }

    #[test]
    fn linear_hedge_ladder_increments() {
        let p = HedgePortfolio { strike: 0.01, ladder: vec![1.0, 0.5, 0.5], swaptions: SwaptionGrid::empty(3) };
        assert_eq!(p.ladder_increments(), vec![1.0, -0.5, 0.0]);
        let flat = HedgePortfolio { strike: 0.01, ladder: vec![2.0; 4], swaptions: SwaptionGrid::empty(4) };
        assert_eq!(flat.ladder_increments(), vec![2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn single_swaption_reduces_later_periods() {
        let paths = paths_from(vec![vec![1.0, 0.9, 0.9, 0.0]], vec![vec![false, true, false, false]]);
        let portfolio = HedgePortfolio {
            strike: 0.01,
            ladder: vec![1.0, 1.0, 1.0],
            swaptions: SwaptionGrid { maturity: 3, cells: vec![SwaptionCell { start: 1, end: 3 }], weights: vec![0.1] },
        };
        assert_eq!(portfolio_notional(&paths, &portfolio, 1, 0), 1.0);
        assert!((portfolio_notional(&paths, &portfolio, 2, 0) - 0.9).abs() < 1e-15);
        assert!((portfolio_notional(&paths, &portfolio, 3, 0) - 0.9).abs() < 1e-15);
        let zero = portfolio.with_swaptions(SwaptionGrid::empty(3));
        assert_eq!(portfolio_notional(&paths, &zero, 3, 0), 1.0);
    }

    #[test]
    fn active_set_shapes() {
        assert_eq!(ActiveSet::Diagonal.cells(10).unwrap().len(), 9);
        assert_eq!(ActiveSet::Full.cells(10).unwrap().len(), 45);
        assert!(ActiveSet::single(5, 11).cells(10).unwrap_err().is_input());
        assert_eq!(SwaptionCell { start: 5, end: 10 }.label(), "5Y-5Y");
    }

    #[test]
    fn gamma_fit_of_zero_target_is_zero() {
        let cells = ActiveSet::Diagonal.cells(3).unwrap();
        let g = calibrate_gamma(&[0.0; 4], &[0.0; 4], &[vec![1.0, 2.0, 0.0, 1.0], vec![0.5, 0.0, 1.0, 1.0]], &cells, 3)
            .unwrap();
        assert!(g.weights.iter().all(|w| *w == 0.0));
    }

    #[test]
    fn grid_combination_is_cellwise() {
        let a = SwaptionGrid { maturity: 3, cells: vec![SwaptionCell { start: 1, end: 3 }], weights: vec![2.0] };
        let b = SwaptionGrid { maturity: 3, cells: vec![SwaptionCell { start: 2, end: 3 }], weights: vec![4.0] };
        let c = a.combine(0.5, &b, 0.5);
        assert_eq!(c.weights, vec![1.0, 2.0]);
        assert_eq!(c.matrix()[0][2], 1.0);
        assert_eq!(c.matrix()[1][2], 2.0);
    }
}
