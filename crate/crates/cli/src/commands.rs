//! Subcommand implementations.

use std::collections::BTreeMap;
use std::path::PathBuf;

use prepay::curve::{SwapQuote, YieldCurve};
use prepay::greeks::{
    delta_gamma_profile, gamma_hedge, portfolio_valuer, vega_profile, with_metadata, GreekProfile, IasValuer,
    REPORTING_NOTIONAL,
};
use prepay::hedge::{
    build_linear_hedge, calibrate_diagonal, calibrate_numeric, hedge_error_profile, hedge_objective,
    price_portfolio, ActiveSet, HedgePortfolio, SwaptionCell,
};
use prepay::ias::{average_notional, par_mortgage_rate, price_ias_mc, price_ias_paths, simulate_notional, IasScenario};
use prepay::mortgage::{constant_cpr_schedule, MortgageKind, MortgageSpec};
use prepay::prepayment::{bin_and_fit, empirical_cpr_timeseries, BinSpec, CprModel, SyntheticLoans};
use prepay::shortrate::{
    atm_terms, bachelier_atm_price, calibrate_hw, hw_swaption_price, FactorPaths, HullWhite, SwaptionKind,
    SwaptionQuote,
};
use serde::Serialize;
use serde_json::json;

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::io::{read_loans, read_quotes, VolMatrix};
use crate::output::{num, opt_num, sha256_hex, Artifacts, Table};

const BPS: f64 = 1e4;

/// Hedge strategies understood by `hedge`.
pub const STRATEGIES: [&str; 6] = ["linear", "diag9", "single-5y5y", "full", "gamma", "avg"];

/// Loaded inputs shared by the subcommands.
struct Run<'a> {
    cfg: &'a Config,
    out: Artifacts,
}

impl<'a> Run<'a> {
    fn new(cfg: &'a Config, command: &str) -> CliResult<Self> {
        let out_dir = cfg.path("out_dir")?;
        Ok(Self { cfg, out: Artifacts::new(&out_dir, command) })
    }

    fn quotes(&mut self) -> CliResult<Vec<SwapQuote>> {
        let path = self.cfg.input_path("curve")?;
        self.out.input(&path)?;
        read_quotes(&path)
    }

    fn curve(&mut self) -> CliResult<(Vec<SwapQuote>, YieldCurve)> {
        let quotes = self.quotes()?;
        let curve = YieldCurve::bootstrap(&quotes)?;
        Ok((quotes, curve))
    }

    fn vol_matrix(&mut self) -> CliResult<VolMatrix> {
        let path = self.cfg.input_path("vols")?;
        self.out.input(&path)?;
        VolMatrix::read(&path)
    }

    fn vol_quotes(&mut self) -> CliResult<Vec<SwaptionQuote>> {
        self.vol_matrix()?.instruments(&self.cfg.string("instruments")?)
    }

    /// Fixed `(lambda, eta)` from the config, otherwise calibrated to the vol file.
    fn model(&mut self, curve: &YieldCurve) -> CliResult<HullWhite> {
        match (self.cfg.opt_float("model.lambda")?, self.cfg.opt_float("model.eta")?) {
            (Some(l), Some(e)) => Ok(HullWhite::new(l, e, curve.clone())?),
            (None, None) => Ok(calibrate_hw(curve, &self.vol_quotes()?)?.model),
            _ => Err(CliError::input("set both model.lambda and model.eta, or neither to calibrate")),
        }
    }

    fn bin_spec(&self) -> CliResult<BinSpec> {
        Ok(BinSpec {
            n_bins: self.cfg.int("fit.bins")? as usize,
            lower: self.cfg.float("fit.lower")?,
            upper: self.cfg.float("fit.upper")?,
        })
    }

    /// Logistic parameters from `cpr.alpha`, else fitted to the loan file.
    fn logistic(&mut self) -> CliResult<CprModel> {
        if let Some(a) = self.cfg.floats("cpr.alpha")? {
            let [a1, a2, a3, a4] = a[..] else {
                return Err(CliError::input(format!("cpr.alpha needs 4 numbers, got {}", a.len())));
            };
            return Ok(CprModel::logistic(a1, a2, a3, a4)?);
        }
        if !self.cfg.has("loans") {
            return Err(CliError::input("the logistic CPR model needs cpr.alpha or a loans file"));
        }
        let path = self.cfg.input_path("loans")?;
        self.out.input(&path)?;
        let loans = read_loans(&path)?;
        Ok(bin_and_fit(&loans, &self.bin_spec()?)?.model)
    }

    fn cpr_model(&mut self) -> CliResult<CprModel> {
        match self.cfg.string("cpr.model")?.as_str() {
            "constant" => Ok(CprModel::constant(self.cfg.float("cpr.lambda")?)?),
            "rational" => Ok(CprModel::rational(self.cfg.float("cpr.lambda_max")?, self.cfg.float("cpr.epsilon_star")?)?),
            "logistic" | "sigmoid" => self.logistic(),
            other => Err(CliError::input(format!(
                "unknown cpr.model '{other}' (expected constant, rational or logistic)"
            ))),
        }
    }

    fn mortgage(&self, curve: Option<&YieldCurve>, kind: MortgageKind) -> CliResult<MortgageSpec> {
        let years = self.cfg.int("mortgage.maturity_years")? as u32;
        let rate = match (self.cfg.mortgage_rate()?, curve) {
            (Some(r), _) => r,
            (None, Some(c)) => par_mortgage_rate(c, kind, years)?,
            (None, None) => return Err(CliError::input("an at-the-money mortgage rate needs a curve file")),
        };
        Ok(MortgageSpec::new(kind, self.cfg.float("mortgage.notional")?, rate, years)?)
    }

    fn scenario(&mut self, curve: &YieldCurve, zeta: f64) -> CliResult<IasScenario> {
        let mortgage = self.mortgage(Some(curve), self.cfg.mortgage_kind()?)?;
        let sc = IasScenario {
            mortgage,
            cpr: self.cpr_model()?,
            zeta,
            n_paths: self.cfg.int("n_paths")? as usize,
            seed: self.cfg.seed()?,
        };
        sc.validate()?;
        Ok(sc)
    }

    /// Incentive spread for hedging runs, which always use zero.
    fn hedge_zeta(&self, command: &str) -> CliResult<f64> {
        let zeta = self.cfg.float("zeta")?;
        if zeta != 0.0 {
            log::warn!("{command}: zeta = {zeta} ignored, hedges are built with zero incentive spread");
        }
        Ok(0.0)
    }

    fn finish(self, mc: bool) -> CliResult<PathBuf> {
        let seed = self.cfg.seed()?;
        let n_paths = if mc { Some(self.cfg.int("n_paths")?) } else { None };
        self.out.finish(&self.cfg.effective(), Some(seed), n_paths)
    }
}

fn bps(value: f64, notional: f64) -> f64 {
    value / notional * BPS
}

pub fn bootstrap(cfg: &Config) -> CliResult<PathBuf> {
    cfg.seed()?;
    let mut run = Run::new(cfg, "bootstrap")?;
    let (quotes, curve) = run.curve()?;
    let mut t = Table::new([
        "time_years",
        "discount_factor",
        "zero_rate_cc_decimal",
        "forward_1y_decimal",
        "par_swap_rate_annual_decimal",
        "input_par_rate_decimal",
    ]);
    let last = curve.last_time().round() as u32;
    for y in 1..=last {
        let t_y = f64::from(y);
        let df = curve.discount(t_y)?;
        let quoted = quotes.iter().find(|q| q.maturity_years == y).map(|q| q.par_rate);
        t.push(vec![
            num(t_y),
            num(df),
            num(-df.ln() / t_y),
            num(curve.forward_libor(t_y - 1.0, t_y)?),
            num(curve.swap_rate(0.0, t_y, 1)?),
            opt_num(quoted),
        ]);
    }
    run.out.csv("curve.csv", &t)?;
    run.finish(false)
}

pub fn calibrate(cfg: &Config) -> CliResult<PathBuf> {
    cfg.seed()?;
    let mut run = Run::new(cfg, "calibrate")?;
    let (_, curve) = run.curve()?;
    let matrix = run.vol_matrix()?;
    let quotes = matrix.instruments(&cfg.string("instruments")?)?;
    let cal = calibrate_hw(&curve, &quotes)?;
    let mut t = Table::new(["swaption", "market_vol_bps", "hw_vol_bps", "market_price_bps", "hw_price_bps"]);
    let mut rows = vec![];
    for (q, fitted) in quotes.iter().zip(&cal.fitted_vols) {
        let (forward, annuity) = atm_terms(&curve, q.expiry_years, q.tenor_years)?;
        let market = bachelier_atm_price(annuity, q.normal_vol, q.expiry_years);
        let model = hw_swaption_price(&cal.model, q.expiry_years, q.tenor_years, forward, SwaptionKind::Receiver)?;
        let quoted = matrix.get(q.expiry_years, q.tenor_years).expect("quote taken from the matrix");
        t.push(vec![q.label(), num(quoted), num(fitted * BPS), num(market * BPS), num(model * BPS)]);
        rows.push(json!({
            "swaption": q.label(),
            "market_vol_bps": quoted,
            "hw_vol_bps": fitted * BPS,
            "market_price_bps": market * BPS,
            "hw_price_bps": model * BPS,
        }));
    }
    run.out.json(
        "calibration.json",
        &json!({
            "model": "hull-white",
            "lambda": cal.model.lambda(),
            "eta": cal.model.eta(),
            "objective_bps2": cal.objective,
            "iterations": cal.iterations,
            "swaptions": rows,
        }),
    )?;
    run.out.csv("calibration.csv", &t)?;
    run.finish(false)
}

pub fn schedule(cfg: &Config) -> CliResult<PathBuf> {
    cfg.seed()?;
    let mut run = Run::new(cfg, "schedule")?;
    let kind = cfg.mortgage_kind()?;
    let curve = if cfg.mortgage_rate()?.is_none() { Some(run.curve()?.1) } else { None };
    let spec = run.mortgage(curve.as_ref(), kind)?;
    let cpr = match cfg.opt_float("schedule.cpr")? {
        Some(c) => c,
        None if cfg.string("cpr.model")? == "constant" => cfg.float("cpr.lambda")?,
        None => 0.0,
    };
    let rows = constant_cpr_schedule(&spec, cpr)?;
    let mut t = Table::new([
        "time_years",
        "notional_before_ccy",
        "interest_ccy",
        "repayment_ccy",
        "prepayment_ccy",
        "installment_ccy",
        "notional_after_ccy",
    ]);
    for r in rows {
        t.push(
            [r.time, r.notional_before, r.interest, r.repayment, r.prepayment, r.installment, r.notional_after]
                .map(num)
                .to_vec(),
        );
    }
    run.out.csv("schedule.csv", &t)?;
    run.finish(false)
}

pub fn cpr_fit(cfg: &Config) -> CliResult<PathBuf> {
    cfg.seed()?;
    let mut run = Run::new(cfg, "cpr-fit")?;
    let path = cfg.input_path("loans")?;
    run.out.input(&path)?;
    let loans = read_loans(&path)?;
    let spec = run.bin_spec()?;
    let fit = bin_and_fit(&loans, &spec)?;
    let b = &fit.binned;
    let fitted: Vec<f64> = b.centers.iter().map(|&c| fit.model.evaluate(c)).collect();
    let bins: Vec<_> = (0..b.centers.len())
        .map(|i| {
            json!({
                "lower": b.bin_edges[i],
                "upper": b.bin_edges[i + 1],
                "center": b.centers[i],
                "count": b.counts[i],
                "empirical_cpr": b.lambda_per_bin[i],
                "fitted_cpr": fitted[i],
            })
        })
        .collect();
    run.out.json(
        "cpr_fit.json",
        &json!({
            "alpha": fit.alpha,
            "bins": bins,
            "residuals": fit.residuals,
            "objective": fit.objective,
            "dropped": b.dropped,
            "n_observations": loans.len(),
        }),
    )?;
    let mut t = Table::new([
        "incentive_center_decimal",
        "observations",
        "empirical_cpr_decimal",
        "fitted_cpr_decimal",
        "residual_cpr_decimal",
    ]);
    #[allow(clippy::needless_range_loop)]
    for i in 0..b.centers.len() {
        t.push(vec![
            num(b.centers[i]),
            b.counts[i].to_string(),
            opt_num(b.lambda_per_bin[i]),
            num(fitted[i]),
            opt_num(fit.residuals[i]),
        ]);
    }
    run.out.csv("cpr_fit.csv", &t)?;
    let mut ts = Table::new(["period", "cpr_decimal"]);
    for (p, c) in empirical_cpr_timeseries(&loans)? {
        ts.push(vec![p, num(c)]);
    }
    run.out.csv("empirical_cpr.csv", &ts)?;
    run.finish(false)
}

#[derive(Serialize)]
struct ScenarioKey<'a> {
    scenario: &'a IasScenario,
    lambda: f64,
    eta: f64,
    quotes: &'a [SwapQuote],
}

fn scenario_digest(sc: &IasScenario, model: &HullWhite, quotes: &[SwapQuote]) -> CliResult<String> {
    let key = ScenarioKey { scenario: sc, lambda: model.lambda(), eta: model.eta(), quotes };
    Ok(sha256_hex(&serde_json::to_vec(&key).map_err(|e| CliError::Numerical(e.to_string()))?))
}

pub fn price(cfg: &Config) -> CliResult<PathBuf> {
    let mut run = Run::new(cfg, "price")?;
    let (quotes, curve) = run.curve()?;
    let model = run.model(&curve)?;
    let sc = run.scenario(&curve, cfg.float("zeta")?)?;
    let n0 = sc.mortgage.notional;
    let factors = FactorPaths::simulate(&model, &sc.grid(), sc.n_paths, sc.seed)?;
    let paths = simulate_notional(&model, &sc, &factors)?;
    let mc = price_ias_paths(&model, &sc, &factors, &paths)?;
    run.out.json(
        "price.json",
        &json!({
            "value_bps": bps(mc.value, n0),
            "stderr_bps": bps(mc.stderr, n0),
            "value_ccy": mc.value,
            "stderr_ccy": mc.stderr,
            "n_paths": sc.n_paths,
            "seed": sc.seed,
            "mortgage": sc.mortgage,
            "strike_bps": sc.mortgage.rate * BPS,
            "cpr": sc.cpr,
            "zeta": sc.zeta,
            "lambda": model.lambda(),
            "eta": model.eta(),
            "scenario_digest": scenario_digest(&sc, &model, &quotes)?,
        }),
    )?;
    let export = (cfg.int("paths.export")? as usize).min(sc.n_paths);
    if export > 0 {
        let avg = average_notional(&paths, &sc.mortgage)?;
        let mut header = vec!["time_years".to_string(), "mean_notional_ccy".to_string()];
        header.extend((0..export).map(|j| format!("path_{j}_notional_ccy")));
        let mut t = Table::new(header);
        for (i, &time) in paths.grid_times.iter().enumerate() {
            let mut row = vec![num(time), num(avg.mean[i])];
            row.extend((0..export).map(|j| num(paths.notional_at(j, i))));
            t.push(row);
        }
        run.out.csv("notional_paths.csv", &t)?;
    }
    run.finish(true)
}

/// Builds one hedge portfolio per strategy on common notional paths.
struct Hedger<'a> {
    quotes: &'a [SwapQuote],
    model: &'a HullWhite,
    sc: &'a IasScenario,
    paths: &'a prepay::ias::NotionalPaths,
    no_short: bool,
    bump: f64,
    diag: Option<HedgePortfolio>,
    gamma: Option<prepay::greeks::GammaHedge>,
}

impl Hedger<'_> {
    fn diag(&mut self) -> CliResult<HedgePortfolio> {
        if self.diag.is_none() {
            let k = self.sc.mortgage.rate;
            let cal = if self.no_short {
                calibrate_numeric(self.paths, k, &ActiveSet::Diagonal, true)?
            } else {
                calibrate_diagonal(self.paths, k)?
            };
            self.diag = Some(cal.portfolio);
        }
        Ok(self.diag.clone().expect("set above"))
    }

    fn gamma(&mut self) -> CliResult<prepay::greeks::GammaHedge> {
        if self.gamma.is_none() {
            let diag = self.diag()?;
            self.gamma = Some(gamma_hedge(self.quotes, self.model, self.sc, &diag, self.bump)?);
        }
        Ok(self.gamma.clone().expect("set above"))
    }

    fn build(&mut self, strategy: &str) -> CliResult<HedgePortfolio> {
        let k = self.sc.mortgage.rate;
        let numeric = |active: ActiveSet| -> CliResult<HedgePortfolio> {
            Ok(calibrate_numeric(self.paths, k, &active, self.no_short)?.portfolio)
        };
        match strategy {
            "linear" => Ok(build_linear_hedge(self.paths, k)),
            "diag9" => self.diag(),
            "single-5y5y" => numeric(ActiveSet::single(5, 10)),
            "full" => numeric(ActiveSet::Full),
            "gamma" => {
                let g = self.gamma()?;
                Ok(self.diag()?.with_swaptions(g.gamma_weights))
            }
            "avg" => {
                let g = self.gamma()?;
                Ok(self.diag()?.with_swaptions(g.averaged))
            }
            other => Err(CliError::input(format!("unknown hedge strategy '{other}' (expected one of {})", STRATEGIES.join(", ")))),
        }
    }
}

pub fn hedge(cfg: &Config) -> CliResult<PathBuf> {
    let mut run = Run::new(cfg, "hedge")?;
    let (quotes, curve) = run.curve()?;
    let model = run.model(&curve)?;
    let zeta = run.hedge_zeta("hedge")?;
    let sc = run.scenario(&curve, zeta)?;
    let strategies = cfg.strings("hedge.strategies")?;
    if strategies.is_empty() {
        return Err(CliError::input("hedge.strategies is empty"));
    }
    if sc.mortgage.maturity_years < 10 && strategies.iter().any(|s| s == "single-5y5y") {
        return Err(CliError::input("the single-5y5y strategy needs a mortgage of at least 10 years"));
    }
    let n0 = sc.mortgage.notional;
    let factors = FactorPaths::simulate(&model, &sc.grid(), sc.n_paths, sc.seed)?;
    let paths = simulate_notional(&model, &sc, &factors)?;
    let ias = price_ias_paths(&model, &sc, &factors, &paths)?;
    let mut hedger = Hedger {
        quotes: &quotes,
        model: &model,
        sc: &sc,
        paths: &paths,
        no_short: cfg.boolean("hedge.no_short")?,
        bump: cfg.float("greeks.bump")?,
        diag: None,
        gamma: None,
    };

    let mut weights = BTreeMap::new();
    let mut summary = Table::new([
        "strategy",
        "ias_value_bps",
        "ias_stderr_bps",
        "ladder_value_bps",
        "swaption_cost_bps",
        "portfolio_value_bps",
        "price_error_bps",
        "notional_mismatch_ccy2",
    ]);
    let mut priced = vec![];
    let mut profiles = vec![];
    for s in &strategies {
        let p = hedger.build(s)?;
        let pp = price_portfolio(&model, &p)?;
        let profile = hedge_error_profile(&model, &sc, &factors, &paths, &p)?;
        summary.push(vec![
            s.clone(),
            num(bps(ias.value, n0)),
            num(bps(ias.stderr, n0)),
            num(bps(pp.ladder_value, n0)),
            num(bps(pp.swaption_cost, n0)),
            num(bps(pp.value, n0)),
            num(bps((pp.value - ias.value).abs(), n0)),
            num(hedge_objective(&paths, &p)),
        ]);
        let cells: Vec<_> = p
            .swaptions
            .cells
            .iter()
            .zip(&p.swaptions.weights)
            .map(|(c, w)| json!({"swaption": c.label(), "start": c.start, "end": c.end, "weight_ccy": w}))
            .collect();
        let grid: Vec<Vec<f64>> =
            p.swaptions.matrix().into_iter().map(|r| r.into_iter().map(|w| w / n0).collect()).collect();
        weights.insert(
            s.clone(),
            json!({
                "ladder_notional_ccy": p.ladder,
                "swaptions": cells,
                "weight_grid_fraction_of_notional": grid,
            }),
        );
        priced.push((s.clone(), pp));
        profiles.push((s.clone(), profile));
    }
    run.out.json(
        "weights.json",
        &json!({
            "strike": sc.mortgage.rate,
            "maturity_years": sc.mortgage.maturity_years,
            "notional_ccy": n0,
            "grid_layout": "rows i = 1..M-1 (swaption start T_i), columns j = 1..M (swap end T_j)",
            "strategies": weights,
        }),
    )?;

    let mut all_cells: Vec<SwaptionCell> =
        priced.iter().flat_map(|(_, pp)| pp.swaptions.iter().map(|r| r.0)).collect();
    all_cells.sort();
    all_cells.dedup();
    let mut header = vec!["strategy".to_string()];
    header.extend(all_cells.iter().map(|c| format!("{}_bps", c.label())));
    header.push("total_bps".into());
    let mut costs = Table::new(header);
    for (s, pp) in &priced {
        let mut row = vec![s.clone()];
        row.extend(all_cells.iter().map(|c| {
            num(pp.swaptions.iter().find(|r| r.0 == *c).map_or(0.0, |r| bps(r.3, n0)))
        }));
        row.push(num(bps(pp.swaption_cost, n0)));
        costs.push(row);
    }
    run.out.csv("costs.csv", &costs)?;
    run.out.csv("summary.csv", &summary)?;

    let mut header = vec!["time_years".to_string(), "ias_value_bps".to_string()];
    for (s, _) in &profiles {
        header.push(format!("{s}_value_bps"));
        header.push(format!("{s}_error_bps"));
    }
    let mut err = Table::new(header);
    let base = &profiles[0].1;
    for i in 0..base.times.len() {
        let mut row = vec![num(base.times[i]), num(bps(base.ias_value[i], n0))];
        for (_, p) in &profiles {
            row.push(num(bps(p.portfolio_value[i], n0)));
            row.push(num(bps(p.error[i], n0)));
        }
        err.push(row);
    }
    run.out.csv("error_profile.csv", &err)?;
    run.finish(true)
}

pub fn greeks(cfg: &Config) -> CliResult<PathBuf> {
    let mut run = Run::new(cfg, "greeks")?;
    let (quotes, curve) = run.curve()?;
    let vols = run.vol_quotes()?;
    let model = run.model(&curve)?;
    let zeta = run.hedge_zeta("greeks")?;
    let sc = run.scenario(&curve, zeta)?;
    let h = cfg.float("greeks.bump")?;
    let scale = REPORTING_NOTIONAL / sc.mortgage.notional;

    let factors = FactorPaths::simulate(&model, &sc.grid(), sc.n_paths, sc.seed)?;
    let paths = simulate_notional(&model, &sc, &factors)?;
    let linear = build_linear_hedge(&paths, sc.mortgage.rate);
    let diag = calibrate_diagonal(&paths, sc.mortgage.rate)?.portfolio;

    let valuer = IasValuer::new(sc.clone())?;
    let (l, e) = (model.lambda(), model.eta());
    let mut sets: Vec<(&str, GreekProfile, GreekProfile, GreekProfile)> = vec![];
    let (d, g) = delta_gamma_profile(&quotes, l, e, h, scale, |m| valuer.value(m))?;
    let v = vega_profile(&curve, &vols, h, scale, |m| valuer.value(m))?;
    sets.push(("ias", with_metadata(d, &sc), with_metadata(g, &sc), with_metadata(v, &sc)));
    valuer.clear();
    for (name, p) in [("linear", &linear), ("diag9", &diag)] {
        let (d, g) = delta_gamma_profile(&quotes, l, e, h, scale, portfolio_valuer(p))?;
        let v = vega_profile(&curve, &vols, h, scale, portfolio_valuer(p))?;
        sets.push((name, d, g, v));
    }

    let mut t = Table::new([
        "portfolio",
        "bucket",
        "delta_ccy_per_bp_per_mm",
        "delta_stderr_ccy_per_bp_per_mm",
        "gamma_ccy_per_bp2_per_mm",
        "gamma_stderr_ccy_per_bp2_per_mm",
        "vega_ccy_per_bp_per_mm",
        "vega_stderr_ccy_per_bp_per_mm",
    ]);
    for (name, d, g, v) in &sets {
        for b in 0..d.labels.len() {
            t.push(vec![
                name.to_string(),
                d.labels[b].clone(),
                num(d.values[b]),
                num(d.stderr[b]),
                num(g.values[b]),
                num(g.stderr[b]),
                String::new(),
                String::new(),
            ]);
        }
        for b in 0..v.labels.len() {
            t.push(vec![
                name.to_string(),
                v.labels[b].clone(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                num(v.values[b]),
                num(v.stderr[b]),
            ]);
        }
    }
    run.out.csv("greeks.csv", &t)?;
    run.out.json(
        "greeks.json",
        &json!({
            "bump_decimal": h,
            "delta_gamma": "central differences of a par quote bump, curve re-bootstrapped, lambda and eta held, common random numbers",
            "vega": "forward difference of a normal vol bump with Hull-White recalibration, common random numbers",
            "reporting_notional_ccy": REPORTING_NOTIONAL,
            "n_paths": sc.n_paths,
            "seed": sc.seed,
            "lambda": l,
            "eta": e,
            "strike": sc.mortgage.rate,
        }),
    )?;
    run.finish(true)
}

pub fn report_table1(cfg: &Config) -> CliResult<PathBuf> {
    let mut run = Run::new(cfg, "report-table1")?;
    let (_, curve) = run.curve()?;
    let model = run.model(&curve)?;
    let rational = CprModel::rational(cfg.float("cpr.lambda_max")?, cfg.float("cpr.epsilon_star")?)?;
    let sigmoid = run.logistic()?;
    let n_paths = cfg.int("n_paths")? as usize;
    let seed = cfg.seed()?;
    let mut t = Table::new([
        "mortgage_type",
        "maturity_years",
        "strike_bps",
        "prepayment_model",
        "price_bps",
        "stderr_bps",
    ]);
    for kind in [MortgageKind::Bullet, MortgageKind::Annuity] {
        let mortgage = run.mortgage(Some(&curve), kind)?;
        for (label, cpr) in [("Full-rational", rational), ("Sigmoid", sigmoid)] {
            let sc = IasScenario { mortgage, cpr, zeta: cfg.float("zeta")?, n_paths, seed };
            let mc = price_ias_mc(&model, &sc)?;
            let name = match kind {
                MortgageKind::Bullet => "Bullet",
                MortgageKind::Annuity => "Annuity",
            };
            t.push(vec![
                name.into(),
                mortgage.maturity_years.to_string(),
                num(mortgage.rate * BPS),
                label.into(),
                num(bps(mc.value, mortgage.notional)),
                num(bps(mc.stderr, mortgage.notional)),
            ]);
        }
    }
    run.out.csv("table1.csv", &t)?;
    run.finish(true)
}

pub fn synth_loans(cfg: &Config) -> CliResult<PathBuf> {
    cfg.seed()?;
    let run = Run::new(cfg, "synth-loans")?;
    let gen = SyntheticLoans {
        seed: cfg.int("synth.seed")?,
        n_periods: cfg.int("synth.periods")? as usize,
        loans_per_period: cfg.int("synth.loans_per_period")? as usize,
        ..SyntheticLoans::default()
    };
    let loans = gen.generate()?;
    let mut t = Table::new(["period", "starting_balance", "prepaid_amount", "incentive"]);
    for l in &loans {
        t.push(vec![l.period.clone(), num(l.starting_balance), num(l.prepaid_amount), num(l.incentive)]);
    }
    let mut out = run.out;
    out.csv("synthetic_loans.csv", &t)?;
    out.json("generator.json", &gen)?;
    out.finish(&cfg.effective(), Some(cfg.seed()?), None)
}
