mod common;

use prepay::shortrate::*;

#[test]
fn discounted_unit_is_a_martingale() {
    let hw = common::reference_model();
    let grid: Vec<f64> = (0..=10).map(f64::from).collect();
    let n = 100_000;
    let set = simulate_paths(&hw, &grid, n, 2024).unwrap();
    for (i, &t) in grid.iter().enumerate().skip(1) {
        // antithetic pairs are the independent samples
        let pairs: Vec<f64> = (0..n / 2)
            .map(|p| 0.5 * (1.0 / set.money_market_at(2 * p, i) + 1.0 / set.money_market_at(2 * p + 1, i)))
            .collect();
        let mean = pairs.iter().sum::<f64>() / pairs.len() as f64;
        let var = pairs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (pairs.len() - 1) as f64;
        let se = (var / pairs.len() as f64).sqrt();
        let df = hw.curve().discount(t).unwrap();
        assert!((mean - df).abs() <= 3.0 * se.max(1e-15), "T={t}: {mean} vs {df} (se {se})");
    }
}

#[test]
fn jamshidian_matches_monte_carlo_on_5y5y() {
    let hw = common::reference_model();
    let atm = hw.curve().swap_rate(5.0, 10.0, 1).unwrap();
    let grid = [0.0, 5.0];
    let factors = FactorPaths::simulate(&hw, &grid, 200_000, 55).unwrap();
    for kind in [SwaptionKind::Receiver, SwaptionKind::Payer] {
        for strike in [atm - 0.005, atm, atm + 0.005] {
            let swpt = JamshidianSwaption::new(&hw, 5.0, 5.0, strike, kind).unwrap();
            let payoff = |j: usize| {
                let x = factors.factor(j, 1);
                let receiver = receiver_swap_value_at(&hw, &swpt.schedule, strike, 5.0, x);
                let v = match kind {
                    SwaptionKind::Receiver => receiver,
                    SwaptionKind::Payer => -receiver,
                };
                v.max(0.0) * (-factors.log_money_market(&hw, j, 1)).exp()
            };
            let pairs: Vec<f64> = (0..factors.n_paths() / 2).map(|p| 0.5 * (payoff(2 * p) + payoff(2 * p + 1))).collect();
            let mean = pairs.iter().sum::<f64>() / pairs.len() as f64;
            let var = pairs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (pairs.len() - 1) as f64;
            let se = (var / pairs.len() as f64).sqrt();
            let analytic = swpt.price(&hw);
            assert!((mean - analytic).abs() <= 3.0 * se, "{kind:?} K={strike}: mc {mean} analytic {analytic} se {se}");
        }
    }
}

#[test]
fn calibration_recovers_generating_parameters() {
    let truth = common::reference_model();
    let quotes: Vec<SwaptionQuote> = common::COUNTER_DIAGONAL_VOLS
        .iter()
        .map(|&(e, t, _)| SwaptionQuote::new(e, t, model_normal_vol(&truth, e, t).unwrap()).unwrap())
        .collect();
    let fit = calibrate_hw(truth.curve(), &quotes).unwrap();
    assert!((fit.model.lambda() / 0.264 - 1.0).abs() < 0.01, "lambda {}", fit.model.lambda());
    assert!((fit.model.eta() / 0.017 - 1.0).abs() < 0.01, "eta {}", fit.model.eta());
    for (q, v) in quotes.iter().zip(&fit.fitted_vols) {
        assert!((q.normal_vol - v).abs() < 1e-6);
    }
}

#[test]
fn counter_diagonal_misfit_pattern() {
    let fit = calibrate_hw(&common::curve(), &common::vol_quotes()).unwrap();
    let market: Vec<f64> = common::vol_quotes().iter().map(|q| q.normal_vol).collect();
    let fitted = &fit.fitted_vols;
    // model too high at both ends, too low in the middle of the counter-diagonal
    assert!(fitted[0] > market[0]);
    assert!(fitted[2] < market[2]);
    assert!(fitted[3] < market[3]);
    assert!(fitted[4] > market[4]);
    // fitted vols rise with expiry along the counter-diagonal
    assert!(fitted.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn single_quote_fits_eta_exactly() {
    let curve = common::curve();
    let q = SwaptionQuote::new(5.0, 5.0, 61.98e-4).unwrap();
    let hw = calibrate_eta(&curve, &q, 0.264).unwrap();
    assert!((model_normal_vol(&hw, 5.0, 5.0).unwrap() - q.normal_vol).abs() < 1e-10);
}

#[test]
fn bachelier_inversion_round_trips_on_the_vol_table() {
    let curve = common::curve();
    for &(e, t, v) in &common::COUNTER_DIAGONAL_VOLS {
        let (forward, annuity) = atm_terms(&curve, e, t).unwrap();
        let price = bachelier_atm_price(annuity, v * 1e-4, e);
        let back = bachelier_implied_vol(price, forward, annuity, e).unwrap();
        assert!((back - v * 1e-4).abs() < 1e-10);
        let repriced = bachelier_atm_price(annuity, back, e);
        assert!((repriced - price).abs() < 1e-10);
    }
}

#[test]
fn floorlet_is_a_one_period_receiver_swaption() {
    let hw = common::calibrated();
    for strike in [-0.002, 0.0, 0.005, 0.01] {
        for t1 in [1.0, 3.0, 7.0] {
            let floorlet = hw_floorlet_price(&hw, t1, t1 + 1.0, strike).unwrap();
            let swaption = hw_swaption_price(&hw, t1, 1.0, strike, SwaptionKind::Receiver).unwrap();
            assert!((floorlet - swaption).abs() < 1e-10);
        }
    }
}
