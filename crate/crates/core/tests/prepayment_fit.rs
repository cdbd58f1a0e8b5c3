use prepay::prepayment::*;

#[test]
fn fit_recovers_the_generating_logistic() {
    let gen = SyntheticLoans::default();
    let loans = gen.generate().unwrap();
    let spec = BinSpec::default();
    let fit = bin_and_fit(&loans, &spec).unwrap();
    for &c in &fit.binned.centers {
        let truth = gen.true_model.evaluate(c);
        let fitted = fit.model.evaluate(c);
        assert!((truth - fitted).abs() <= 0.01, "center {c}: fitted {fitted} truth {truth}");
    }
    assert_eq!(fit.binned.centers.len(), 56);
}

#[test]
fn generator_is_reproducible() {
    let gen = SyntheticLoans { n_periods: 3, loans_per_period: 500, ..SyntheticLoans::default() };
    assert_eq!(gen.generate().unwrap(), gen.generate().unwrap());
    let other = SyntheticLoans { seed: gen.seed + 1, ..gen.clone() };
    assert_ne!(gen.generate().unwrap(), other.generate().unwrap());
}

#[test]
fn empirical_cpr_by_month_follows_the_pooled_definition() {
    let loans = SyntheticLoans { n_periods: 4, loans_per_period: 300, ..SyntheticLoans::default() }.generate().unwrap();
    let series = empirical_cpr_timeseries(&loans).unwrap();
    assert_eq!(series.len(), 4);
    for (period, cpr) in &series {
        let (prepaid, balance) = loans
            .iter()
            .filter(|l| &l.period == period)
            .fold((0.0, 0.0), |(p, b), l| (p + l.prepaid_amount, b + l.starting_balance));
        assert!((cpr - smm_to_cpr(prepaid / balance).unwrap()).abs() < 1e-15);
    }
}
