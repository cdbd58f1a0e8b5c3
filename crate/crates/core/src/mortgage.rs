//! Bullet and annuity mortgage mechanics on a yearly payment grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MortgageKind {
    Bullet,
    Annuity,
}

impl std::fmt::Display for MortgageKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MortgageKind::Bullet => "bullet",
            MortgageKind::Annuity => "annuity",
        })
    }
}

impl std::str::FromStr for MortgageKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bullet" => Ok(MortgageKind::Bullet),
            "annuity" => Ok(MortgageKind::Annuity),
            other => Err(Error::input(format!("unknown mortgage kind '{other}'"))),
        }
    }
}

/// Contract terms of a mortgage paying annually until `maturity_years`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MortgageSpec {
    pub kind: MortgageKind,
    pub notional: f64,
    pub rate: f64,
    pub maturity_years: u32,
}

impl MortgageSpec {
    pub fn new(kind: MortgageKind, notional: f64, rate: f64, maturity_years: u32) -> Result<Self> {
        let spec = Self { kind, notional, rate, maturity_years };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.notional > 0.0 && self.notional.is_finite()) {
            return Err(Error::input(format!("mortgage notional {} must be positive", self.notional)));
        }
        if self.maturity_years < 1 {
            return Err(Error::input("mortgage maturity must be at least one year"));
        }
        if !(self.rate.is_finite() && self.rate > -1.0) {
            return Err(Error::input(format!("mortgage rate {} must be finite and above -100%", self.rate)));
        }
        Ok(())
    }

    /// Payment dates `0, 1, ..., M`.
    pub fn grid(&self) -> Vec<f64> {
        (0..=self.maturity_years).map(f64::from).collect()
    }
}

/// One row of an amortization table. `time` is the payment date `T_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub time: f64,
    pub notional_before: f64,
    pub interest: f64,
    pub repayment: f64,
    pub prepayment: f64,
    pub installment: f64,
    pub notional_after: f64,
}

/// Level installment repaying `notional` over `years_remaining` at `rate`.
pub fn annuity_installment(rate: f64, notional: f64, years_remaining: f64) -> Result<f64> {
    if !(years_remaining >= 1.0 - 1e-12) {
        return Err(Error::input(format!("annuity needs at least one remaining year, got {years_remaining}")));
    }
    if !(rate > -1.0 && rate.is_finite()) {
        return Err(Error::input(format!("annuity rate {rate} must exceed -100%")));
    }
    Ok(notional * installment_ratio(rate, years_remaining))
}

/// `C / N = K / (1 - (1 + K)^{-n})`, straight-line `1 / n` at `K = 0`.
fn installment_ratio(rate: f64, years: f64) -> f64 {
    if rate.abs() < 1e-12 {
        // second-order expansion around K = 0
        1.0 / years + 0.5 * rate * (1.0 + 1.0 / years)
    } else {
        rate / -(-years * rate.ln_1p()).exp_m1()
    }
}

/// One-period notional factor `N(T_i) = N(T_{i-1}) psi` where `cpr` applies
/// to the balance left after the scheduled repayment at `T_i`.
pub fn psi(kind: MortgageKind, rate: f64, cpr: f64, maturity: f64, t_prev: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&cpr) {
        return Err(Error::input(format!("prepayment rate {cpr} outside [0, 1]")));
    }
    if !(t_prev < maturity) {
        return Err(Error::input(format!(
            "notional update at {t_prev} is not before maturity {maturity}"
        )));
    }
    let factor = match kind {
        MortgageKind::Bullet => 1.0 - cpr,
        MortgageKind::Annuity => {
            let c = installment_ratio(rate, maturity - t_prev);
            1.0 + (cpr - 1.0) * c + rate - cpr * (rate + 1.0)
        }
    };
    debug_assert!(factor > -1e-12 && factor < 1.0 + 1e-12, "psi {factor} outside [0,1]");
    Ok(factor.max(0.0))
}

/// Fraction of the opening balance that survives scheduled repayment in the
/// period starting at `t_prev` (`1 - Q / N`).
pub(crate) fn scheduled_survival(kind: MortgageKind, rate: f64, maturity: f64, t_prev: f64) -> f64 {
    match kind {
        MortgageKind::Bullet => {
            if maturity - t_prev <= 1.0 + 1e-12 { 0.0 } else { 1.0 }
        }
        MortgageKind::Annuity => 1.0 + rate - installment_ratio(rate, maturity - t_prev),
    }
}

/// Amortization table under a constant annual prepayment rate, computed by
/// the explicit interest / repayment / prepayment recursion.
pub fn constant_cpr_schedule(spec: &MortgageSpec, cpr: f64) -> Result<Vec<ScheduleRow>> {
    spec.validate()?;
    if !(0.0..1.0).contains(&cpr) {
        return Err(Error::input(format!("constant prepayment rate {cpr} outside [0, 1)")));
    }
    let m = spec.maturity_years;
    let k = spec.rate;
    let mut rows = Vec::with_capacity(m as usize);
    let mut notional = spec.notional;
    for i in 1..=m {
        let remaining = f64::from(m - i + 1);
        let interest = k * notional;
        let (installment, repayment) = match spec.kind {
            MortgageKind::Bullet => {
                let q = if i == m { notional } else { 0.0 };
                (interest + q, q)
            }
            MortgageKind::Annuity => {
                let c = annuity_installment(k, notional, remaining)?;
                (c, c - interest)
            }
        };
        let after_repayment = if i == m { 0.0 } else { notional - repayment };
        let prepayment = cpr * after_repayment;
        let after = after_repayment - prepayment;
        rows.push(ScheduleRow {
            time: f64::from(i),
            notional_before: notional,
            interest,
            repayment,
            prepayment,
            installment,
            notional_after: after,
        });
        notional = after;
    }
    Ok(rows)
}

/// Notionals `N(T_0), ..., N(T_M)` from per-date prepayment rates
/// `cpr[i-1] = Lambda(T_i)` for `i = 1..M-1`. `N(T_M) = 0`.
pub fn notional_path(spec: &MortgageSpec, cpr: &[f64]) -> Result<Vec<f64>> {
    spec.validate()?;
    let m = spec.maturity_years as usize;
    if cpr.len() + 1 != m {
        return Err(Error::input(format!(
            "expected {} prepayment rates for a {m}y mortgage, got {}",
            m - 1,
            cpr.len()
        )));
    }
    let mut out = Vec::with_capacity(m + 1);
    out.push(spec.notional);
    for (i, &l) in cpr.iter().enumerate() {
        let prev = *out.last().expect("non-empty");
        out.push(prev * psi(spec.kind, spec.rate, l, m as f64, i as f64)?);
    }
    out.push(0.0);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn installment_examples() {
        assert!((annuity_installment(0.03, 1.0, 10.0).unwrap() - 0.1172305066).abs() < 1e-10);
        assert_eq!(annuity_installment(0.0, 1.0, 10.0).unwrap(), 0.1);
        assert_relative_eq!(annuity_installment(0.03, 2.0, 1.0).unwrap(), 2.06, epsilon = 1e-15);
        assert!(annuity_installment(0.03, 1.0, 0.5).unwrap_err().is_input());
    }

    #[test]
    fn installment_present_value_is_notional() {
        for &k in &[-0.01, 0.001, 0.03, 0.08] {
            let c = annuity_installment(k, 1.0, 10.0).unwrap();
            let pv: f64 = (1..=10).map(|i| c / (1.0 + k).powi(i)).sum();
            assert_relative_eq!(pv, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn psi_examples() {
        assert_relative_eq!(psi(MortgageKind::Bullet, 0.03, 0.12, 10.0, 3.0).unwrap(), 0.88, epsilon = 1e-15);
        let a = psi(MortgageKind::Annuity, 0.03, 0.0, 10.0, 0.0).unwrap();
        assert!((a - 0.9127694934).abs() < 1e-10);
        let c = annuity_installment(0.03, 1.0, 10.0).unwrap();
        assert_relative_eq!(a, 1.0 - (c - 0.03), epsilon = 1e-15);
        assert!(psi(MortgageKind::Annuity, 0.03, 0.1, 10.0, 10.0).unwrap_err().is_input());
        assert!(psi(MortgageKind::Bullet, 0.03, 1.2, 10.0, 1.0).unwrap_err().is_input());
    }

    #[test]
    fn bullet_schedule_is_interest_only() {
        let spec = MortgageSpec::new(MortgageKind::Bullet, 1.0, 0.03, 10).unwrap();
        let rows = constant_cpr_schedule(&spec, 0.0).unwrap();
        for row in &rows[..9] {
            assert_eq!(row.interest, 0.03);
            assert_eq!(row.repayment, 0.0);
            assert_eq!(row.notional_after, 1.0);
        }
        assert_eq!(rows[9].repayment, 1.0);
        assert_eq!(rows[9].notional_after, 0.0);
    }

    #[test]
    fn bullet_power_law_and_total_interest() {
        let spec = MortgageSpec::new(MortgageKind::Bullet, 1.0, 0.03, 10).unwrap();
        let lambda = 0.12;
        let rows = constant_cpr_schedule(&spec, lambda).unwrap();
        assert!((rows[4].notional_after - 0.5277319168).abs() < 1e-10);
        for (i, row) in rows[..9].iter().enumerate() {
            assert_relative_eq!(row.notional_after, 0.88f64.powi(i as i32 + 1), max_relative = 1e-14);
        }
        let total: f64 = rows.iter().map(|r| r.interest).sum();
        let closed = 0.03 / lambda * (1.0 - (1.0 - lambda).powi(10));
        assert_relative_eq!(total, closed, max_relative = 1e-13);
    }

    #[test]
    fn annuity_installment_constant_without_prepayment() {
        let spec = MortgageSpec::new(MortgageKind::Annuity, 1.0, 0.03, 10).unwrap();
        let rows = constant_cpr_schedule(&spec, 0.0).unwrap();
        for row in &rows {
            assert!((row.installment - rows[0].installment).abs() < 1e-12);
        }
        assert!(rows[9].notional_after.abs() < 1e-15);
    }

    #[test]
    fn psi_iteration_matches_schedule() {
        for kind in [MortgageKind::Bullet, MortgageKind::Annuity] {
            for &lambda in &[0.0, 0.04, 0.12, 0.3] {
                let spec = MortgageSpec::new(kind, 1.0, 0.03, 10).unwrap();
                let rows = constant_cpr_schedule(&spec, lambda).unwrap();
                let path = notional_path(&spec, &[lambda; 9]).unwrap();
                for i in 0..9 {
                    let n = rows[i].notional_after;
                    assert!((path[i + 1] - n).abs() <= 1e-12 * n, "{kind} {lambda} {i}");
                }
                assert_eq!(path[10], 0.0);
            }
        }
    }

    #[test]
    fn zero_rate_annuity_is_straight_line() {
        let spec = MortgageSpec::new(MortgageKind::Annuity, 1.0, 0.0, 4).unwrap();
        let rows = constant_cpr_schedule(&spec, 0.0).unwrap();
        for (i, row) in rows.iter().enumerate() {
            assert!((row.notional_after - (1.0 - 0.25 * (i as f64 + 1.0))).abs() < 1e-15);
        }
        let p = psi(MortgageKind::Annuity, 0.0, 0.0, 4.0, 0.0).unwrap();
        assert!((p - 0.75).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn notional_non_increasing_in_prepayment(l1 in 0.0f64..0.9, dl in 0.0f64..0.09, k in -0.005f64..0.08) {
            for kind in [MortgageKind::Bullet, MortgageKind::Annuity] {
                let spec = MortgageSpec::new(kind, 1.0, k, 10).unwrap();
                let lo = constant_cpr_schedule(&spec, l1).unwrap();
                let hi = constant_cpr_schedule(&spec, l1 + dl).unwrap();
                for (a, b) in lo.iter().zip(&hi) {
                    prop_assert!(b.notional_after <= a.notional_after + 1e-15);
                    prop_assert!(b.notional_after >= 0.0);
                }
            }
        }
    }
}
