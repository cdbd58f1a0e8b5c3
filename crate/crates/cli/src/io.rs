//! Market data and loan file formats.

use std::path::Path;

use prepay::curve::SwapQuote;
use prepay::prepayment::LoanObservation;
use prepay::shortrate::{SwaptionQuote, COUNTER_DIAGONAL_10Y};
use prepay::BP;

use crate::error::{CliError, CliResult};

fn open(path: &Path) -> CliResult<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| CliError::io(path, e))
}

fn read_records<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let mut rdr = open(path)?;
    let rows = rdr
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| CliError::io(path, format!("row {}: {e}", i + 1))))
        .collect::<CliResult<Vec<T>>>()?;
    if rows.is_empty() {
        return Err(CliError::io(path, "no data rows"));
    }
    Ok(rows)
}

/// Par swap quotes, header `maturity_years,par_rate,fixed_frequency`.
pub fn read_quotes(path: &Path) -> CliResult<Vec<SwapQuote>> {
    read_records(path)
}

/// Loan observations, header `period,starting_balance,prepaid_amount,incentive`.
pub fn read_loans(path: &Path) -> CliResult<Vec<LoanObservation>> {
    let rows: Vec<LoanObservation> = read_records(path)?;
    for (i, r) in rows.iter().enumerate() {
        r.validate().map_err(|e| CliError::io(path, format!("row {}: {e}", i + 1)))?;
    }
    Ok(rows)
}

/// Years represented by a tenor label such as `1Mo` or `10Yr`.
pub fn parse_tenor_label(label: &str) -> Option<f64> {
    let l = label.trim();
    let (num, scale) = l
        .strip_suffix("Mo")
        .map(|n| (n, 1.0 / 12.0))
        .or_else(|| l.strip_suffix("Yr").or_else(|| l.strip_suffix('Y')).map(|n| (n, 1.0)))?;
    let n: u32 = num.parse().ok()?;
    (n > 0).then_some(f64::from(n) * scale)
}

/// Normal swaption vols by expiry (rows) and underlying tenor (columns), in bps.
#[derive(Debug, Clone, PartialEq)]
pub struct VolMatrix {
    pub expiries: Vec<(String, f64)>,
    pub tenors: Vec<(String, f64)>,
    pub vols_bps: Vec<Vec<f64>>,
}

impl VolMatrix {
    pub fn read(path: &Path) -> CliResult<Self> {
        let mut rdr = open(path)?;
        let headers = rdr.headers().map_err(|e| CliError::io(path, e))?.clone();
        let tenors = headers
            .iter()
            .skip(1)
            .map(|h| {
                parse_tenor_label(h)
                    .map(|y| (h.to_string(), y))
                    .ok_or_else(|| CliError::io(path, format!("bad tenor label '{h}'")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        if tenors.is_empty() {
            return Err(CliError::io(path, "no tenor columns"));
        }
        let mut expiries = vec![];
        let mut vols_bps = vec![];
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| CliError::io(path, format!("row {}: {e}", i + 1)))?;
            let label = rec.get(0).unwrap_or_default();
            let years = parse_tenor_label(label)
                .ok_or_else(|| CliError::io(path, format!("row {}: bad expiry label '{label}'", i + 1)))?;
            let row = rec
                .iter()
                .skip(1)
                .map(|c| {
                    c.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite() && *v >= 0.0)
                        .ok_or_else(|| CliError::io(path, format!("row {label}: bad vol '{c}'")))
                })
                .collect::<CliResult<Vec<_>>>()?;
            if row.len() != tenors.len() {
                return Err(CliError::io(path, format!("row {label} has {} vols, expected {}", row.len(), tenors.len())));
            }
            expiries.push((label.to_string(), years));
            vols_bps.push(row);
        }
        if expiries.is_empty() {
            return Err(CliError::io(path, "no expiry rows"));
        }
        Ok(Self { expiries, tenors, vols_bps })
    }

    /// Quoted vol in bps for an expiry and tenor in years.
    pub fn get(&self, expiry: f64, tenor: f64) -> Option<f64> {
        let same = |a: f64, b: f64| (a - b).abs() < 1e-9;
        let r = self.expiries.iter().position(|e| same(e.1, expiry))?;
        let c = self.tenors.iter().position(|t| same(t.1, tenor))?;
        Some(self.vols_bps[r][c])
    }

    /// Calibration quotes for an instrument list: `counterdiag10y` or a
    /// comma-separated list such as `1Y-10Y,5Y-5Y`.
    pub fn instruments(&self, spec: &str) -> CliResult<Vec<SwaptionQuote>> {
        let pairs: Vec<(f64, f64)> = if spec.trim() == "counterdiag10y" {
            COUNTER_DIAGONAL_10Y.to_vec()
        } else {
            spec.split(',')
                .map(|item| {
                    let bad = || CliError::input(format!("instrument '{item}' must look like 5Y-5Y"));
                    let (e, t) = item.trim().split_once('-').ok_or_else(bad)?;
                    Ok((parse_tenor_label(e).ok_or_else(bad)?, parse_tenor_label(t).ok_or_else(bad)?))
                })
                .collect::<CliResult<_>>()?
        };
        pairs
            .into_iter()
            .map(|(e, t)| {
                let v = self
                    .get(e, t)
                    .ok_or_else(|| CliError::input(format!("no vol quote for {e}Y-{t}Y in the vol matrix")))?;
                Ok(SwaptionQuote::new(e, t, v * BP)?)
            })
            .collect()
    }
}
