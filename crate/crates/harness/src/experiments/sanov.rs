//! Exact method-of-types check for iid sampling from a finite law.

use mfrate_core::combinatorics::{compositions, log_factorials, log_multinomial};
use mfrate_core::measures::{relative_entropy, DiscreteDistribution, EmpiricalMeasure};
use mfrate_core::meanfield_chain::MAX_TYPES;
use mfrate_core::{Error, ExtReal};

use crate::error::Result;
use crate::report::{Plot, RateReport, RateRow, Series};

/// Largest alphabet accepted.
pub const MAX_ALPHABET: usize = 6;
/// Largest sample size accepted.
pub const MAX_N: u64 = 200;

/// `M · log(N + 1)/N`.
pub fn sanov_bound(alphabet: usize, n: u64) -> f64 {
    alphabet as f64 * ((n + 1) as f64).ln() / n as f64
}

/// `log P(type)` under iid sampling from `mu`, `−∞` when impossible.
pub fn type_log_probability(counts: &[u64], mu: &[f64], table: &[f64]) -> f64 {
    let mut lp = log_multinomial(counts, table);
    for (k, p) in counts.iter().zip(mu) {
        if *k > 0 {
            if *p == 0.0 {
                return f64::NEG_INFINITY;
            }
            lp += *k as f64 * p.ln();
        }
    }
    lp
}

/// The label of a type: its counts joined by `:`.
pub fn type_label(counts: &[u64]) -> String {
    counts.iter().map(u64::to_string).collect::<Vec<_>>().join(":")
}

/// Compares `−(1/N) log P(ν)` with `R(ν ‖ μ)` for every type at every `N`.
pub fn sanov_check(mu: &[f64], schedule: &[u64]) -> Result<RateReport> {
    let m = mu.len();
    if m == 0 || m > MAX_ALPHABET {
        return Err(Error::Capacity(format!("alphabet of {m} letters; at most {MAX_ALPHABET} are supported")).into());
    }
    if let Some(n) = schedule.iter().find(|n| **n > MAX_N || **n == 0) {
        return Err(Error::Capacity(format!("N = {n} outside 1..={MAX_N}")).into());
    }
    let law = DiscreteDistribution::new(mu.iter().enumerate().map(|(i, p)| (i, *p)).collect())?;
    let table = log_factorials(schedule.iter().copied().max().unwrap_or(0) as usize);
    let mut report = RateReport::default();
    for &n in schedule {
        let bound = sanov_bound(m, n);
        for counts in compositions(n, m, MAX_TYPES)? {
            let lp = type_log_probability(&counts, mu, &table);
            let measured = if lp == f64::NEG_INFINITY {
                ExtReal::Infinite
            } else {
                ExtReal::Finite(-lp / n as f64)
            };
            let nu = EmpiricalMeasure::from_counts(counts.iter().enumerate().map(|(i, k)| (i, *k)).collect())?;
            let rate = relative_entropy(&nu.to_distribution(), &law)?;
            report.rows.push(RateRow::new(type_label(&counts), n, measured, rate, bound));
        }
    }
    Ok(report)
}

/// Largest gap and the bound per `N`.
pub fn gap_plot(title: &str, report: &RateReport) -> Plot {
    let mut ns: Vec<u64> = report.rows.iter().map(|r| r.n).collect();
    ns.dedup();
    let mut gaps = Vec::new();
    let mut bounds = Vec::new();
    for n in ns {
        let rows = report.rows.iter().filter(|r| r.n == n);
        let gap = rows
            .clone()
            .filter_map(|r| r.gap.finite())
            .fold(0.0, f64::max);
        let bound = rows.map(|r| r.bound).fold(0.0, f64::max);
        gaps.push((n as f64, gap));
        bounds.push((n as f64, bound));
    }
    Plot {
        title: title.into(),
        x_label: "N".into(),
        y_label: "gap".into(),
        log_x: true,
        log_y: true,
        series: vec![
            Series { label: "max gap".into(), points: gaps },
            Series { label: "bound".into(), points: bounds },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_value_at_four() {
        let report = sanov_check(&[0.5, 0.5], &[4]).unwrap();
        let row = report.rows.iter().find(|r| r.instance == "3:1").unwrap();
        let measured = -(4.0f64 / 16.0).ln() / 4.0;
        let rate = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert!((row.gap.finite().unwrap() - (measured - rate)).abs() < 1e-12);
        assert!((row.gap.finite().unwrap() - 0.2158).abs() < 1e-4);
        assert!((row.bound - 0.8047).abs() < 1e-4);
        assert!(report.passed());
    }

    #[test]
    fn representable_law_has_zero_rate() {
        let report = sanov_check(&[0.25, 0.75], &[8]).unwrap();
        let modal = report.rows.iter().find(|r| r.instance == "2:6").unwrap();
        assert_eq!(modal.rate, ExtReal::ZERO);
        let best = report
            .rows
            .iter()
            .filter_map(|r| r.measured.finite())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(modal.measured.finite().unwrap(), best);
    }

    #[test]
    fn gaps_at_one_hundred() {
        let report = sanov_check(&[0.5, 0.5], &[100]).unwrap();
        assert_eq!(report.rows.len(), 101);
        assert!(report.passed());
        assert!((report.rows[0].bound - 2.0 * 101f64.ln() / 100.0).abs() < 1e-15);
    }

    #[test]
    fn zero_weight_letters() {
        let report = sanov_check(&[1.0, 0.0], &[3]).unwrap();
        assert!(report.passed());
        assert_eq!(report.rows.iter().filter(|r| r.rate == ExtReal::Infinite).count(), 3);
    }

    #[test]
    fn capacity_limits() {
        assert!(sanov_check(&[0.1; 10], &[4]).is_err());
        assert!(sanov_check(&[0.5, 0.5], &[400]).is_err());
        assert!(sanov_check(&[1.0 / 6.0; 6], &[200]).is_err());
    }
}
