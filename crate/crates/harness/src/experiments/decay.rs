//! Exact type-decay scans for mean-field chains.

use std::collections::BTreeMap;

use mfrate_core::meanfield_chain::{types_decay_bound_check, MeanFieldChainSpec};

use crate::error::Result;
use crate::report::{RateReport, RateRow};

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Runs the decay check at every `N`. Beyond every row passing, gaps of a
/// fixed rational type must not grow along the schedule, and must shrink
/// strictly wherever they are nonzero.
pub fn meanfield_decay_scan(spec: &MeanFieldChainSpec, schedule: &[u64]) -> Result<RateReport> {
    let mut report = RateReport::default();
    let lcm = schedule.iter().fold(1u64, |l, n| l / gcd(l, *n) * n);
    let mut by_type: BTreeMap<String, Vec<(u64, f64)>> = BTreeMap::new();
    for &n in schedule {
        let check = types_decay_bound_check(spec, n)?;
        for row in check.rows {
            let label = row
                .path_type
                .counts()
                .iter()
                .map(|(path, k)| format!("{}x{k}", path.iter().map(usize::to_string).collect::<String>()))
                .collect::<Vec<_>>()
                .join(" ");
            if let Some(gap) = row.gap.finite() {
                let key = row
                    .path_type
                    .counts()
                    .iter()
                    .map(|(path, k)| format!("{path:?}={}", k * (lcm / n)))
                    .collect::<Vec<_>>()
                    .join(";");
                by_type.entry(key).or_default().push((n, gap));
            }
            report.rows.push(RateRow::new(label, n, row.measured, row.rate, check.bound));
        }
    }
    for (key, gaps) in by_type {
        for w in gaps.windows(2) {
            let ((n0, g0), (n1, g1)) = (w[0], w[1]);
            let shrinks = if g0 > 1e-12 { g1 < g0 } else { g1 <= g0 + 1e-12 };
            if !shrinks {
                report
                    .failures
                    .push(format!("type {key}: gap {g1:e} at N = {n1} after {g0:e} at N = {n0}"));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::sanov::sanov_check;
    use mfrate_core::meanfield_chain::{decay_bound, TransitionFamily};
    use nalgebra::DMatrix;

    #[test]
    fn herding_scan_passes() {
        let spec = MeanFieldChainSpec::new(vec![0.6, 0.4], TransitionFamily::herding(0.1, 0.5).unwrap(), 2).unwrap();
        let report = meanfield_decay_scan(&spec, &[10, 20]).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        let b10 = decay_bound(&spec, 10);
        let b20 = decay_bound(&spec, 20);
        assert!((b20 / b10 - 0.5 * 21f64.ln() / 11f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn one_stage_constant_chain_is_sanov() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let spec = MeanFieldChainSpec::new(vec![0.3, 0.7], TransitionFamily::Constant(vec![a]), 0).unwrap();
        let chain = meanfield_decay_scan(&spec, &[12]).unwrap();
        let sanov = sanov_check(&[0.3, 0.7], &[12]).unwrap();
        assert_eq!(chain.rows.len(), sanov.rows.len());
        for s in &sanov.rows {
            let k: Vec<u64> = s.instance.split(':').map(|x| x.parse().unwrap()).collect();
            let label = [(0, k[0]), (1, k[1])]
                .iter()
                .filter(|(_, c)| *c > 0)
                .map(|(p, c)| format!("{p}x{c}"))
                .collect::<Vec<_>>()
                .join(" ");
            let c = chain.rows.iter().find(|r| r.instance == label).unwrap();
            assert!(c.measured.approx_eq(s.measured, 1e-12));
            assert!(c.rate.approx_eq(s.rate, 1e-12));
        }
    }
}
