//! Law-of-large-numbers trends of final-time empirical marginals.

use mfrate_core::ito_euler::{euler_simulate, mckean_vlasov_flow, EulerGrid, FlowOptions, ItoSpec};
use mfrate_core::measures::{bounded_lipschitz_distance_1d, DiscreteDistribution, EmpiricalMeasure, GaussianMeasure};
use mfrate_core::quadrature::normal_quantile_grid;
use mfrate_core::sampling::replication_seed;
use mfrate_core::toy_model::{toy_mckean_vlasov, toy_simulate, DriftFunction, ToyModelSpec};
use mfrate_core::{Error, ExtReal};
use rayon::prelude::*;

use crate::error::Result;
use crate::report::{Plot, RateReport, RateRow, Series};

/// A system whose final marginal has a known Gaussian limit.
#[derive(Debug, Clone)]
pub enum LlnTarget {
    Toy(ToyModelSpec),
    Ito(ItoSpec, EulerGrid),
}

impl LlnTarget {
    /// The toy model with `b ≡ 0`: particles do not interact.
    pub fn iid() -> Self {
        LlnTarget::Toy(ToyModelSpec::standard(DriftFunction::Constant { scale: 0.0 }))
    }

    fn limit(&self) -> Result<GaussianMeasure> {
        Ok(match self {
            LlnTarget::Toy(spec) => toy_mckean_vlasov(spec)?.marginal(&[1])?,
            LlnTarget::Ito(spec, grid) => {
                if spec.dim() != 1 {
                    return Err(Error::Capacity("the LLN trend needs a one-dimensional Itô spec".into()).into());
                }
                mckean_vlasov_flow(spec, grid, FlowOptions::default())?
                    .path_law
                    .ok_or_else(|| Error::Capacity("the LLN trend needs a linear Itô spec".into()))?
                    .marginal(grid.steps())?
            }
        })
    }

    fn final_values(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        Ok(match self {
            LlnTarget::Toy(spec) => toy_simulate(spec, n, seed)?.paths.iter().map(|p| p[1]).collect(),
            LlnTarget::Ito(spec, grid) => euler_simulate(spec, grid, n, seed)?
                .paths
                .iter()
                .map(|p| p[grid.steps()][0])
                .collect(),
        })
    }
}

/// Equal-weight quantile discretization of a one-dimensional Gaussian.
pub fn quantile_discretization(law: &GaussianMeasure, k: usize) -> Result<DiscreteDistribution<f64>> {
    let (m, sd) = (law.mean()[0], law.cov()[(0, 0)].sqrt());
    Ok(DiscreteDistribution::normalized(
        normal_quantile_grid(k, m, sd).into_iter().map(|x| (x, 1.0)).collect(),
    )?)
}

/// Seed-averaged `d_bL(empirical final marginal, limit)` per `N`.
pub fn lln_distances(target: &LlnTarget, schedule: &[u64], replications: usize, seed: u64, quantiles: usize) -> Result<Vec<(u64, f64)>> {
    let limit = quantile_discretization(&target.limit()?, quantiles)?;
    schedule
        .iter()
        .map(|&n| {
            let distances = (0..replications as u64)
                .into_par_iter()
                .map(|r| {
                    let values = target.final_values(n as usize, replication_seed(seed, r))?;
                    let empirical = EmpiricalMeasure::from_samples(values)?.to_distribution();
                    Ok(bounded_lipschitz_distance_1d(&empirical, &limit)?)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((n, distances.iter().sum::<f64>() / replications as f64))
        })
        .collect()
}

/// Least-squares slope of `log d` against `log N`.
pub fn log_log_slope(points: &[(u64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|(n, d)| ((*n as f64).ln(), d.ln())).collect();
    let k = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Result of [`lln_trend`].
#[derive(Debug, Clone, PartialEq)]
pub struct LlnTrend {
    /// One row per system and `N`: `measured` and `gap` hold the distance,
    /// `bound` the distance at the previous `N`; a row passes iff it is
    /// strictly below its predecessor.
    pub report: RateReport,
    pub plot: Plot,
    pub slopes: Vec<(String, f64)>,
}

pub fn lln_trend(targets: &[(String, LlnTarget)], schedule: &[u64], replications: usize, seed: u64, quantiles: usize) -> Result<LlnTrend> {
    let mut report = RateReport::default();
    let mut series = Vec::new();
    let mut slopes = Vec::new();
    for (name, target) in targets {
        let points = lln_distances(target, schedule, replications, seed, quantiles)?;
        let mut previous = f64::INFINITY;
        for &(n, d) in &points {
            let mut row = RateRow::new(name.clone(), n, ExtReal::Finite(d), ExtReal::ZERO, previous);
            row.pass = d < previous;
            report.rows.push(row);
            previous = d;
        }
        if points.len() > 1 {
            slopes.push((name.clone(), log_log_slope(&points)));
        }
        series.push(Series {
            label: name.clone(),
            points: points.iter().map(|(n, d)| (*n as f64, *d)).collect(),
        });
    }
    Ok(LlnTrend {
        report,
        plot: Plot {
            title: "bounded-Lipschitz distance to the limit marginal".into(),
            x_label: "N".into(),
            y_label: "d_bL".into(),
            log_x: true,
            log_y: true,
            series,
        },
        slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_n_trivially_passes() {
        let t = lln_trend(&[("iid".into(), LlnTarget::iid())], &[50], 2, 1, 500).unwrap();
        assert_eq!(t.report.rows.len(), 1);
        assert!(t.report.passed());
        assert!(t.slopes.is_empty());
    }

    #[test]
    fn slope_of_a_power_law() {
        let pts = [(10, 1.0), (100, 10f64.powf(-0.5)), (1000, 0.1)];
        assert!((log_log_slope(&pts) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn iid_baseline_decays_like_a_square_root() {
        let t = lln_trend(&[("iid".into(), LlnTarget::iid())], &[100, 400, 1600, 6400], 20, 3, 4000).unwrap();
        assert!(t.report.passed());
        let slope = t.slopes[0].1;
        assert!((slope + 0.5).abs() <= 0.2, "{slope}");
    }
}
