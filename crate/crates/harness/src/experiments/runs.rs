//! Plain simulation and rate evaluation for the configured models.

use mfrate_core::ito_euler::{euler_simulate, ito_rate_re_form, mckean_vlasov_flow, variational_upper_bound, FlowOptions};
use mfrate_core::measures::{DiscreteDistribution, GaussianMeasure};
use mfrate_core::meanfield_chain::{chain_rate_function, chain_simulate};
use mfrate_core::toy_model::{toy_rate_function, toy_simulate};

use crate::config::{Model, RunConfig};
use crate::error::{HarnessError, Result};
use crate::report::{fmt_ext, fmt_f64, Plot, Series, Table};

/// Particle paths shown in a simulation plot.
const PLOTTED_PATHS: usize = 5;

/// One row per particle and stage, plus a plot of the first coordinate.
pub fn simulate(config: &RunConfig, seed: u64) -> Result<(Table, Plot)> {
    let n = config.simulate.particles;
    let paths: Vec<Vec<Vec<f64>>> = match config.simulate.model {
        Model::Toy => toy_simulate(&config.toy.build()?, n, seed)?
            .paths
            .into_iter()
            .map(|p| p.into_iter().map(|x| vec![x]).collect())
            .collect(),
        Model::Chain => chain_simulate(&config.chain.build()?, n, seed)?
            .paths
            .into_iter()
            .map(|p| p.into_iter().map(|x| vec![x as f64]).collect())
            .collect(),
        Model::Ito => {
            let (spec, grid) = config.ito.build()?;
            euler_simulate(&spec, &grid, n, seed)?.paths
        }
    };
    let mut table = Table::new(&["particle", "stage", "state"]);
    for (i, path) in paths.iter().enumerate() {
        for (t, x) in path.iter().enumerate() {
            let state = x.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(";");
            table.push(vec![i.to_string(), t.to_string(), state]);
        }
    }
    let stages = paths[0].len();
    let mut series: Vec<Series> = paths
        .iter()
        .take(PLOTTED_PATHS)
        .enumerate()
        .map(|(i, p)| Series {
            label: format!("particle {i}"),
            points: p.iter().enumerate().map(|(t, x)| (t as f64, x[0])).collect(),
        })
        .collect();
    series.push(Series {
        label: "mean".into(),
        points: (0..stages)
            .map(|t| (t as f64, paths.iter().map(|p| p[t][0]).sum::<f64>() / n as f64))
            .collect(),
    });
    let plot = Plot {
        title: format!("{n} particles"),
        x_label: "stage".into(),
        y_label: "first coordinate".into(),
        log_x: false,
        log_y: false,
        series,
    };
    Ok((table, plot))
}

/// The rate function of the configured model at the configured `θ`.
pub fn rate(config: &RunConfig) -> Result<Table> {
    let mut table = Table::new(&["model", "form", "value"]);
    let c = &config.rate;
    match c.model {
        Model::Toy => {
            let theta = GaussianMeasure::from_slices(&c.mean, &c.cov)?;
            let r = toy_rate_function(&theta, &config.toy.build()?)?;
            table.push(vec!["toy".into(), "re-minus-f".into(), fmt_f64(r.re_minus_f)]);
            table.push(vec!["toy".into(), "entropy".into(), fmt_f64(r.entropy_form)]);
        }
        Model::Chain => {
            if c.paths.is_empty() || c.paths.len() != c.weights.len() {
                return Err(HarnessError::Config("[rate] needs matching `paths` and `weights` for the chain".into()));
            }
            let theta = DiscreteDistribution::normalized(c.paths.iter().cloned().zip(c.weights.iter().copied()).collect())?;
            let r = chain_rate_function(&theta, &config.chain.build()?)?;
            table.push(vec!["chain".into(), "entropy".into(), fmt_ext(r)]);
        }
        Model::Ito => {
            let (spec, grid) = config.ito.build()?;
            let law = mckean_vlasov_flow(&spec, &grid, FlowOptions::default())?
                .path_law
                .ok_or_else(|| HarnessError::Config("Itô rates need a linear spec".into()))?;
            let means: Vec<_> = law.mean_flow()[1..]
                .iter()
                .enumerate()
                .map(|(k, m)| m.add_scalar(c.shift * (k + 1) as f64 * grid.step()))
                .collect();
            let theta = law.with_means(&means)?;
            let bound = variational_upper_bound(&theta, &spec, &grid)?;
            table.push(vec!["ito".into(), "entropy".into(), fmt_ext(ito_rate_re_form(&theta, &spec, &grid)?)]);
            table.push(vec!["ito".into(), "variational".into(), fmt_ext(bound.value)]);
        }
    }
    Ok(table)
}
