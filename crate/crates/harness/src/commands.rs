//! Subcommand dispatch shared by the binary and the tests.

use std::path::{Path, PathBuf};

use crate::config::{LlnSystem, RunConfig};
use crate::error::Result;
use crate::experiments::decay::meanfield_decay_scan;
use crate::experiments::identities::{identity_suite, identity_table};
use crate::experiments::lln::{lln_trend, LlnTarget};
use crate::experiments::runs::{rate, simulate};
use crate::experiments::sanov::{gap_plot, sanov_check};
use crate::report::{emit_reports, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Simulate the configured model and write every particle path.
    Simulate,
    /// Evaluate the rate function at the configured law.
    Rate,
    /// Exact method-of-types check for iid sampling.
    SanovCheck,
    /// Exact type-decay scan of the configured mean-field chain.
    DecayScan,
    /// Run every cross-module identity.
    IdentitySuite,
    /// Seed-averaged distance to the limit marginal over the N schedule.
    LlnTrend,
}

impl Command {
    pub fn stem(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Rate => "rate",
            Command::SanovCheck => "sanov",
            Command::DecayScan => "decay",
            Command::IdentitySuite => "identities",
            Command::LlnTrend => "lln",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

pub fn execute(command: Command, config: &RunConfig, seed: u64, out: &Path, format: Format) -> Result<Outcome> {
    let stem = command.stem();
    let (passed, table, plot, summary) = match command {
        Command::Simulate => {
            let (table, plot) = simulate(config, seed)?;
            let summary = vec![format!("{} rows", table.rows.len())];
            (true, table, Some(plot), summary)
        }
        Command::Rate => {
            let table = rate(config)?;
            let summary = table.rows.iter().map(|r| r.join(" ")).collect();
            (true, table, None, summary)
        }
        Command::SanovCheck => {
            let report = sanov_check(&config.sanov.mu, &config.sanov.n)?;
            let failing = report.rows.iter().filter(|r| !r.pass).count();
            let summary = vec![format!("{} types, {failing} outside the bound", report.rows.len())];
            (report.passed(), report.table(), Some(gap_plot("method of types", &report)), summary)
        }
        Command::DecayScan => {
            let report = meanfield_decay_scan(&config.chain.build()?, &config.decay.n)?;
            let failing = report.rows.iter().filter(|r| !r.pass).count();
            let mut summary = vec![format!("{} types, {failing} outside the bound", report.rows.len())];
            summary.extend(report.failures.iter().cloned());
            (report.passed(), report.table(), Some(gap_plot("mean-field type decay", &report)), summary)
        }
        Command::IdentitySuite => {
            let rows = identity_suite(seed, config.identities.mutation)?;
            let summary = rows
                .iter()
                .map(|r| format!("{} {}: {:e} (tolerance {:e})", if r.pass { "pass" } else { "FAIL" }, r.name, r.max_deviation, r.tolerance))
                .collect();
            (rows.iter().all(|r| r.pass), identity_table(&rows), None, summary)
        }
        Command::LlnTrend => {
            let targets = config
                .lln
                .systems
                .iter()
                .map(|s| {
                    let target = match s {
                        LlnSystem::Toy => LlnTarget::Toy(config.toy.build()?),
                        LlnSystem::Ito => {
                            let (spec, grid) = config.ito.build()?;
                            LlnTarget::Ito(spec, grid)
                        }
                        LlnSystem::Iid => LlnTarget::iid(),
                    };
                    Ok((s.name().to_string(), target))
                })
                .collect::<Result<Vec<_>>>()?;
            let trend = lln_trend(&targets, &config.lln.n, config.lln.replications, seed, config.lln.quantiles)?;
            let mut summary: Vec<String> = trend
                .report
                .rows
                .iter()
                .map(|r| format!("{} N={} d_bL={}", r.instance, r.n, crate::report::fmt_ext(r.measured)))
                .collect();
            summary.extend(trend.slopes.iter().map(|(s, k)| format!("{s} log-log slope {k:.3}")));
            (trend.report.passed(), trend.report.table(), Some(trend.plot), summary)
        }
    };
    let files = emit_reports(out, stem, &table, plot.as_ref(), format)?;
    Ok(Outcome { passed, files, summary })
}
