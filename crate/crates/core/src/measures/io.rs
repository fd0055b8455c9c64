use std::fmt::Write;

use nalgebra::{DMatrix, DVector};

use super::atom::Atom;
use super::discrete::DiscreteDistribution;
use super::gaussian::GaussianMeasure;
use crate::{Error, Result};

/// One line per atom: `atom<TAB>weight`, weights with 17 significant digits.
pub fn write_table<A: Atom>(dist: &DiscreteDistribution<A>) -> String {
    let mut out = String::new();
    for (a, w) in dist.atoms() {
        writeln!(out, "{}\t{w:.16e}", a.render()).expect("writing to a String");
    }
    out
}

/// Parses the format of [`write_table`]. Blank lines and lines starting with
/// `#` are skipped.
pub fn read_table<A: Atom>(text: &str) -> Result<DiscreteDistribution<A>> {
    let mut atoms = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (atom, weight) = line
            .rsplit_once('\t')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `atom<TAB>weight`", no + 1)))?;
        let weight: f64 = weight
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: weight: {e}", no + 1)))?;
        atoms.push((A::parse(atom)?, weight));
    }
    DiscreteDistribution::new(atoms)
}

/// `mean<TAB>m₁,…,mₙ` followed by one `cov<TAB>…` line per covariance row.
pub fn write_gaussian(g: &GaussianMeasure) -> String {
    let row = |v: Vec<f64>| v.render();
    let mut out = format!("mean\t{}\n", row(g.mean().iter().copied().collect()));
    for r in g.cov().row_iter() {
        writeln!(out, "cov\t{}", row(r.iter().copied().collect())).expect("writing to a String");
    }
    out
}

pub fn read_gaussian(text: &str) -> Result<GaussianMeasure> {
    let mut mean = None;
    let mut rows = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')) {
        let (key, values) = line
            .split_once('\t')
            .ok_or_else(|| Error::Parse(format!("expected `key<TAB>values`, got `{line}`")))?;
        let values = Vec::<f64>::parse(values)?;
        match key {
            "mean" => mean = Some(values),
            "cov" => rows.push(values),
            other => return Err(Error::Parse(format!("unknown key `{other}`"))),
        }
    }
    let mean = mean.ok_or_else(|| Error::Parse("missing mean line".into()))?;
    let n = mean.len();
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("covariance is not {n}x{n}")));
    }
    GaussianMeasure::new(
        DVector::from_vec(mean),
        DMatrix::from_fn(n, n, |i, j| rows[i][j]),
    )
}
