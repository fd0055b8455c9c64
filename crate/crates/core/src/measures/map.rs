use nalgebra::{DMatrix, DVector};

use super::atom::Atom;
use super::discrete::{canonicalize, find_index, DiscreteDistribution};
use crate::{Error, Result};

/// A total map from atoms of one space to atoms of another.
pub trait MeasurableMap<A, B> {
    fn image(&self, a: &A) -> Result<B>;
}

impl<A, B, F: Fn(&A) -> B> MeasurableMap<A, B> for F {
    fn image(&self, a: &A) -> Result<B> {
        Ok(self(a))
    }
}

/// A map given by an explicit table on a finite domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMap<A, B> {
    table: Vec<(A, B)>,
}

impl<A: Atom, B: Clone> FiniteMap<A, B> {
    /// Rejects tables that list a source atom twice.
    pub fn new(table: Vec<(A, B)>) -> Result<Self> {
        let n = table.len();
        let keys = canonicalize(table.iter().map(|(a, _)| (a.clone(), 1u64)).collect());
        if keys.len() != n {
            return Err(Error::Domain("source atom listed twice".into()));
        }
        let mut table = table;
        table.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(FiniteMap { table })
    }

    pub fn table(&self) -> &[(A, B)] {
        &self.table
    }
}

impl<A: Atom, B: Clone> MeasurableMap<A, B> for FiniteMap<A, B> {
    fn image(&self, a: &A) -> Result<B> {
        find_index(&self.table, a)
            .map(|i| self.table[i].1.clone())
            .ok_or_else(|| Error::Domain(format!("atom {} outside the map's domain", a.render())))
    }
}

/// `x ↦ M x + c` on real vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    matrix: DMatrix<f64>,
    offset: DVector<f64>,
}

impl AffineMap {
    pub fn new(matrix: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        if matrix.nrows() != offset.len() {
            return Err(Error::Domain(format!(
                "{}x{} matrix with offset of length {}",
                matrix.nrows(),
                matrix.ncols(),
                offset.len()
            )));
        }
        Ok(AffineMap { matrix, offset })
    }
}

impl MeasurableMap<Vec<f64>, Vec<f64>> for AffineMap {
    fn image(&self, a: &Vec<f64>) -> Result<Vec<f64>> {
        if a.len() != self.matrix.ncols() {
            return Err(Error::Domain(format!(
                "point of dimension {} for a map on dimension {}",
                a.len(),
                self.matrix.ncols()
            )));
        }
        let y = &self.matrix * DVector::from_column_slice(a) + &self.offset;
        Ok(y.iter().copied().collect())
    }
}

/// The image measure `γ∘ψ⁻¹`: each target atom receives the total weight of
/// its preimage.
pub fn pushforward<A: Atom, B: Atom>(
    gamma: &DiscreteDistribution<A>,
    psi: &impl MeasurableMap<A, B>,
) -> Result<DiscreteDistribution<B>> {
    let atoms = gamma
        .atoms()
        .iter()
        .map(|(a, w)| Ok((psi.image(a)?, *w)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscreteDistribution::from_parts(atoms))
}
