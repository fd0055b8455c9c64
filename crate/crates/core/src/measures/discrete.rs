use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::Add;

use super::atom::Atom;
use crate::{Error, Result};

/// Allowed deviation of a distribution's total mass from 1.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Weight type of a measure: real probabilities or integer counts.
pub trait Mass: Copy + Debug + PartialEq + Default + Add<Output = Self> + Send + Sync {
    fn is_zero(&self) -> bool;
    /// This weight as a probability, given the total mass.
    fn probability(self, total: Self) -> f64;
}

impl Mass for f64 {
    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn probability(self, _total: f64) -> f64 {
        self
    }
}

impl Mass for u64 {
    fn is_zero(&self) -> bool {
        *self == 0
    }

    fn probability(self, total: u64) -> f64 {
        self as f64 / total as f64
    }
}

/// Sort by the atom order and merge entries that denote the same atom.
pub(crate) fn canonicalize<A: Atom, W: Mass>(mut atoms: Vec<(A, W)>) -> Vec<(A, W)> {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(A, W)> = Vec::with_capacity(atoms.len());
    'next: for (a, w) in atoms {
        for slot in out.iter_mut().rev() {
            if slot.0.bucket_cmp(&a) != Ordering::Equal {
                break;
            }
            if slot.0.same_atom(&a) {
                slot.1 = slot.1 + w;
                continue 'next;
            }
        }
        out.push((a, w));
    }
    out
}

/// Index of the entry matching `a` in canonical storage.
pub(crate) fn find_index<A: Atom, W>(atoms: &[(A, W)], a: &A) -> Option<usize> {
    let lo = atoms.partition_point(|x| x.0.bucket_cmp(a) == Ordering::Less);
    atoms[lo..]
        .iter()
        .take_while(|x| x.0.bucket_cmp(a) == Ordering::Equal)
        .position(|x| x.0.same_atom(a))
        .map(|i| lo + i)
}

fn check_compatible<A: Atom, W>(atoms: &[(A, W)]) -> Result<()> {
    if let Some((first, _)) = atoms.first() {
        if let Some((bad, _)) = atoms.iter().find(|(a, _)| !a.compatible(first)) {
            return Err(Error::Domain(format!(
                "atoms {} and {} live in different spaces",
                first.render(),
                bad.render()
            )));
        }
    }
    Ok(())
}

/// A probability measure with finitely many atoms.
///
/// Atoms are pairwise distinct and kept in a canonical sorted order, so two
/// distributions with the same atoms and weights compare equal with `==`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution<A> {
    atoms: Vec<(A, f64)>,
}

impl<A: Atom> DiscreteDistribution<A> {
    /// Validates weights (finite, nonnegative, summing to 1 within
    /// [`WEIGHT_SUM_TOL`]) and atoms (pairwise distinct, common dimension).
    pub fn new(atoms: Vec<(A, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        if let Some((a, w)) = atoms.iter().find(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "weight {w} on atom {}",
                a.render()
            )));
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total:.17}"
            )));
        }
        check_compatible(&atoms)?;
        let n = atoms.len();
        let atoms = canonicalize(atoms);
        if atoms.len() != n {
            return Err(Error::InvalidDistribution("repeated atom".into()));
        }
        Ok(DiscreteDistribution { atoms })
    }

    /// Divides nonnegative weights by their (positive) total. Duplicate atoms
    /// are merged.
    pub fn normalized(atoms: Vec<(A, f64)>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if !(total.is_finite() && total > 0.0) || atoms.iter().any(|(_, w)| !(*w >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "cannot normalize weights with total {total}"
            )));
        }
        check_compatible(&atoms)?;
        let atoms = atoms.into_iter().map(|(a, w)| (a, w / total)).collect();
        Ok(DiscreteDistribution {
            atoms: canonicalize(atoms),
        })
    }

    /// Builds from entries whose mass is 1 by construction (images, mixtures).
    pub(crate) fn from_parts(atoms: Vec<(A, f64)>) -> Self {
        let atoms = canonicalize(atoms);
        debug_assert!((atoms.iter().map(|(_, w)| w).sum::<f64>() - 1.0).abs() < 1e-9);
        DiscreteDistribution { atoms }
    }

    pub fn dirac(a: A) -> Self {
        DiscreteDistribution {
            atoms: vec![(a, 1.0)],
        }
    }

    pub fn uniform(points: Vec<A>) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        let n = points.len();
        let atoms: Vec<_> = points.into_iter().map(|a| (a, w)).collect();
        if n == 0 {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        check_compatible(&atoms)?;
        let atoms = canonicalize(atoms);
        if atoms.len() != n {
            return Err(Error::InvalidDistribution("repeated atom".into()));
        }
        Ok(DiscreteDistribution { atoms })
    }

    /// Atoms in canonical order, including any with zero weight.
    pub fn atoms(&self) -> &[(A, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Atoms carrying positive weight.
    pub fn support(&self) -> impl Iterator<Item = &(A, f64)> {
        self.atoms.iter().filter(|(_, w)| *w > 0.0)
    }

    /// Weight of `a`, zero when `a` is not an atom.
    pub fn weight_of(&self, a: &A) -> f64 {
        find_index(&self.atoms, a).map_or(0.0, |i| self.atoms[i].1)
    }

    pub fn contains(&self, a: &A) -> bool {
        find_index(&self.atoms, a).is_some()
    }

    /// Whether atoms of `self` and `other` live in the same space.
    pub fn compatible_with(&self, other: &Self) -> bool {
        match (self.atoms.first(), other.atoms.first()) {
            (Some(a), Some(b)) => a.0.compatible(&b.0),
            _ => true,
        }
    }

    pub fn expect(&self, mut f: impl FnMut(&A) -> f64) -> f64 {
        self.atoms.iter().map(|(a, w)| w * f(a)).sum()
    }

    /// The convex combination `(1 - lambda)·self + lambda·other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Domain(format!("mixing weight {lambda} outside [0, 1]")));
        }
        if !self.compatible_with(other) {
            return Err(Error::Domain("mixing measures on different spaces".into()));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|(a, w)| (a.clone(), (1.0 - lambda) * w))
            .chain(other.atoms.iter().map(|(a, w)| (a.clone(), lambda * w)))
            .collect();
        Ok(Self::from_parts(atoms))
    }

    /// Total variation `sup_B |self(B) - other(B)| = ½ Σ |self(x) - other(x)|`.
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        if !self.compatible_with(other) {
            return Err(Error::Domain("total variation between different spaces".into()));
        }
        let mut sum = 0.0;
        for (a, w) in &self.atoms {
            sum += (w - other.weight_of(a)).abs();
        }
        for (a, w) in &other.atoms {
            if !self.contains(a) {
                sum += w;
            }
        }
        Ok(0.5 * sum)
    }

    /// Same positive-weight atoms with weights within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let close = |x: &Self, y: &Self| {
            x.support()
                .all(|(a, w)| (w - y.weight_of(a)).abs() <= tol && y.weight_of(a) > 0.0)
        };
        self.compatible_with(other) && close(self, other) && close(other, self)
    }

    /// Image of `self` under `f`.
    pub fn map_atoms<B: Atom>(&self, mut f: impl FnMut(&A) -> B) -> DiscreteDistribution<B> {
        DiscreteDistribution::from_parts(self.atoms.iter().map(|(a, w)| (f(a), *w)).collect())
    }
}

impl<S: Atom> DiscreteDistribution<Vec<S>> {
    /// The `t`-th coordinate marginal of a measure on tuples.
    pub fn marginal(&self, t: usize) -> Result<DiscreteDistribution<S>> {
        if self.atoms.iter().any(|(a, _)| a.len() <= t) {
            return Err(Error::Domain(format!("coordinate {t} out of range")));
        }
        Ok(self.map_atoms(|a| a[t].clone()))
    }
}

/// An empirical measure `(1/n) Σ δ_{x_i}` stored as exact integer counts.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure<A> {
    atoms: Vec<(A, u64)>,
    n: u64,
}

impl<A: Atom> EmpiricalMeasure<A> {
    pub fn from_samples<I: IntoIterator<Item = A>>(samples: I) -> Result<Self> {
        let atoms: Vec<(A, u64)> = samples.into_iter().map(|a| (a, 1)).collect();
        Self::from_counts(atoms)
    }

    /// Builds from `(atom, count)` pairs, merging repeated atoms.
    pub fn from_counts(atoms: Vec<(A, u64)>) -> Result<Self> {
        let n: u64 = atoms.iter().map(|(_, k)| k).sum();
        if n == 0 {
            return Err(Error::InvalidDistribution("empirical measure of zero samples".into()));
        }
        check_compatible(&atoms)?;
        let atoms = canonicalize(atoms)
            .into_iter()
            .filter(|(_, k)| *k > 0)
            .collect();
        Ok(EmpiricalMeasure { atoms, n })
    }

    pub fn counts(&self) -> &[(A, u64)] {
        &self.atoms
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn count_of(&self, a: &A) -> u64 {
        find_index(&self.atoms, a).map_or(0, |i| self.atoms[i].1)
    }

    /// Weights `k/n` as reals.
    pub fn to_distribution(&self) -> DiscreteDistribution<A> {
        DiscreteDistribution {
            atoms: self
                .atoms
                .iter()
                .map(|(a, k)| (a.clone(), k.probability(self.n)))
                .collect(),
        }
    }
}

impl<S: Atom> EmpiricalMeasure<Vec<S>> {
    pub fn marginal(&self, t: usize) -> Result<EmpiricalMeasure<S>> {
        if self.atoms.iter().any(|(a, _)| a.len() <= t) {
            return Err(Error::Domain(format!("coordinate {t} out of range")));
        }
        Self::marginal_counts(&self.atoms, t)
    }

    fn marginal_counts(atoms: &[(Vec<S>, u64)], t: usize) -> Result<EmpiricalMeasure<S>> {
        EmpiricalMeasure::from_counts(atoms.iter().map(|(a, k)| (a[t].clone(), *k)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_weights() {
        assert!(DiscreteDistribution::new(vec![(0usize, 0.5), (1, 0.4)]).is_err());
        assert!(DiscreteDistribution::new(vec![(0usize, 1.5), (1, -0.5)]).is_err());
        assert!(DiscreteDistribution::new(vec![(0usize, 0.5), (0, 0.5)]).is_err());
        assert!(DiscreteDistribution::new(vec![(0.0, 0.5), (1e-14, 0.5)]).is_err());
        assert!(DiscreteDistribution::new(vec![(vec![0.0], 0.5), (vec![0.0, 1.0], 0.5)]).is_err());
        assert!(DiscreteDistribution::<usize>::new(vec![]).is_err());
    }

    #[test]
    fn canonical_order_makes_equality_structural() {
        let a = DiscreteDistribution::new(vec![(2usize, 0.25), (0, 0.75)]).unwrap();
        let b = DiscreteDistribution::new(vec![(0usize, 0.75), (2, 0.25)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.weight_of(&1), 0.0);
        assert_eq!(a.weight_of(&2), 0.25);
    }

    #[test]
    fn real_atoms_merge_within_tolerance() {
        let d = DiscreteDistribution::normalized(vec![
            (vec![1.0, 2.0], 1.0),
            (vec![1.0 + 1e-14, 2.0], 1.0),
            (vec![1.0, 2.5], 2.0),
        ])
        .unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.weight_of(&vec![1.0, 2.0]), 0.5);
    }

    #[test]
    fn total_variation_on_differing_supports() {
        let a = DiscreteDistribution::new(vec![(0usize, 0.5), (1, 0.5)]).unwrap();
        let b = DiscreteDistribution::new(vec![(1usize, 0.5), (2, 0.5)]).unwrap();
        assert!((a.total_variation(&b).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(a.total_variation(&a).unwrap(), 0.0);
    }

    #[test]
    fn empirical_counts_are_exact() {
        let e = EmpiricalMeasure::from_samples(vec![vec![0usize, 1], vec![0, 0], vec![0, 1]]).unwrap();
        assert_eq!(e.n(), 3);
        assert_eq!(e.count_of(&vec![0, 1]), 2);
        let m = e.marginal(1).unwrap();
        assert_eq!(m.count_of(&1), 2);
        assert_eq!(e.to_distribution().weight_of(&vec![0, 0]), 1.0 / 3.0);
    }

    #[test]
    fn marginal_of_path_measure() {
        let d = DiscreteDistribution::new(vec![(vec![0usize, 1], 0.3), (vec![1, 1], 0.7)]).unwrap();
        let m = d.marginal(1).unwrap();
        assert_eq!(m.len(), 1);
        assert!((m.weight_of(&1) - 1.0).abs() < 1e-15);
        assert!(d.marginal(2).is_err());
    }
}
