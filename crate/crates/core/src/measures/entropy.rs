use super::atom::Atom;
use super::discrete::{canonicalize, DiscreteDistribution};
use crate::{Error, ExtReal, Result};

fn check_same_space<A: Atom>(nu: &DiscreteDistribution<A>, mu: &DiscreteDistribution<A>) -> Result<()> {
    if nu.compatible_with(mu) {
        Ok(())
    } else {
        Err(Error::Domain("measures live on different atom universes".into()))
    }
}

/// `Σ p log(p/q)` with `0·log 0 = 0` and `p·log(p/0) = +∞`, clamped at 0.
fn entropy_sum(pairs: impl Iterator<Item = (f64, f64)>) -> ExtReal {
    let mut sum = 0.0;
    for (p, q) in pairs {
        if p > 0.0 {
            if q <= 0.0 {
                return ExtReal::Infinite;
            }
            sum += p * (p / q).ln();
        }
    }
    ExtReal::Finite(sum.max(0.0))
}

/// `R(ν ‖ μ) = Σ ν(x) log(ν(x)/μ(x))`, infinite unless `ν ≪ μ`.
///
/// Atoms missing from `μ` count as mass zero.
pub fn relative_entropy<A: Atom>(
    nu: &DiscreteDistribution<A>,
    mu: &DiscreteDistribution<A>,
) -> Result<ExtReal> {
    check_same_space(nu, mu)?;
    Ok(entropy_sum(nu.support().map(|(a, p)| (*p, mu.weight_of(a)))))
}

/// A finite partition of an atom universe into disjoint blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition<A> {
    blocks: Vec<Vec<A>>,
}

impl<A: Atom> Partition<A> {
    /// Rejects empty blocks and atoms listed twice.
    pub fn new(blocks: Vec<Vec<A>>) -> Result<Self> {
        if blocks.iter().any(Vec::is_empty) {
            return Err(Error::Domain("empty partition block".into()));
        }
        let all: Vec<(A, u64)> = blocks.iter().flatten().map(|a| (a.clone(), 1)).collect();
        let n = all.len();
        if canonicalize(all).len() != n {
            return Err(Error::Domain("partition blocks overlap".into()));
        }
        Ok(Partition { blocks })
    }

    /// One block per atom.
    pub fn singletons(atoms: impl IntoIterator<Item = A>) -> Result<Self> {
        Self::new(atoms.into_iter().map(|a| vec![a]).collect())
    }

    /// A single block holding every atom.
    pub fn trivial(atoms: impl IntoIterator<Item = A>) -> Result<Self> {
        Self::new(vec![atoms.into_iter().collect()])
    }

    pub fn blocks(&self) -> &[Vec<A>] {
        &self.blocks
    }

    fn block_of(&self, a: &A) -> Option<usize> {
        self.blocks
            .iter()
            .position(|b| b.iter().any(|x| x.same_atom(a)))
    }
}

/// `Σ_{B∈π} ν(B) log(ν(B)/μ(B))`, the relative entropy of the coarse-grained
/// measures. Never exceeds [`relative_entropy`]; equal for singletons.
///
/// The partition must cover every atom of `ν` and `μ`, and every listed atom
/// must be an atom of one of them.
pub fn partition_lower_bound<A: Atom>(
    nu: &DiscreteDistribution<A>,
    mu: &DiscreteDistribution<A>,
    partition: &Partition<A>,
) -> Result<ExtReal> {
    check_same_space(nu, mu)?;
    let k = partition.blocks.len();
    let mut nu_mass = vec![0.0; k];
    let mut mu_mass = vec![0.0; k];
    for (measure, mass) in [(nu, &mut nu_mass), (mu, &mut mu_mass)] {
        for (a, w) in measure.atoms() {
            let b = partition.block_of(a).ok_or_else(|| {
                Error::Domain(format!("atom {} not covered by the partition", a.render()))
            })?;
            mass[b] += w;
        }
    }
    if let Some(a) = partition
        .blocks
        .iter()
        .flatten()
        .find(|a| !nu.contains(a) && !mu.contains(a))
    {
        return Err(Error::Domain(format!(
            "partition atom {} is outside the universe",
            a.render()
        )));
    }
    Ok(entropy_sum(nu_mass.into_iter().zip(mu_mass)))
}

/// `∫g dν − log ∫e^g dμ`, a lower bound on `R(ν ‖ μ)` for every `g`.
pub fn donsker_varadhan_value<A: Atom>(
    nu: &DiscreteDistribution<A>,
    mu: &DiscreteDistribution<A>,
    g: impl Fn(&A) -> f64,
) -> Result<f64> {
    check_same_space(nu, mu)?;
    let mut max = f64::NEG_INFINITY;
    let mut values = Vec::new();
    for (a, w) in mu.support() {
        let v = g(a);
        if !v.is_finite() {
            return Err(Error::Domain(format!("g({}) = {v} on the support of μ", a.render())));
        }
        max = max.max(v);
        values.push((v, *w));
    }
    let log_mgf = max + values.iter().map(|(v, w)| w * (v - max).exp()).sum::<f64>().ln();
    let mut integral = 0.0;
    for (a, w) in nu.support() {
        let v = g(a);
        if !v.is_finite() {
            return Err(Error::Domain(format!("g({}) = {v} on the support of ν", a.render())));
        }
        integral += w * v;
    }
    Ok(integral - log_mgf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dd(w: &[f64]) -> DiscreteDistribution<usize> {
        DiscreteDistribution::new(w.iter().copied().enumerate().collect()).unwrap()
    }

    fn oracle_re(p: &[f64], q: &[f64]) -> f64 {
        p.iter()
            .zip(q)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, q)| p * p.ln() - p * q.ln())
            .sum()
    }

    #[test]
    fn dirac_against_uniform_pair() {
        let nu = DiscreteDistribution::dirac(0usize);
        let mu = dd(&[0.5, 0.5]);
        let r = relative_entropy(&nu, &mu).unwrap().finite().unwrap();
        assert!((r - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn missing_atom_gives_infinity() {
        let nu = DiscreteDistribution::dirac(2usize);
        assert_eq!(relative_entropy(&nu, &dd(&[0.5, 0.5])).unwrap(), ExtReal::Infinite);
    }

    #[test]
    fn mismatched_dimensions_are_a_domain_error() {
        let nu = DiscreteDistribution::dirac(vec![0.0]);
        let mu = DiscreteDistribution::dirac(vec![0.0, 1.0]);
        assert!(matches!(relative_entropy(&nu, &mu), Err(Error::Domain(_))));
    }

    #[test]
    fn merged_block_gives_zero_bound() {
        let nu = dd(&[0.3, 0.7]);
        let mu = dd(&[0.5, 0.5]);
        let trivial = Partition::trivial([0usize, 1]).unwrap();
        assert_eq!(partition_lower_bound(&nu, &mu, &trivial).unwrap(), ExtReal::ZERO);
        let full = relative_entropy(&nu, &mu).unwrap().finite().unwrap();
        let oracle = 0.3 * (0.6f64).ln() + 0.7 * (1.4f64).ln();
        assert!((full - oracle).abs() < 1e-15);
        assert!((full - 0.08228).abs() < 1e-5);
    }

    #[test]
    fn singletons_reproduce_the_entropy() {
        let nu = dd(&[0.2, 0.3, 0.5]);
        let mu = dd(&[0.4, 0.4, 0.2]);
        let p = Partition::singletons([0usize, 1, 2]).unwrap();
        assert_eq!(
            partition_lower_bound(&nu, &mu, &p).unwrap(),
            relative_entropy(&nu, &mu).unwrap()
        );
    }

    #[test]
    fn invalid_partitions_are_rejected() {
        assert!(Partition::new(vec![vec![0usize, 1], vec![1]]).is_err());
        let nu = dd(&[0.5, 0.5]);
        let missing = Partition::singletons([0usize]).unwrap();
        assert!(partition_lower_bound(&nu, &nu, &missing).is_err());
        let extra = Partition::singletons([0usize, 1, 7]).unwrap();
        assert!(partition_lower_bound(&nu, &nu, &extra).is_err());
    }

    #[test]
    fn donsker_varadhan_constant_and_optimal() {
        let nu = dd(&[0.3, 0.7]);
        let mu = dd(&[0.5, 0.5]);
        assert!(donsker_varadhan_value(&nu, &mu, |_| 3.7).unwrap().abs() < 1e-15);
        let g = |x: &usize| (nu.weight_of(x) / mu.weight_of(x)).ln();
        let v = donsker_varadhan_value(&nu, &mu, g).unwrap();
        assert!((v - 0.08228).abs() < 1e-5);
        assert!(donsker_varadhan_value(&nu, &mu, |_| f64::INFINITY).is_err());
    }

    fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, n).prop_filter_map("positive mass", |w| {
            let s: f64 = w.iter().sum();
            (s > 1e-3).then(|| w.iter().map(|x| x / s).collect())
        })
    }

    fn fix_sum(mut w: Vec<f64>) -> Vec<f64> {
        let s: f64 = w[..w.len() - 1].iter().sum();
        let last = w.len() - 1;
        w[last] = (1.0 - s).max(0.0);
        w
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn entropy_is_nonnegative_and_matches_oracle(p in weights(5), q in weights(5)) {
            let (p, q) = (fix_sum(p), fix_sum(q));
            let r = relative_entropy(&dd(&p), &dd(&q)).unwrap();
            if p.iter().zip(&q).any(|(a, b)| *a > 0.0 && *b == 0.0) {
                prop_assert_eq!(r, ExtReal::Infinite);
            } else {
                let v = r.finite().unwrap();
                prop_assert!(v >= 0.0);
                prop_assert!((v - oracle_re(&p, &q).max(0.0)).abs() < 1e-12);
            }
            prop_assert_eq!(relative_entropy(&dd(&p), &dd(&p)).unwrap(), ExtReal::ZERO);
        }

        #[test]
        fn refining_never_decreases_the_bound(
            p in weights(6), q in weights(6), labels in prop::collection::vec(0usize..3, 6), split in 0usize..6
        ) {
            let (p, q) = (fix_sum(p), fix_sum(q));
            let (nu, mu) = (dd(&p), dd(&q));
            let coarse_blocks: Vec<Vec<usize>> = (0..3)
                .map(|b| (0..6).filter(|i| labels[*i] == b).collect::<Vec<_>>())
                .filter(|b| !b.is_empty())
                .collect();
            let mut fine_blocks = Vec::new();
            for b in &coarse_blocks {
                let (l, r): (Vec<usize>, Vec<usize>) = b.iter().partition(|i| **i < split);
                fine_blocks.extend([l, r].into_iter().filter(|x| !x.is_empty()));
            }
            let coarse = partition_lower_bound(&nu, &mu, &Partition::new(coarse_blocks).unwrap()).unwrap();
            let fine = partition_lower_bound(&nu, &mu, &Partition::new(fine_blocks).unwrap()).unwrap();
            let full = relative_entropy(&nu, &mu).unwrap();
            prop_assert!(coarse <= ExtReal::Finite(fine.to_f64() + 1e-12) || fine.is_infinite());
            prop_assert!(fine <= ExtReal::Finite(full.to_f64() + 1e-12) || full.is_infinite());
        }

        #[test]
        fn donsker_varadhan_never_exceeds_entropy(
            p in weights(4), q in weights(4), g in prop::collection::vec(-5.0f64..5.0, 4)
        ) {
            let (nu, mu) = (dd(&fix_sum(p)), dd(&fix_sum(q)));
            let dv = donsker_varadhan_value(&nu, &mu, |x| g[*x]).unwrap();
            let r = relative_entropy(&nu, &mu).unwrap();
            prop_assert!(ExtReal::Finite(dv) <= ExtReal::Finite(r.to_f64() + 1e-12));
        }
    }
}
