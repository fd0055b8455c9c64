//! Reproducible noise.
//!
//! Particle `i` of a run with root seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`. The draws of a
//! particle therefore depend only on `(s, i)`: neither the particle count
//! nor the order in which particles are processed changes them.
//! Replication `r` of an experiment uses root seed [`replication_seed`]`(s, r)`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::measures::DiscreteDistribution;
use crate::measures::Atom;
use crate::{Error, Result};

/// The random stream of one particle.
pub fn particle_rng(root_seed: u64, particle: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(particle);
    rng
}

/// Root seed of replication `r`, taken from stream `u64::MAX` of the root.
pub fn replication_seed(root_seed: u64, replication: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(u64::MAX);
    rng.set_word_pos(u128::from(replication) * 2);
    rng.next_u64()
}

/// Draws i.i.d. noise paths `(y₀, …, y_T)`.
pub trait NoiseSampler<Y>: Sync {
    fn sample_path(&self, stages: usize, rng: &mut ChaCha8Rng) -> Vec<Y>;
}

/// Independent `N(0, 1)` coordinates.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardNormalNoise;

impl NoiseSampler<f64> for StandardNormalNoise {
    fn sample_path(&self, stages: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..=stages).map(|_| rng.sample(StandardNormal)).collect()
    }
}

/// Independent `N(0, I_dim)` vectors.
#[derive(Debug, Clone, Copy)]
pub struct GaussianVectorNoise {
    pub dim: usize,
}

impl NoiseSampler<Vec<f64>> for GaussianVectorNoise {
    fn sample_path(&self, stages: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        (0..=stages)
            .map(|_| (0..self.dim).map(|_| rng.sample(StandardNormal)).collect())
            .collect()
    }
}

/// Independent uniforms on `[0, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformNoise;

impl NoiseSampler<f64> for UniformNoise {
    fn sample_path(&self, stages: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..=stages).map(|_| rng.random::<f64>()).collect()
    }
}

/// Independent stages, stage `t` drawn from a finite distribution.
#[derive(Debug, Clone)]
pub struct ProductNoise<Y> {
    stages: Vec<DiscreteDistribution<Y>>,
}

impl<Y: Atom> ProductNoise<Y> {
    pub fn new(stages: Vec<DiscreteDistribution<Y>>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::Domain("product noise needs at least one stage".into()));
        }
        Ok(ProductNoise { stages })
    }

    /// The same law at every one of `stages + 1` stages.
    pub fn iid(law: DiscreteDistribution<Y>, stages: usize) -> Self {
        ProductNoise {
            stages: vec![law; stages + 1],
        }
    }

    /// The product measure on noise paths.
    pub fn law(&self) -> DiscreteDistribution<Vec<Y>> {
        let mut paths: Vec<(Vec<Y>, f64)> = vec![(Vec::new(), 1.0)];
        for stage in &self.stages {
            paths = paths
                .iter()
                .flat_map(|(p, w)| {
                    stage.atoms().iter().map(move |(y, v)| {
                        let mut q = p.clone();
                        q.push(y.clone());
                        (q, w * v)
                    })
                })
                .collect();
        }
        DiscreteDistribution::normalized(paths).expect("product of valid laws")
    }
}

impl<Y: Atom> NoiseSampler<Y> for ProductNoise<Y> {
    fn sample_path(&self, stages: usize, rng: &mut ChaCha8Rng) -> Vec<Y> {
        assert_eq!(stages + 1, self.stages.len(), "noise declared for a different horizon");
        self.stages
            .iter()
            .map(|law| {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let support: Vec<_> = law.support().collect();
                for (y, w) in &support {
                    acc += w;
                    if u < acc {
                        return y.clone();
                    }
                }
                support.last().expect("non-empty law").0.clone()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn particle_streams_are_independent_of_order() {
        let a: Vec<f64> = StandardNormalNoise.sample_path(3, &mut particle_rng(7, 2));
        let _ = StandardNormalNoise.sample_path(3, &mut particle_rng(7, 5));
        let b: Vec<f64> = StandardNormalNoise.sample_path(3, &mut particle_rng(7, 2));
        assert_eq!(a, b);
        let c: Vec<f64> = StandardNormalNoise.sample_path(3, &mut particle_rng(7, 3));
        assert_ne!(a, c);
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn replication_seeds_differ() {
        assert_ne!(replication_seed(1, 0), replication_seed(1, 1));
        assert_eq!(replication_seed(1, 4), replication_seed(1, 4));
    }

    #[test]
    fn product_noise_law_and_sampling() {
        let coin = DiscreteDistribution::new(vec![(0usize, 0.25), (1, 0.75)]).unwrap();
        let noise = ProductNoise::iid(coin, 1);
        let law = noise.law();
        assert_eq!(law.len(), 4);
        assert!((law.weight_of(&vec![1, 1]) - 0.5625).abs() < 1e-15);
        let mut rng = particle_rng(3, 0);
        let ones = (0..4000)
            .map(|_| noise.sample_path(1, &mut rng)[0])
            .filter(|y| *y == 1)
            .count();
        assert!((ones as f64 / 4000.0 - 0.75).abs() < 0.03);
    }
}
