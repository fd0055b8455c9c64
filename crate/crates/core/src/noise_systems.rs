//! Staged noise-driven particle systems.
//!
//! A system with horizon `T` is given by an initial map `φ₀` and a stage map
//! `φ`. Particle `i` with noise path `(y₀, …, y_T)` evolves as
//!
//! ```text
//! x₀ = φ₀(y₀),    x_{t+1} = φ(t+1, x_t, μ^N(t), y_{t+1})
//! ```
//!
//! where `μ^N(t)` is the empirical marginal of all particles at stage `t`.
//! Freezing the marginals at those of a path measure `μ` gives a map
//! `ψ(μ, ·)` from noise paths to state paths, and `Ψ_γ(μ) = γ∘ψ(μ, ·)⁻¹`.
//! The McKean-Vlasov law `μ*(γ)` is the unique fixed point of `Ψ_γ`; it is
//! computed stage by stage, each marginal feeding the next.
//!
//! For an empirical noise measure `λ^N` the same recursion reproduces the
//! particle system, so `μ^N = μ*(λ^N)` holds with integer counts.
//!
//! The rate function of `μ^N` is available in two forms: the relative-entropy
//! form [`rate_function_re_form`] and the lift infimum
//! [`rate_function_contraction_form`].

use std::fmt;
use std::sync::Arc;

use crate::measures::{
    brute_force_lift_infimum, canonicalize, relative_entropy, Atom, BruteForceLift,
    DiscreteDistribution, EmpiricalMeasure, Mass, MeasurableMap,
};
use crate::sampling::{particle_rng, NoiseSampler};
use crate::{Error, ExtReal, Result};

/// A measure on state paths `(x₀, …, x_T)`.
pub type PathMeasure<X> = DiscreteDistribution<Vec<X>>;
/// A measure on noise paths `(y₀, …, y_T)`.
pub type NoisePathMeasure<Y> = DiscreteDistribution<Vec<Y>>;

type InitialMap<Y, X> = dyn Fn(&Y) -> Result<X> + Send + Sync;
type StageMap<Y, X> = dyn Fn(usize, &X, &DiscreteDistribution<X>, &Y) -> Result<X> + Send + Sync;

/// Horizon, initial map and stage map of a staged system.
#[derive(Clone)]
pub struct StagedSystemSpec<Y, X> {
    stages: usize,
    phi0: Arc<InitialMap<Y, X>>,
    phi: Arc<StageMap<Y, X>>,
}

impl<Y, X> fmt::Debug for StagedSystemSpec<Y, X> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StagedSystemSpec")
            .field("stages", &self.stages)
            .finish_non_exhaustive()
    }
}

impl<Y: Atom, X: Atom> StagedSystemSpec<Y, X> {
    /// `phi(t, x, marginal, y)` is called with `t ∈ 1..=stages` and the
    /// marginal of stage `t − 1`.
    pub fn new(
        stages: usize,
        phi0: impl Fn(&Y) -> Result<X> + Send + Sync + 'static,
        phi: impl Fn(usize, &X, &DiscreteDistribution<X>, &Y) -> Result<X> + Send + Sync + 'static,
    ) -> Result<Self> {
        if stages == 0 {
            return Err(Error::Domain("a staged system needs at least one stage".into()));
        }
        Ok(StagedSystemSpec {
            stages,
            phi0: Arc::new(phi0),
            phi: Arc::new(phi),
        })
    }

    /// The horizon `T`; paths have `T + 1` points.
    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn initial(&self, y: &Y) -> Result<X> {
        (self.phi0)(y)
    }

    pub fn step(&self, t: usize, x: &X, marginal: &DiscreteDistribution<X>, y: &Y) -> Result<X> {
        (self.phi)(t, x, marginal, y)
    }

    fn check_noise_path(&self, y: &[Y]) -> Result<()> {
        if y.len() != self.stages + 1 {
            return Err(Error::Domain(format!(
                "noise path of length {} for a system with {} stages",
                y.len(),
                self.stages
            )));
        }
        Ok(())
    }

    /// `ψ(μ, y)` given the marginals `μ(0), …, μ(T−1)`.
    pub fn frozen_path(&self, marginals: &[DiscreteDistribution<X>], y: &[Y]) -> Result<Vec<X>> {
        self.check_noise_path(y)?;
        if marginals.len() < self.stages {
            return Err(Error::Domain(format!(
                "{} marginals for {} stages",
                marginals.len(),
                self.stages
            )));
        }
        let mut path = Vec::with_capacity(self.stages + 1);
        path.push(self.initial(&y[0])?);
        for t in 1..=self.stages {
            let next = self.step(t, &path[t - 1], &marginals[t - 1], &y[t])?;
            path.push(next);
        }
        Ok(path)
    }

    /// The map `ψ(μ, ·)` for a path measure `μ`.
    pub fn frozen_map(&self, mu: &PathMeasure<X>) -> Result<FrozenMap<'_, Y, X>> {
        Ok(FrozenMap {
            spec: self,
            marginals: path_marginals(mu, self.stages)?,
        })
    }

    /// As [`Self::frozen_map`], with marginals aggregated from exact counts.
    pub fn frozen_map_empirical(&self, mu: &EmpiricalMeasure<Vec<X>>) -> Result<FrozenMap<'_, Y, X>> {
        path_marginals(&mu.to_distribution(), self.stages)?;
        Ok(FrozenMap {
            spec: self,
            marginals: (0..=self.stages)
                .map(|t| Ok(mu.marginal(t)?.to_distribution()))
                .collect::<Result<_>>()?,
        })
    }
}

/// `ψ(μ, ·)` with the marginals of `μ` fixed.
pub struct FrozenMap<'a, Y, X> {
    spec: &'a StagedSystemSpec<Y, X>,
    marginals: Vec<DiscreteDistribution<X>>,
}

impl<Y: Atom, X: Atom> MeasurableMap<Vec<Y>, Vec<X>> for FrozenMap<'_, Y, X> {
    fn image(&self, y: &Vec<Y>) -> Result<Vec<X>> {
        self.spec.frozen_path(&self.marginals, y)
    }
}

/// Marginals `μ(0), …, μ(T)` of a path measure, checking path lengths.
pub fn path_marginals<X: Atom>(mu: &PathMeasure<X>, stages: usize) -> Result<Vec<DiscreteDistribution<X>>> {
    if let Some((bad, _)) = mu.atoms().iter().find(|(p, _)| p.len() != stages + 1) {
        return Err(Error::Domain(format!(
            "path {} does not have {} points",
            bad.render(),
            stages + 1
        )));
    }
    (0..=stages).map(|t| mu.marginal(t)).collect()
}

fn weighted_marginal<X: Atom, W: Mass>(
    states: impl Iterator<Item = (X, W)>,
    total: W,
) -> DiscreteDistribution<X> {
    let merged = canonicalize(states.collect());
    DiscreteDistribution::from_parts(
        merged
            .into_iter()
            .map(|(x, w)| (x, w.probability(total)))
            .collect(),
    )
}

/// Runs the recursion jointly for weighted noise paths; stage `t + 1` of every
/// path sees the weighted marginal of stage `t`. Returns the state paths (in
/// input order) and the marginals of stages `0..=T`.
fn joint_recursion<Y: Atom, X: Atom, W: Mass>(
    spec: &StagedSystemSpec<Y, X>,
    noise: &[(Vec<Y>, W)],
    total: W,
) -> Result<(Vec<Vec<X>>, Vec<DiscreteDistribution<X>>)> {
    for (y, _) in noise {
        spec.check_noise_path(y)?;
    }
    let mut paths: Vec<Vec<X>> = noise
        .iter()
        .map(|(y, _)| {
            let mut p = Vec::with_capacity(spec.stages + 1);
            p.push(spec.initial(&y[0])?);
            Ok(p)
        })
        .collect::<Result<_>>()?;
    let mut marginals = Vec::with_capacity(spec.stages + 1);
    for t in 1..=spec.stages {
        let marginal = weighted_marginal(
            paths.iter().zip(noise).map(|(p, (_, w))| (p[t - 1].clone(), *w)),
            total,
        );
        for (p, (y, _)) in paths.iter_mut().zip(noise) {
            let next = spec.step(t, &p[t - 1], &marginal, &y[t])?;
            p.push(next);
        }
        marginals.push(marginal);
    }
    marginals.push(weighted_marginal(
        paths.iter().zip(noise).map(|(p, (_, w))| (p[spec.stages].clone(), *w)),
        total,
    ));
    Ok((paths, marginals))
}

/// `Ψ_γ(μ) = γ∘ψ(μ, ·)⁻¹`.
pub fn apply_psi<Y: Atom, X: Atom>(
    gamma: &NoisePathMeasure<Y>,
    mu: &PathMeasure<X>,
    spec: &StagedSystemSpec<Y, X>,
) -> Result<PathMeasure<X>> {
    let psi = spec.frozen_map(mu)?;
    let atoms = gamma
        .atoms()
        .iter()
        .map(|(y, w)| Ok((psi.image(y)?, *w)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscreteDistribution::from_parts(atoms))
}

/// `Ψ_λ(μ)` for empirical measures, with exact integer counts.
pub fn apply_psi_empirical<Y: Atom, X: Atom>(
    lambda: &EmpiricalMeasure<Vec<Y>>,
    mu: &EmpiricalMeasure<Vec<X>>,
    spec: &StagedSystemSpec<Y, X>,
) -> Result<EmpiricalMeasure<Vec<X>>> {
    let psi = spec.frozen_map_empirical(mu)?;
    let atoms = lambda
        .counts()
        .iter()
        .map(|(y, k)| Ok((psi.image(y)?, *k)))
        .collect::<Result<Vec<_>>>()?;
    EmpiricalMeasure::from_counts(atoms)
}

/// The McKean-Vlasov law together with its stage marginals `α₀, …, α_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct McKeanVlasovLaw<X> {
    pub law: PathMeasure<X>,
    pub marginals: Vec<DiscreteDistribution<X>>,
}

/// `μ*(γ)` by the forward recursion `α_t(γ)`.
pub fn mckean_vlasov_law<Y: Atom, X: Atom>(
    gamma: &NoisePathMeasure<Y>,
    spec: &StagedSystemSpec<Y, X>,
) -> Result<McKeanVlasovLaw<X>> {
    let (paths, marginals) = joint_recursion(spec, gamma.atoms(), 1.0)?;
    let law = DiscreteDistribution::from_parts(
        paths
            .into_iter()
            .zip(gamma.atoms())
            .map(|(p, (_, w))| (p, *w))
            .collect(),
    );
    Ok(McKeanVlasovLaw { law, marginals })
}

/// `μ*(λ)` for an empirical noise measure, with exact integer counts.
pub fn mckean_vlasov_law_empirical<Y: Atom, X: Atom>(
    lambda: &EmpiricalMeasure<Vec<Y>>,
    spec: &StagedSystemSpec<Y, X>,
) -> Result<EmpiricalMeasure<Vec<X>>> {
    let (paths, _) = joint_recursion(spec, lambda.counts(), lambda.n())?;
    EmpiricalMeasure::from_counts(
        paths
            .into_iter()
            .zip(lambda.counts())
            .map(|(p, (_, k))| (p, *k))
            .collect(),
    )
}

/// Settings of [`solve_fixed_point_iterative`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Weight kept on the previous iterate.
    pub damping: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            tol: 1e-10,
            max_iter: 100,
            damping: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport<X> {
    pub solution: PathMeasure<X>,
    pub iterations: usize,
    /// Total variation between the last two iterates.
    pub residual: f64,
}

/// Solves `μ = Ψ_γ(μ)` by damped iteration
/// `μ_{k+1} = (1 − d)·Ψ_γ(μ_k) + d·μ_k`, started from `Ψ_γ` of the constant
/// paths `(φ₀(y₀), …, φ₀(y₀))`.
pub fn solve_fixed_point_iterative<Y: Atom, X: Atom>(
    gamma: &NoisePathMeasure<Y>,
    spec: &StagedSystemSpec<Y, X>,
    options: FixedPointOptions,
) -> Result<FixedPointReport<X>> {
    if !(options.tol > 0.0) || !(0.0..1.0).contains(&options.damping) {
        return Err(Error::Domain(format!(
            "tolerance {} and damping {} are not admissible",
            options.tol, options.damping
        )));
    }
    let seed = DiscreteDistribution::from_parts(
        gamma
            .atoms()
            .iter()
            .map(|(y, w)| {
                spec.check_noise_path(y)?;
                Ok((vec![spec.initial(&y[0])?; spec.stages + 1], *w))
            })
            .collect::<Result<Vec<_>>>()?,
    );
    let mut current = apply_psi(gamma, &seed, spec)?;
    let mut residual = f64::INFINITY;
    for iteration in 1..=options.max_iter {
        let image = apply_psi(gamma, &current, spec)?;
        residual = current.total_variation(&image)?;
        if residual < options.tol {
            return Ok(FixedPointReport {
                solution: image,
                iterations: iteration,
                residual,
            });
        }
        current = if options.damping > 0.0 {
            image.mix(&current, options.damping)?
        } else {
            image
        };
    }
    Err(Error::Convergence {
        iterations: options.max_iter,
        residual,
    })
}

/// One simulated particle system.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleRun<Y, X> {
    /// State path of each particle, in particle order.
    pub paths: Vec<Vec<X>>,
    /// Noise path of each particle.
    pub noise: Vec<Vec<Y>>,
    pub empirical: EmpiricalMeasure<Vec<X>>,
    pub noise_empirical: EmpiricalMeasure<Vec<Y>>,
}

/// Simulates `n` particles. Particle `i` draws its noise path from
/// [`particle_rng`]`(seed, i)`.
pub fn simulate_particles<Y: Atom, X: Atom>(
    sampler: &impl NoiseSampler<Y>,
    spec: &StagedSystemSpec<Y, X>,
    n: usize,
    seed: u64,
) -> Result<ParticleRun<Y, X>> {
    if n == 0 {
        return Err(Error::Domain("at least one particle is required".into()));
    }
    let noise: Vec<Vec<Y>> = (0..n)
        .map(|i| sampler.sample_path(spec.stages, &mut particle_rng(seed, i as u64)))
        .collect();
    let weighted: Vec<(Vec<Y>, u64)> = noise.iter().map(|y| (y.clone(), 1)).collect();
    let (paths, _) = joint_recursion(spec, &weighted, n as u64)?;
    Ok(ParticleRun {
        empirical: EmpiricalMeasure::from_samples(paths.iter().cloned())?,
        noise_empirical: EmpiricalMeasure::from_samples(noise.iter().cloned())?,
        paths,
        noise,
    })
}

/// `I(η) = R(η ‖ Ψ_γ₀(η))`.
pub fn rate_function_re_form<Y: Atom, X: Atom>(
    eta: &PathMeasure<X>,
    gamma0: &NoisePathMeasure<Y>,
    spec: &StagedSystemSpec<Y, X>,
) -> Result<ExtReal> {
    relative_entropy(eta, &apply_psi(gamma0, eta, spec)?)
}

/// `inf { R(γ ‖ γ₀) : μ*(γ) = η }`, by grid search over lifts through the
/// frozen map `ψ(η, ·)`; `μ*(γ) = η` holds exactly when `Ψ_γ(η) = η`.
pub fn rate_function_contraction_form<Y: Atom, X: Atom>(
    eta: &PathMeasure<X>,
    gamma0: &NoisePathMeasure<Y>,
    spec: &StagedSystemSpec<Y, X>,
    grid_resolution: usize,
) -> Result<BruteForceLift<Vec<Y>>> {
    let psi = spec.frozen_map(eta)?;
    brute_force_lift_infimum(eta, gamma0, &psi, grid_resolution)
}
