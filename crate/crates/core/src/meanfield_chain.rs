//! Finite-state mean-field Markov chains.
//!
//! States are `0..M`. A particle starts from `q` and moves from stage `t` to
//! `t + 1` with the transition matrix `A(t, p)`, where `p` is the empirical
//! state distribution of all particles at stage `t`. With uniform noise the
//! move is an inverse-CDF lookup on the half-open intervals
//! `(Σ_{k<j} a_ik, Σ_{k≤j} a_ik]`.
//!
//! By exchangeability every particle configuration with the same path type
//! has the same probability, so the probability of a type is a multinomial
//! coefficient times a product of frozen-chain path probabilities evaluated
//! at the type's own marginals. This gives the exact identity
//!
//! ```text
//! −(1/N) log P(type ν) = R(ν ‖ Ψ(ν)) − H(ν) + (1/N) log multinomial(N; ν)
//! ```
//!
//! whose right-hand correction is bounded by `|S^{T+1}| · log(N + 1)/N`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::combinatorics::{compositions, log_factorials, log_multinomial};
use crate::measures::{relative_entropy, DiscreteDistribution, EmpiricalMeasure};
use crate::noise_systems::{PathMeasure, StagedSystemSpec};
use crate::sampling::{particle_rng, NoiseSampler, UniformNoise};
use crate::{Error, ExtReal, Result};

/// Row sums of every transition matrix must be 1 within this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Largest particle count accepted by exact type computations.
pub const MAX_TYPE_PARTICLES: u64 = 200;
/// Largest path space `M^{T+1}` accepted by exact type computations.
pub const MAX_PATH_SPACE: usize = 64;
/// Largest number of types enumerated at once.
pub const MAX_TYPES: u64 = 5_000_000;

/// The exact path type of a run: integer counts of each path over `N`.
pub type PathType = EmpiricalMeasure<Vec<usize>>;

type CustomFamily = dyn Fn(usize, &[f64]) -> DMatrix<f64> + Send + Sync;

/// The map `(t, p) ↦ A(t, p)`.
#[derive(Clone)]
pub enum TransitionFamily {
    /// One matrix per stage; a single matrix is used at every stage.
    Constant(Vec<DMatrix<f64>>),
    /// `A(p) = base + Σ_k p_k · slopes[k]`, the same at every stage.
    Affine {
        base: DMatrix<f64>,
        slopes: Vec<DMatrix<f64>>,
    },
    Custom(Arc<CustomFamily>),
}

impl fmt::Debug for TransitionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionFamily::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            TransitionFamily::Affine { base, slopes } => f
                .debug_struct("Affine")
                .field("base", base)
                .field("slopes", slopes)
                .finish(),
            TransitionFamily::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl TransitionFamily {
    /// Two states, state 1 absorbing; from state 0 the chain moves to state 1
    /// with probability `base + gain · p₁`.
    pub fn herding(base: f64, gain: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&base) || !(0.0..=1.0).contains(&(base + gain)) {
            return Err(Error::Domain(format!(
                "herding rates {base} and {} must lie in [0, 1]",
                base + gain
            )));
        }
        Ok(TransitionFamily::Affine {
            base: DMatrix::from_row_slice(2, 2, &[1.0 - base, base, 0.0, 1.0]),
            slopes: vec![
                DMatrix::zeros(2, 2),
                DMatrix::from_row_slice(2, 2, &[-gain, gain, 0.0, 0.0]),
            ],
        })
    }

    /// Two states, symmetric: switch with probability `base + gain · p_other`
    /// where `p_other` is the share of particles in the other state.
    pub fn voter(base: f64, gain: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&base) || !(0.0..=1.0).contains(&(base + gain)) {
            return Err(Error::Domain(format!(
                "voter rates {base} and {} must lie in [0, 1]",
                base + gain
            )));
        }
        Ok(TransitionFamily::Affine {
            base: DMatrix::from_row_slice(2, 2, &[1.0 - base, base, base, 1.0 - base]),
            slopes: vec![
                DMatrix::from_row_slice(2, 2, &[0.0, 0.0, gain, -gain]),
                DMatrix::from_row_slice(2, 2, &[-gain, gain, 0.0, 0.0]),
            ],
        })
    }

    fn evaluate(&self, t: usize, p: &[f64]) -> DMatrix<f64> {
        match self {
            TransitionFamily::Constant(ms) => ms[t.min(ms.len() - 1)].clone(),
            TransitionFamily::Affine { base, slopes } => {
                let mut a = base.clone();
                for (pk, s) in p.iter().zip(slopes) {
                    a += s * *pk;
                }
                a
            }
            TransitionFamily::Custom(f) => f(t, p),
        }
    }

    /// Matrices whose convex hull contains every `A(t, ·)`.
    fn vertices(&self, states: usize) -> Option<Vec<DMatrix<f64>>> {
        match self {
            TransitionFamily::Constant(ms) => Some(ms.clone()),
            TransitionFamily::Affine { base, slopes } => Some(
                (0..states)
                    .map(|k| base + slopes.get(k).cloned().unwrap_or_else(|| DMatrix::zeros(states, states)))
                    .collect(),
            ),
            TransitionFamily::Custom(_) => None,
        }
    }
}

fn check_stochastic(a: &DMatrix<f64>, states: usize, what: &str) -> Result<()> {
    if a.nrows() != states || a.ncols() != states {
        return Err(Error::InvalidDistribution(format!(
            "{what} is {}x{}, expected {states}x{states}",
            a.nrows(),
            a.ncols()
        )));
    }
    for (i, row) in a.row_iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if row.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "row {i} of {what} is not a probability vector (sum {sum})"
            )));
        }
    }
    Ok(())
}

/// Initial law, transition family and horizon of a chain.
#[derive(Debug, Clone)]
pub struct MeanFieldChainSpec {
    q: Vec<f64>,
    family: TransitionFamily,
    horizon: usize,
    possible: Option<Vec<Vec<bool>>>,
}

impl MeanFieldChainSpec {
    /// Constant and affine families are checked on every vertex of the
    /// simplex, which covers every `p`; custom families are checked at each
    /// evaluation.
    pub fn new(q: Vec<f64>, family: TransitionFamily, horizon: usize) -> Result<Self> {
        let m = q.len();
        if m == 0 {
            return Err(Error::InvalidDistribution("empty state space".into()));
        }
        let sum: f64 = q.iter().sum();
        if q.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("initial law sums to {sum}")));
        }
        if let TransitionFamily::Constant(ms) = &family {
            if ms.is_empty() {
                return Err(Error::InvalidDistribution("no transition matrix".into()));
            }
        }
        if let TransitionFamily::Affine { slopes, .. } = &family {
            if slopes.len() > m {
                return Err(Error::InvalidDistribution(format!(
                    "{} slope matrices for {m} states",
                    slopes.len()
                )));
            }
        }
        let possible = match family.vertices(m) {
            Some(vertices) => {
                for (k, v) in vertices.iter().enumerate() {
                    check_stochastic(v, m, &format!("transition vertex {k}"))?;
                }
                Some(
                    (0..m)
                        .map(|i| (0..m).map(|j| vertices.iter().any(|v| v[(i, j)] > 0.0)).collect())
                        .collect(),
                )
            }
            None => None,
        };
        Ok(MeanFieldChainSpec {
            q,
            family,
            horizon,
            possible,
        })
    }

    pub fn states(&self) -> usize {
        self.q.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn initial_law(&self) -> &[f64] {
        &self.q
    }

    /// `A(t, p)`, checked for row-stochasticity.
    pub fn transition(&self, t: usize, p: &[f64]) -> Result<DMatrix<f64>> {
        if p.len() != self.states() {
            return Err(Error::Domain(format!(
                "state distribution of length {} for {} states",
                p.len(),
                self.states()
            )));
        }
        let a = self.family.evaluate(t, p);
        check_stochastic(&a, self.states(), &format!("A({t}, ·)"))?;
        Ok(a)
    }

    /// Whether `i → j` can have positive probability for some `p`.
    pub fn transition_possible(&self, i: usize, j: usize) -> bool {
        self.possible.as_ref().is_none_or(|m| m[i][j])
    }

    /// Paths that start in the support of `q` and use only possible
    /// transitions.
    pub fn candidate_paths(&self) -> Vec<Vec<usize>> {
        let mut paths: Vec<Vec<usize>> = (0..self.states())
            .filter(|s| self.q[*s] > 0.0)
            .map(|s| vec![s])
            .collect();
        for _ in 0..self.horizon {
            paths = paths
                .into_iter()
                .flat_map(|p| {
                    let last = *p.last().expect("non-empty path");
                    (0..self.states())
                        .filter(move |j| self.transition_possible(last, *j))
                        .map(move |j| {
                            let mut next = p.clone();
                            next.push(j);
                            next
                        })
                })
                .collect();
        }
        paths
    }

    fn check_path(&self, path: &[usize]) -> Result<()> {
        if path.len() != self.horizon + 1 || path.iter().any(|s| *s >= self.states()) {
            return Err(Error::Domain(format!("{path:?} is not a path of this chain")));
        }
        Ok(())
    }
}

/// The state `j` whose interval `(Σ_{k<j} r_k, Σ_{k≤j} r_k]` contains `y`;
/// `y = 0` goes to the first state with positive probability.
fn inverse_cdf(row: &[f64], y: f64) -> usize {
    let mut cumulative = 0.0;
    let mut last = 0;
    for (j, r) in row.iter().enumerate() {
        if *r > 0.0 {
            cumulative += r;
            last = j;
            if y <= cumulative {
                return j;
            }
        }
    }
    last
}

/// The state drawn from `q` by the uniform `y`.
pub fn initial_state(spec: &MeanFieldChainSpec, y: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Domain(format!("uniform draw {y} outside [0, 1]")));
    }
    Ok(inverse_cdf(&spec.q, y))
}

/// One move at stage `t ∈ 1..=T` from state `x`, using row `x` of
/// `A(t − 1, p)`.
pub fn chain_step(spec: &MeanFieldChainSpec, t: usize, x: usize, p: &[f64], y: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Domain(format!("uniform draw {y} outside [0, 1]")));
    }
    if t == 0 || t > spec.horizon || x >= spec.states() {
        return Err(Error::Domain(format!("no move from state {x} at stage {t}")));
    }
    let a = spec.transition(t - 1, p)?;
    let row: Vec<f64> = a.row(x).iter().copied().collect();
    Ok(inverse_cdf(&row, y))
}

/// State distribution of a marginal as a probability vector.
pub fn state_vector(marginal: &DiscreteDistribution<usize>, states: usize) -> Vec<f64> {
    (0..states).map(|s| marginal.weight_of(&s)).collect()
}

fn count_vector(states: &[usize], m: usize) -> Vec<f64> {
    let mut counts = vec![0u64; m];
    for s in states {
        counts[*s] += 1;
    }
    let n = states.len() as u64;
    counts.into_iter().map(|k| if k == 0 { 0.0 } else { k as f64 / n as f64 }).collect()
}

/// The chain as a staged system driven by uniform noise.
pub fn staged_spec(spec: &MeanFieldChainSpec) -> Result<StagedSystemSpec<f64, usize>> {
    let initial = spec.clone();
    let stepper = spec.clone();
    StagedSystemSpec::new(
        spec.horizon,
        move |y: &f64| initial_state(&initial, *y),
        move |t, x: &usize, marginal: &DiscreteDistribution<usize>, y: &f64| {
            chain_step(&stepper, t, *x, &state_vector(marginal, stepper.states()), *y)
        },
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainRun {
    /// Path of each particle, in particle order.
    pub paths: Vec<Vec<usize>>,
    pub path_type: PathType,
}

/// Simulates `n` particles; particle `i` draws `T + 1` uniforms from
/// [`particle_rng`]`(seed, i)`.
pub fn chain_simulate(spec: &MeanFieldChainSpec, n: usize, seed: u64) -> Result<ChainRun> {
    if n == 0 {
        return Err(Error::Domain("at least one particle is required".into()));
    }
    let noise: Vec<Vec<f64>> = (0..n)
        .map(|i| UniformNoise.sample_path(spec.horizon, &mut particle_rng(seed, i as u64)))
        .collect();
    let mut paths: Vec<Vec<usize>> = noise
        .iter()
        .map(|y| Ok(vec![initial_state(spec, y[0])?]))
        .collect::<Result<_>>()?;
    for t in 1..=spec.horizon {
        let current: Vec<usize> = paths.iter().map(|p| p[t - 1]).collect();
        let p = count_vector(&current, spec.states());
        let a = spec.transition(t - 1, &p)?;
        for (path, y) in paths.iter_mut().zip(&noise) {
            let row: Vec<f64> = a.row(path[t - 1]).iter().copied().collect();
            path.push(inverse_cdf(&row, y[t]));
        }
    }
    Ok(ChainRun {
        path_type: EmpiricalMeasure::from_samples(paths.iter().cloned())?,
        paths,
    })
}

/// Marginal probability vectors of stages `0..T` of a path measure.
fn marginal_vectors(eta: &PathMeasure<usize>, spec: &MeanFieldChainSpec) -> Result<Vec<Vec<f64>>> {
    for (path, _) in eta.atoms() {
        spec.check_path(path)?;
    }
    (0..spec.horizon)
        .map(|t| Ok(state_vector(&eta.marginal(t)?, spec.states())))
        .collect()
}

/// Transition matrices `A(t, p_t)` for the given marginals.
fn frozen_matrices(spec: &MeanFieldChainSpec, marginals: &[Vec<f64>]) -> Result<Vec<DMatrix<f64>>> {
    marginals
        .iter()
        .enumerate()
        .map(|(t, p)| spec.transition(t, p))
        .collect()
}

fn path_log_probability(spec: &MeanFieldChainSpec, matrices: &[DMatrix<f64>], path: &[usize]) -> f64 {
    let mut lp = spec.q[path[0]].ln();
    for (t, a) in matrices.iter().enumerate() {
        lp += a[(path[t], path[t + 1])].ln();
    }
    lp
}

/// `Ψ(η)`: the time-inhomogeneous chain with matrices `A(t, η(t))`.
pub fn frozen_chain_law(eta: &PathMeasure<usize>, spec: &MeanFieldChainSpec) -> Result<PathMeasure<usize>> {
    let matrices = frozen_matrices(spec, &marginal_vectors(eta, spec)?)?;
    let mut paths: Vec<(Vec<usize>, f64)> = (0..spec.states())
        .filter(|s| spec.q[*s] > 0.0)
        .map(|s| (vec![s], spec.q[s]))
        .collect();
    for a in &matrices {
        paths = paths
            .into_iter()
            .flat_map(|(p, w)| {
                let last = *p.last().expect("non-empty path");
                (0..spec.states()).filter_map(move |j| {
                    let step = a[(last, j)];
                    (step > 0.0).then(|| {
                        let mut next = p.clone();
                        next.push(j);
                        (next, w * step)
                    })
                })
            })
            .collect();
    }
    DiscreteDistribution::new(paths)
}

/// `R(η ‖ Ψ(η))`.
pub fn chain_rate_function(eta: &PathMeasure<usize>, spec: &MeanFieldChainSpec) -> Result<ExtReal> {
    relative_entropy(eta, &frozen_chain_law(eta, spec)?)
}

fn check_type_capacity(spec: &MeanFieldChainSpec, n: u64) -> Result<()> {
    let space = (spec.states() as f64).powi(spec.horizon as i32 + 1);
    if n > MAX_TYPE_PARTICLES || space > MAX_PATH_SPACE as f64 {
        return Err(Error::Capacity(format!(
            "N = {n} with {space} paths exceeds N ≤ {MAX_TYPE_PARTICLES}, M^(T+1) ≤ {MAX_PATH_SPACE}"
        )));
    }
    Ok(())
}

/// `log P(type ν)`, `−∞` for impossible types.
pub fn exact_type_log_probability(nu: &PathType, spec: &MeanFieldChainSpec) -> Result<f64> {
    check_type_capacity(spec, nu.n())?;
    let eta = nu.to_distribution();
    let matrices = frozen_matrices(spec, &marginal_vectors(&eta, spec)?)?;
    let table = log_factorials(nu.n() as usize);
    let counts: Vec<u64> = nu.counts().iter().map(|(_, k)| *k).collect();
    let mut lp = log_multinomial(&counts, &table);
    for (path, k) in nu.counts() {
        let l = path_log_probability(spec, &matrices, path);
        if l == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        lp += *k as f64 * l;
    }
    Ok(lp)
}

/// `P(type ν)`; may underflow to zero, see [`exact_type_log_probability`].
pub fn exact_type_probability(nu: &PathType, spec: &MeanFieldChainSpec) -> Result<f64> {
    Ok(exact_type_log_probability(nu, spec)?.exp())
}

/// Every type of size `n` over the candidate paths.
pub fn enumerate_types(spec: &MeanFieldChainSpec, n: u64) -> Result<Vec<PathType>> {
    check_type_capacity(spec, n)?;
    let paths = spec.candidate_paths();
    compositions(n, paths.len(), MAX_TYPES)?
        .into_iter()
        .map(|c| {
            EmpiricalMeasure::from_counts(
                paths
                    .iter()
                    .zip(c)
                    .filter(|(_, k)| *k > 0)
                    .map(|(p, k)| (p.clone(), k))
                    .collect(),
            )
        })
        .collect()
}

/// One type of a decay check.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeRow {
    pub path_type: PathType,
    pub log_probability: f64,
    /// `−(1/N) log P`.
    pub measured: ExtReal,
    pub rate: ExtReal,
    /// `|measured − rate|`; zero when both are infinite.
    pub gap: ExtReal,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayCheck {
    pub n: u64,
    /// `M^{T+1} · log(N + 1)/N`.
    pub bound: f64,
    pub rows: Vec<TypeRow>,
}

impl DecayCheck {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn max_gap(&self) -> ExtReal {
        self.rows.iter().map(|r| r.gap).fold(ExtReal::ZERO, ExtReal::max)
    }
}

/// `M^{T+1} · log(N + 1)/N`.
pub fn decay_bound(spec: &MeanFieldChainSpec, n: u64) -> f64 {
    (spec.states() as f64).powi(spec.horizon as i32 + 1) * ((n + 1) as f64).ln() / n as f64
}

/// Compares `−(1/N) log P(ν)` with the rate `R(ν ‖ Ψ(ν))` for every type.
pub fn types_decay_bound_check(spec: &MeanFieldChainSpec, n: u64) -> Result<DecayCheck> {
    let bound = decay_bound(spec, n);
    let rows = enumerate_types(spec, n)?
        .into_iter()
        .map(|nu| type_row(nu, spec, bound))
        .collect::<Result<_>>()?;
    Ok(DecayCheck { n, bound, rows })
}

/// The decay-check row of a single type.
pub fn type_row(nu: PathType, spec: &MeanFieldChainSpec, bound: f64) -> Result<TypeRow> {
    let log_probability = exact_type_log_probability(&nu, spec)?;
    let measured = if log_probability == f64::NEG_INFINITY {
        ExtReal::Infinite
    } else {
        ExtReal::Finite(-log_probability / nu.n() as f64)
    };
    let rate = chain_rate_function(&nu.to_distribution(), spec)?;
    let gap = measured.gap(rate);
    Ok(TypeRow {
        pass: gap <= ExtReal::Finite(bound),
        path_type: nu,
        log_probability,
        measured,
        rate,
        gap,
    })
}
