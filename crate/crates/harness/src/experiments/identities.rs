//! Cross-module identities on seeded random instances.

use mfrate_core::ito_euler::{
    euler_controlled_simulate, euler_simulate, ito_rate_re_form, mckean_vlasov_flow, staged_spec as ito_staged,
    variational_upper_bound, wiener_re_discretized, ControlPath, Dispersion, Drift, EulerGrid, FlowOptions, ItoSpec,
};
use mfrate_core::measures::{
    brute_force_lift_infimum, optimal_lift, pushforward, relative_entropy, DiscreteDistribution,
    FiniteMap, GaussianMeasure, Lift,
};
use mfrate_core::meanfield_chain::{
    chain_rate_function, chain_simulate, enumerate_types, exact_type_log_probability, staged_spec as chain_staged,
    MeanFieldChainSpec, TransitionFamily,
};
use mfrate_core::noise_systems::{
    apply_psi_empirical, mckean_vlasov_law_empirical, rate_function_contraction_form, rate_function_re_form,
    simulate_particles, StagedSystemSpec,
};
use mfrate_core::sampling::{GaussianVectorNoise, ProductNoise, StandardNormalNoise, UniformNoise};
use mfrate_core::toy_model::{staged_spec as toy_staged, toy_rate_function, toy_simulate, DriftFunction, ToyModelSpec, ToyRate};
use mfrate_core::combinatorics::log_factorials;
use mfrate_core::ExtReal;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::experiments::sanov::type_log_probability;
use crate::report::{fmt_f64, Table, IDENTITY_HEADER};

/// Grid resolution of brute-force lift searches.
pub const LIFT_GRID: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityRow {
    pub name: String,
    pub instances: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityRow {
    pub fn new(name: &str, instances: usize, max_deviation: f64, tolerance: f64) -> Self {
        IdentityRow {
            name: name.into(),
            instances,
            max_deviation,
            tolerance,
            pass: max_deviation <= tolerance,
        }
    }
}

pub fn identity_table(rows: &[IdentityRow]) -> Table {
    let mut t = Table::new(&IDENTITY_HEADER);
    for r in rows {
        t.push(vec![
            r.name.clone(),
            r.instances.to_string(),
            fmt_f64(r.max_deviation),
            fmt_f64(r.tolerance),
            r.pass.to_string(),
        ]);
    }
    t
}

fn ext_deviation(a: ExtReal, b: ExtReal) -> f64 {
    a.gap(b).finite().unwrap_or(f64::INFINITY)
}

fn random_weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn random_law<A: mfrate_core::measures::Atom>(rng: &mut ChaCha8Rng, atoms: Vec<A>) -> Result<DiscreteDistribution<A>> {
    let w = random_weights(rng, atoms.len());
    Ok(DiscreteDistribution::normalized(atoms.into_iter().zip(w).collect())?)
}

/// A random pushforward instance: `γ₀` on `0..|Y|`, a surjection onto
/// `0..|X|`, and a target `η` on `0..|X|`.
pub struct ContractionInstance {
    pub gamma0: DiscreteDistribution<u32>,
    pub psi: FiniteMap<u32, u32>,
    pub eta: DiscreteDistribution<u32>,
}

pub fn contraction_instance(rng: &mut ChaCha8Rng) -> Result<ContractionInstance> {
    let ny = rng.random_range(2..=6u32);
    let nx = rng.random_range(1..=3u32.min(ny));
    let mut targets: Vec<u32> = (0..ny).map(|y| if y < nx { y } else { rng.random_range(0..nx) }).collect();
    targets.shuffle(rng);
    Ok(ContractionInstance {
        gamma0: random_law(rng, (0..ny).collect())?,
        psi: FiniteMap::new((0..ny).zip(targets).collect())?,
        eta: random_law(rng, (0..nx).collect())?,
    })
}

/// Deviations of the optimal lift and of the brute-force infimum from
/// `R(η ‖ ψ(γ₀))`. A positive `mutation` mixes that much uniform mass
/// into `ψ(γ₀)`.
pub fn contraction_identity(instances: usize, seed: u64, mutation: f64) -> Result<[IdentityRow; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut exact, mut brute) = (0.0f64, 0.0f64);
    for _ in 0..instances {
        let ContractionInstance { gamma0, psi, eta } = contraction_instance(&mut rng)?;
        let mut image = pushforward(&gamma0, &psi)?;
        if mutation > 0.0 {
            let support: Vec<(u32, f64)> = image.atoms().iter().map(|(x, _)| (*x, 1.0)).collect();
            image = image.mix(&DiscreteDistribution::normalized(support)?, mutation)?;
        }
        let target = relative_entropy(&eta, &image)?;
        let lifted = match optimal_lift(&eta, &gamma0, &psi)? {
            Lift::Attained { lift, .. } => relative_entropy(&lift, &gamma0)?,
            Lift::Infeasible => ExtReal::Infinite,
        };
        exact = exact.max(ext_deviation(target, lifted));
        let search = brute_force_lift_infimum(&eta, &gamma0, &psi, LIFT_GRID)?;
        brute = brute.max(ext_deviation(target, search.value));
    }
    Ok([
        IdentityRow::new("contraction-optimal-lift", instances, exact, 1e-12),
        IdentityRow::new("contraction-brute-force", instances, brute, 1e-4),
    ])
}

/// Both toy rate forms at the anchor `b ≡ 0`, `θ = N((1, 1), [[1, 1], [1, 2]])`.
pub fn toy_anchor() -> Result<ToyRate> {
    let theta = GaussianMeasure::from_slices(&[1.0, 1.0], &[1.0, 1.0, 1.0, 2.0])?;
    Ok(toy_rate_function(&theta, &ToyModelSpec::standard(DriftFunction::Constant { scale: 0.0 }))?)
}

pub fn toy_forms_identity(instances: usize, seed: u64) -> Result<IdentityRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = ["constant", "tanh", "cosine"];
    let mut worst = 0.0f64;
    for i in 0..instances {
        let b = DriftFunction::from_name(names[i % 3], rng.random_range(-2.0..2.0))?;
        let l = DMatrix::from_fn(2, 2, |r, c| if c <= r { rng.random_range(-1.5..1.5) } else { 0.0 });
        let cov = &l * l.transpose() + DMatrix::identity(2, 2) * 0.1;
        let mean = DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
        let rate = toy_rate_function(&GaussianMeasure::new(mean, cov)?, &ToyModelSpec::standard(b))?;
        worst = worst.max((rate.re_minus_f - rate.entropy_form).abs());
    }
    Ok(IdentityRow::new("toy-rate-forms", instances, worst, 1e-9))
}

/// `x₀ = y₀ mod 2`, then `x_t = x_{t−1} + ((y_t + s) mod 2)` where `s = 1`
/// iff at least half of the previous marginal sits on odd states.
pub fn parity_system(stages: usize) -> Result<StagedSystemSpec<i64, i64>> {
    Ok(StagedSystemSpec::new(
        stages,
        |y: &i64| Ok(y.rem_euclid(2)),
        |_, x: &i64, m: &DiscreteDistribution<i64>, y: &i64| {
            let odd = m.expect(|s| (s.rem_euclid(2)) as f64);
            let shift = i64::from(odd >= 0.5);
            Ok(x + (y + shift).rem_euclid(2))
        },
    )?)
}

/// A random noise law with `2..=4` atoms per stage over `stages + 1` stages.
pub fn random_noise(rng: &mut ChaCha8Rng, stages: usize) -> Result<ProductNoise<i64>> {
    let laws = (0..=stages)
        .map(|_| {
            let k = rng.random_range(2..=4i64);
            random_law(rng, (0..k).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProductNoise::new(laws)?)
}

/// A random law on the parity system's paths `x₀ ∈ {0, 1}`, increments in `{0, 1}`.
pub fn random_parity_paths(rng: &mut ChaCha8Rng, stages: usize) -> Result<DiscreteDistribution<Vec<i64>>> {
    let paths: Vec<Vec<i64>> = (0..1u32 << (stages + 1))
        .map(|bits| {
            let mut x = 0;
            (0..=stages)
                .map(|t| {
                    x += i64::from(bits >> t & 1);
                    x
                })
                .collect()
        })
        .collect();
    random_law(rng, paths)
}

/// `R(η ‖ Ψ_γ₀(η))` against the lift infimum over `μ*(γ) = η`.
pub fn staged_forms_identity(instances: usize, seed: u64) -> Result<IdentityRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let stages = rng.random_range(1..=2usize);
        let spec = parity_system(stages)?;
        let gamma0 = random_noise(&mut rng, stages)?.law();
        let eta = random_parity_paths(&mut rng, stages)?;
        let re = rate_function_re_form(&eta, &gamma0, &spec)?;
        let lift = rate_function_contraction_form(&eta, &gamma0, &spec, LIFT_GRID)?;
        worst = worst.max(ext_deviation(re, lift.value));
    }
    Ok(IdentityRow::new("rate-re-form-vs-contraction", instances, worst, 1e-4))
}

/// A random affine spec with full-row-rank dispersion.
pub fn random_linear_spec(rng: &mut ChaCha8Rng, d: usize) -> Result<ItoSpec> {
    let mut m = |scale: f64, r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.random_range(-scale..scale));
    let a = m(0.8, d, d);
    let b = m(0.8, d, d);
    let s = DMatrix::from_fn(d, d + 1, |i, j| f64::from(u8::from(i == j))) + m(0.3, d, d + 1);
    let c = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
    let x0 = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
    Ok(ItoSpec::linear(a, b, c, s, x0, rng.random_range(0.5..2.0))?)
}

/// Variational bound against the entropy form on mean-shifted
/// McKean-Vlasov laws, each spec at `K = 8` and `K = 32`.
pub fn ito_forms_identity(specs: usize, seed: u64) -> Result<IdentityRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..specs {
        let d = 1 + i % 2;
        let spec = random_linear_spec(&mut rng, d)?;
        let shift = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let wobble = rng.random_range(-1.0..1.0);
        for steps in [8, 32] {
            let grid = EulerGrid::for_spec(&spec, steps)?;
            let law = mckean_vlasov_flow(&spec, &grid, FlowOptions::default())?
                .path_law
                .expect("linear spec");
            let means: Vec<DVector<f64>> = law.mean_flow()[1..]
                .iter()
                .enumerate()
                .map(|(k, m)| {
                    let t = (k + 1) as f64 * grid.step();
                    m + &shift * (t + wobble * (3.0 * t).sin())
                })
                .collect();
            let target = law.with_means(&means)?;
            let re = ito_rate_re_form(&target, &spec, &grid)?;
            let var = variational_upper_bound(&target, &spec, &grid)?.value;
            let below = re.finite().zip(var.finite()).is_some_and(|(r, v)| v < r - 1e-9);
            worst = worst.max(if below { f64::INFINITY } else { ext_deviation(re, var) });
        }
    }
    Ok(IdentityRow::new("ito-variational-vs-entropy", 2 * specs, worst, 1e-6))
}

/// Random piecewise-constant controls.
pub fn random_control(rng: &mut ChaCha8Rng) -> Result<(ControlPath, EulerGrid)> {
    let steps = rng.random_range(1..=64);
    let d = rng.random_range(1..=3);
    let grid = EulerGrid::new(rng.random_range(0.1..3.0), steps)?;
    let u = ControlPath::new(
        (0..steps)
            .map(|_| DVector::from_fn(d, |_, _| rng.random_range(-3.0..3.0)))
            .collect(),
    )?;
    Ok((u, grid))
}

/// Relative deviation of the discretized Wiener entropy from the control energy.
pub fn wiener_identity(instances: usize, seed: u64) -> Result<IdentityRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let (u, grid) = random_control(&mut rng)?;
        let energy = u.energy(grid.step());
        let value = wiener_re_discretized(&u, &grid)?;
        worst = worst.max((value - energy).abs() / energy.max(1.0));
    }
    Ok(IdentityRow::new("wiener-entropy-telescope", instances, worst, 1e-12))
}

fn empirical_fixed_point<Y: mfrate_core::measures::Atom, X: mfrate_core::measures::Atom>(
    sampler: &impl mfrate_core::sampling::NoiseSampler<Y>,
    spec: &StagedSystemSpec<Y, X>,
    n: usize,
    seed: u64,
) -> Result<bool> {
    let run = simulate_particles(sampler, spec, n, seed)?;
    let law = mckean_vlasov_law_empirical(&run.noise_empirical, spec)?;
    let image = apply_psi_empirical(&run.noise_empirical, &run.empirical, spec)?;
    Ok(law == run.empirical && image == run.empirical)
}

/// Runs where `μ^N ≠ μ*(λ^N)` or `Ψ_{λ^N}(μ^N) ≠ μ^N` as exact counts.
pub fn empirical_fixed_point_identity(runs: usize, seed: u64) -> Result<IdentityRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0usize;
    for r in 0..runs {
        let n = rng.random_range(1..=60);
        let run_seed = rng.random();
        let ok = match r % 3 {
            0 => {
                let stages = rng.random_range(1..=3);
                empirical_fixed_point(&random_noise(&mut rng, stages)?, &parity_system(stages)?, n, run_seed)?
            }
            1 => {
                let q = random_weights(&mut rng, 2);
                let family = if rng.random_bool(0.5) {
                    TransitionFamily::herding(rng.random_range(0.0..0.5), rng.random_range(0.0..0.5))?
                } else {
                    TransitionFamily::voter(rng.random_range(0.0..0.5), rng.random_range(0.0..0.5))?
                };
                let spec = MeanFieldChainSpec::new(q, family, rng.random_range(1..=4))?;
                empirical_fixed_point(&UniformNoise, &chain_staged(&spec)?, n, run_seed)?
            }
            _ => {
                let b = DriftFunction::from_name(["tanh", "cosine"][r % 2], rng.random_range(-2.0..2.0))?;
                empirical_fixed_point(&StandardNormalNoise, &toy_staged(&ToyModelSpec::standard(b)), n, run_seed)?
            }
        };
        mismatches += usize::from(!ok);
    }
    Ok(IdentityRow::new("empirical-fixed-point-mismatches", runs, mismatches as f64, 0.0))
}

/// A chain with a constant transition matrix samples paths iid, so its type
/// probabilities and rates are the multinomial and Sanov ones on path space.
pub fn iid_baseline_identity(seed: u64, n: u64) -> Result<IdentityRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_weights(&mut rng, 2);
    let rows: Vec<Vec<f64>> = (0..2).map(|_| random_weights(&mut rng, 2)).collect();
    let a = DMatrix::from_fn(2, 2, |i, j| rows[i][j]);
    let spec = MeanFieldChainSpec::new(q.clone(), TransitionFamily::Constant(vec![a.clone()]), 2)?;
    let paths: Vec<Vec<usize>> = (0..8).map(|b| vec![b >> 2 & 1, b >> 1 & 1, b & 1]).collect();
    let probs: Vec<f64> = paths.iter().map(|p| q[p[0]] * a[(p[0], p[1])] * a[(p[1], p[2])]).collect();
    let path_law = DiscreteDistribution::new(paths.iter().cloned().zip(probs.iter().copied()).collect())?;
    let table = log_factorials(n as usize);
    let types = enumerate_types(&spec, n)?;
    let mut worst = 0.0f64;
    for nu in &types {
        let counts: Vec<u64> = paths.iter().map(|p| nu.count_of(p)).collect();
        let sanov = type_log_probability(&counts, &probs, &table);
        let chain = exact_type_log_probability(nu, &spec)?;
        worst = worst.max((sanov - chain).abs() / n as f64);
        let rate = chain_rate_function(&nu.to_distribution(), &spec)?;
        worst = worst.max(ext_deviation(rate, relative_entropy(&nu.to_distribution(), &path_law)?));
    }
    Ok(IdentityRow::new("iid-chain-vs-sanov", types.len(), worst, 1e-12))
}

/// Direct simulators against the staged-system route, and zero controls
/// against the uncontrolled Euler scheme; counts mismatching runs.
pub fn simulation_routes_identity(seed: u64) -> Result<IdentityRow> {
    let mut mismatches = 0usize;
    let toy = ToyModelSpec::standard(DriftFunction::from_name("tanh", 1.3)?);
    let staged = simulate_particles(&StandardNormalNoise, &toy_staged(&toy), 200, seed)?;
    let direct = toy_simulate(&toy, 200, seed)?;
    let toy_paths: Vec<Vec<f64>> = staged.paths.clone();
    mismatches += usize::from(direct.paths != toy_paths);

    let chain = MeanFieldChainSpec::new(vec![0.5, 0.5], TransitionFamily::voter(0.2, 0.3)?, 3)?;
    let staged = simulate_particles(&UniformNoise, &chain_staged(&chain)?, 200, seed)?;
    mismatches += usize::from(chain_simulate(&chain, 200, seed)?.paths != staged.paths);

    let ito = ItoSpec::new(
        Drift::TanhAttraction { kappa: 0.7, gain: 1.2 },
        Dispersion::Modulated { scale: 0.9, depth: 0.4 },
        DVector::from_vec(vec![0.3, -0.2]),
        1.0,
    )?;
    let grid = EulerGrid::for_spec(&ito, 8)?;
    let staged = simulate_particles(&GaussianVectorNoise { dim: 2 }, &ito_staged(&ito, &grid)?, 100, seed)?;
    let direct = euler_simulate(&ito, &grid, 100, seed)?;
    mismatches += usize::from(direct.paths != staged.paths);
    let zero = vec![ControlPath::zero(8, 2); 100];
    mismatches += usize::from(euler_controlled_simulate(&ito, &grid, 100, &zero, seed)? != direct);
    Ok(IdentityRow::new("simulation-route-mismatches", 4, mismatches as f64, 0.0))
}

/// Every identity with its default instance counts.
pub fn identity_suite(seed: u64, mutation: f64) -> Result<Vec<IdentityRow>> {
    let mut rows = Vec::new();
    rows.extend(contraction_identity(50, seed, mutation)?);
    rows.push(toy_forms_identity(100, seed)?);
    let anchor = toy_anchor()?;
    rows.push(IdentityRow::new(
        "toy-anchor",
        1,
        (anchor.re_minus_f - 0.5).abs().max((anchor.entropy_form - 0.5).abs()),
        1e-12,
    ));
    rows.push(staged_forms_identity(20, seed)?);
    rows.push(ito_forms_identity(10, seed)?);
    rows.push(wiener_identity(100, seed)?);
    rows.push(empirical_fixed_point_identity(1000, seed)?);
    rows.push(iid_baseline_identity(seed, 10)?);
    rows.push(simulation_routes_identity(seed)?);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mutation_breaks_the_contraction_identity() {
        let clean = contraction_identity(10, 3, 0.0).unwrap();
        assert!(clean[0].pass && clean[1].pass, "{clean:?}");
        let mutated = contraction_identity(10, 3, 1e-3).unwrap();
        assert!(!mutated[0].pass);
    }

    #[test]
    fn parity_paths_are_reachable() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let eta = random_parity_paths(&mut rng, 2).unwrap();
        assert_eq!(eta.len(), 8);
        assert!(eta.atoms().iter().all(|(p, _)| p.windows(2).all(|w| w[1] - w[0] <= 1)));
    }

    #[test]
    fn small_suites_pass() {
        assert!(staged_forms_identity(3, 1).unwrap().pass);
        assert!(empirical_fixed_point_identity(30, 1).unwrap().pass);
        assert!(iid_baseline_identity(1, 6).unwrap().pass);
        assert!(simulation_routes_identity(1).unwrap().pass);
    }
}
