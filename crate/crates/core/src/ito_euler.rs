//! Euler-Maruyama particle systems and their Gaussian path laws.
//!
//! On a grid `t_k = k·h`, `k = 0..K`, every particle starts at `x₀` and moves
//! by
//!
//! ```text
//! x_{k+1} = x_k + b̃(x_k, ν_k)·h + σ̃(x_k)·(√h·y_{k+1} + u_k·h)
//! ```
//!
//! where `ν_k` is the empirical state distribution at stage `k`, the `y` are
//! standard normal and `u` is an optional deterministic control (zero in the
//! uncontrolled system). The measure enters only through its mean.
//!
//! For linear specs, `b̃ = A x + B·mean(ν) + c` with constant `σ̃ = S`, all path
//! laws are Gaussian on the stacked values `(x₁, …, x_K)` and are computed
//! exactly by moment recursions. The rate function at a Gaussian law `θ` is
//! then available both as `R(θ ‖ Ψ(θ))`, with `Ψ(θ)` the law of the chain
//! whose measure argument is frozen at the means of `θ`, and as the energy
//! `½ Σ |u_k|² h` of the cheapest control steering the mean flow onto `θ`.

use nalgebra::{DMatrix, DVector};

use crate::measures::{gaussian_relative_entropy, DiscreteDistribution, EmpiricalMeasure, GaussianMeasure};
use crate::noise_systems::StagedSystemSpec;
use crate::sampling::{particle_rng, GaussianVectorNoise, NoiseSampler};
use crate::{Error, ExtReal, Result};

const COVARIANCE_MATCH_TOL: f64 = 1e-9;

/// The drift `b̃(x, ν)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Drift {
    /// `A x + B·mean(ν) + c`.
    Linear {
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DVector<f64>,
    },
    /// `−κ x + g·tanh(mean(ν) − x)`, coordinatewise.
    TanhAttraction { kappa: f64, gain: f64 },
}

/// The dispersion `σ̃(x)`, a `d × d₁` matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Dispersion {
    Constant(DMatrix<f64>),
    /// `scale·(1 + depth·sin(x₁))·I` (square, `d₁ = d`).
    Modulated { scale: f64, depth: f64 },
}

/// Drift, dispersion, initial point and horizon of an Itô system.
#[derive(Debug, Clone, PartialEq)]
pub struct ItoSpec {
    drift: Drift,
    dispersion: Dispersion,
    x0: DVector<f64>,
    horizon: f64,
    noise_dim: usize,
    growth: f64,
}

impl ItoSpec {
    pub fn new(drift: Drift, dispersion: Dispersion, x0: DVector<f64>, horizon: f64) -> Result<Self> {
        let d = x0.len();
        if d == 0 || !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("dimension {d} and horizon {horizon}")));
        }
        let all_finite = |m: &DMatrix<f64>| m.iter().all(|x| x.is_finite());
        let drift_growth = match &drift {
            Drift::Linear { a, b, c } => {
                if a.shape() != (d, d) || b.shape() != (d, d) || c.len() != d {
                    return Err(Error::Domain(format!("linear drift does not act on dimension {d}")));
                }
                if !all_finite(a) || !all_finite(b) || c.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Domain("non-finite drift coefficients".into()));
                }
                a.norm() + b.norm() + c.norm()
            }
            Drift::TanhAttraction { kappa, gain } => {
                if !(kappa.is_finite() && gain.is_finite()) {
                    return Err(Error::Domain("non-finite drift coefficients".into()));
                }
                kappa.abs() + gain.abs() * (d as f64).sqrt()
            }
        };
        let (noise_dim, sigma_growth) = match &dispersion {
            Dispersion::Constant(s) => {
                if s.nrows() != d || s.ncols() == 0 || !all_finite(s) {
                    return Err(Error::Domain(format!("dispersion must be {d} x d₁")));
                }
                (s.ncols(), s.norm())
            }
            Dispersion::Modulated { scale, depth } => {
                if !(scale.is_finite() && depth.is_finite()) {
                    return Err(Error::Domain("non-finite dispersion coefficients".into()));
                }
                (d, scale.abs() * (1.0 + depth.abs()) * (d as f64).sqrt())
            }
        };
        Ok(ItoSpec {
            drift,
            dispersion,
            x0,
            horizon,
            noise_dim,
            growth: drift_growth.max(sigma_growth),
        })
    }

    /// `b̃ = A x + B·mean(ν) + c`, `σ̃ = S`.
    pub fn linear(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DVector<f64>,
        s: DMatrix<f64>,
        x0: DVector<f64>,
        horizon: f64,
    ) -> Result<Self> {
        Self::new(Drift::Linear { a, b, c }, Dispersion::Constant(s), x0, horizon)
    }

    /// One-dimensional `b̃ = κ(mean(ν) − x)`, `σ̃ = σ`.
    pub fn mean_reverting(kappa: f64, sigma: f64, x0: f64, horizon: f64) -> Result<Self> {
        let one = |v: f64| DMatrix::from_element(1, 1, v);
        Self::linear(one(-kappa), one(kappa), DVector::zeros(1), one(sigma), DVector::from_element(1, x0), horizon)
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn x0(&self) -> &DVector<f64> {
        &self.x0
    }

    pub fn is_linear(&self) -> bool {
        matches!((&self.drift, &self.dispersion), (Drift::Linear { .. }, Dispersion::Constant(_)))
    }

    /// The constant `K` with `|σ̃| ≤ K` and `|b̃(x, ν)| ≤ K(1 + max(|x|, |mean ν|))`.
    pub fn growth_constant(&self) -> f64 {
        self.growth
    }

    pub fn drift(&self, x: &DVector<f64>, mean: &DVector<f64>) -> DVector<f64> {
        match &self.drift {
            Drift::Linear { a, b, c } => a * x + b * mean + c,
            Drift::TanhAttraction { kappa, gain } => {
                DVector::from_fn(x.len(), |i, _| -kappa * x[i] + gain * (mean[i] - x[i]).tanh())
            }
        }
    }

    pub fn dispersion(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.dispersion {
            Dispersion::Constant(s) => s.clone(),
            Dispersion::Modulated { scale, depth } => {
                DMatrix::identity(self.dim(), self.dim()) * (scale * (1.0 + depth * x[0].sin()))
            }
        }
    }

    fn linear_parts(&self) -> Result<(&DMatrix<f64>, &DMatrix<f64>, &DVector<f64>, &DMatrix<f64>)> {
        match (&self.drift, &self.dispersion) {
            (Drift::Linear { a, b, c }, Dispersion::Constant(s)) => Ok((a, b, c, s)),
            _ => Err(Error::Capacity(
                "exact Gaussian laws need a linear spec; use the particle approximation".into(),
            )),
        }
    }
}

/// A uniform time grid with `steps` intervals of length `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerGrid {
    step: f64,
    steps: usize,
}

impl EulerGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("{steps} steps over horizon {horizon}")));
        }
        Ok(EulerGrid {
            step: horizon / steps as f64,
            steps,
        })
    }

    pub fn for_spec(spec: &ItoSpec, steps: usize) -> Result<Self> {
        Self::new(spec.horizon, steps)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.step * self.steps as f64
    }

    fn check(&self, spec: &ItoSpec) -> Result<()> {
        if (self.horizon() - spec.horizon).abs() > 1e-12 * spec.horizon.max(1.0) {
            return Err(Error::Domain(format!(
                "grid covers {} but the spec horizon is {}",
                self.horizon(),
                spec.horizon
            )));
        }
        Ok(())
    }
}

/// Piecewise-constant control values `u₀, …, u_{K−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPath {
    values: Vec<DVector<f64>>,
}

impl ControlPath {
    pub fn new(values: Vec<DVector<f64>>) -> Result<Self> {
        let Some(first) = values.first() else {
            return Err(Error::Domain("a control needs at least one value".into()));
        };
        let d = first.len();
        if values.iter().any(|u| u.len() != d || u.iter().any(|x| !x.is_finite())) {
            return Err(Error::Domain("control values must be finite vectors of one dimension".into()));
        }
        Ok(ControlPath { values })
    }

    pub fn zero(steps: usize, dim: usize) -> Self {
        ControlPath {
            values: vec![DVector::zeros(dim); steps],
        }
    }

    pub fn constant(value: DVector<f64>, steps: usize) -> Result<Self> {
        Self::new(vec![value; steps])
    }

    pub fn values(&self) -> &[DVector<f64>] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    /// `½ Σ |u_k|² h`.
    pub fn energy(&self, step: f64) -> f64 {
        0.5 * self.values.iter().map(|u| u.norm_squared()).sum::<f64>() * step
    }
}

/// Mean of a state marginal.
pub fn marginal_mean(marginal: &DiscreteDistribution<Vec<f64>>) -> DVector<f64> {
    let d = marginal.atoms()[0].0.len();
    let mut m = DVector::zeros(d);
    for (x, w) in marginal.atoms() {
        for i in 0..d {
            m[i] += w * x[i];
        }
    }
    m
}

fn euler_update(
    spec: &ItoSpec,
    grid: &EulerGrid,
    x: &[f64],
    mean: &DVector<f64>,
    y: &[f64],
    u: Option<&DVector<f64>>,
) -> Vec<f64> {
    let h = grid.step;
    let xv = DVector::from_column_slice(x);
    let mut shock = DVector::from_column_slice(y) * h.sqrt();
    if let Some(u) = u {
        shock += u * h;
    }
    let next = &xv + spec.drift(&xv, mean) * h + spec.dispersion(&xv) * shock;
    next.iter().copied().collect()
}

/// The system as a staged system driven by `N(0, I_{d₁})` noise; `y₀` is
/// drawn but unused.
pub fn staged_spec(spec: &ItoSpec, grid: &EulerGrid) -> Result<StagedSystemSpec<Vec<f64>, Vec<f64>>> {
    grid.check(spec)?;
    let x0: Vec<f64> = spec.x0.iter().copied().collect();
    let (spec, grid) = (spec.clone(), *grid);
    StagedSystemSpec::new(
        grid.steps,
        move |_: &Vec<f64>| Ok(x0.clone()),
        move |t, x: &Vec<f64>, marginal: &DiscreteDistribution<Vec<f64>>, y: &Vec<f64>| {
            let next = euler_update(&spec, &grid, x, &marginal_mean(marginal), y, None);
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("non-finite state at stage {t}")));
            }
            Ok(next)
        },
    )
}

/// Trajectories of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerRun {
    /// `paths[i][k]` is particle `i` at time `t_k`.
    pub paths: Vec<Vec<Vec<f64>>>,
    pub empirical: EmpiricalMeasure<Vec<Vec<f64>>>,
}

impl EulerRun {
    /// Empirical distribution of the states at time `t_k`.
    pub fn marginal(&self, k: usize) -> Result<DiscreteDistribution<Vec<f64>>> {
        Ok(EmpiricalMeasure::from_samples(self.paths.iter().map(|p| p[k].clone()))?.to_distribution())
    }
}

fn simulate(
    spec: &ItoSpec,
    grid: &EulerGrid,
    n: usize,
    controls: Option<&[ControlPath]>,
    seed: u64,
) -> Result<EulerRun> {
    grid.check(spec)?;
    if n == 0 {
        return Err(Error::Domain("at least one particle is required".into()));
    }
    if let Some(c) = controls {
        if c.len() != n {
            return Err(Error::Domain(format!("{} controls for {n} particles", c.len())));
        }
        if c.iter().any(|u| u.values.len() != grid.steps || u.dim() != spec.noise_dim) {
            return Err(Error::Domain("controls must have one value per step in the noise dimension".into()));
        }
    }
    let sampler = GaussianVectorNoise { dim: spec.noise_dim };
    let noise: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| sampler.sample_path(grid.steps, &mut particle_rng(seed, i as u64)))
        .collect();
    let x0: Vec<f64> = spec.x0.iter().copied().collect();
    let mut paths: Vec<Vec<Vec<f64>>> = vec![vec![x0]; n];
    for t in 1..=grid.steps {
        let marginal = EmpiricalMeasure::from_samples(paths.iter().map(|p| p[t - 1].clone()))?.to_distribution();
        let mean = marginal_mean(&marginal);
        for (i, (path, y)) in paths.iter_mut().zip(&noise).enumerate() {
            let u = controls.map(|c| &c[i].values[t - 1]);
            let next = euler_update(spec, grid, &path[t - 1], &mean, &y[t], u);
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged { particle: i, stage: t });
            }
            path.push(next);
        }
    }
    Ok(EulerRun {
        empirical: EmpiricalMeasure::from_samples(paths.iter().cloned())?,
        paths,
    })
}

/// Simulates `n` interacting particles; particle `i` draws from
/// [`particle_rng`]`(seed, i)`.
pub fn euler_simulate(spec: &ItoSpec, grid: &EulerGrid, n: usize, seed: u64) -> Result<EulerRun> {
    simulate(spec, grid, n, None, seed)
}

/// As [`euler_simulate`] with control `controls[i]` acting on particle `i`.
pub fn euler_controlled_simulate(
    spec: &ItoSpec,
    grid: &EulerGrid,
    n: usize,
    controls: &[ControlPath],
    seed: u64,
) -> Result<EulerRun> {
    simulate(spec, grid, n, Some(controls), seed)
}

/// Largest observed `|σ̃|` and `|b̃| / (1 + max |x|)` along a run, next to the
/// declared growth constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthCheck {
    pub constant: f64,
    pub max_dispersion: f64,
    pub max_drift_ratio: f64,
}

impl GrowthCheck {
    pub fn holds(&self) -> bool {
        self.max_dispersion <= self.constant && self.max_drift_ratio <= self.constant
    }
}

pub fn check_growth(spec: &ItoSpec, run: &EulerRun) -> Result<GrowthCheck> {
    let steps = run.paths[0].len() - 1;
    let mut max_dispersion: f64 = 0.0;
    let mut max_drift_ratio: f64 = 0.0;
    for k in 0..steps {
        let mean = marginal_mean(&run.marginal(k)?);
        let sup = run
            .paths
            .iter()
            .map(|p| DVector::from_column_slice(&p[k]).norm())
            .fold(mean.norm(), f64::max);
        for p in &run.paths {
            let x = DVector::from_column_slice(&p[k]);
            max_dispersion = max_dispersion.max(spec.dispersion(&x).norm());
            max_drift_ratio = max_drift_ratio.max(spec.drift(&x, &mean).norm() / (1.0 + sup));
        }
    }
    Ok(GrowthCheck {
        constant: spec.growth,
        max_dispersion,
        max_drift_ratio,
    })
}

/// A Gaussian law of `(x₁, …, x_K)` stacked into one vector, started at `x₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPathLaw {
    law: GaussianMeasure,
    x0: DVector<f64>,
}

impl GaussianPathLaw {
    pub fn new(law: GaussianMeasure, x0: DVector<f64>) -> Result<Self> {
        let d = x0.len();
        if d == 0 || law.dim() == 0 || !law.dim().is_multiple_of(d) {
            return Err(Error::Domain(format!(
                "a law of dimension {} does not stack states of dimension {d}",
                law.dim()
            )));
        }
        Ok(GaussianPathLaw { law, x0 })
    }

    pub fn law(&self) -> &GaussianMeasure {
        &self.law
    }

    pub fn state_dim(&self) -> usize {
        self.x0.len()
    }

    pub fn steps(&self) -> usize {
        self.law.dim() / self.x0.len()
    }

    /// Means at `t₀, …, t_K`.
    pub fn mean_flow(&self) -> Vec<DVector<f64>> {
        let d = self.state_dim();
        std::iter::once(self.x0.clone())
            .chain((0..self.steps()).map(|k| self.law.mean().rows(k * d, d).into_owned()))
            .collect()
    }

    /// The law of `x_k`, `k ≥ 1`.
    pub fn marginal(&self, k: usize) -> Result<GaussianMeasure> {
        if k == 0 || k > self.steps() {
            return Err(Error::Domain(format!("no Gaussian marginal at step {k}")));
        }
        let d = self.state_dim();
        self.law.marginal(&((k - 1) * d..k * d).collect::<Vec<_>>())
    }

    /// The same covariance with the mean flow replaced by `means` (`t₁..t_K`).
    pub fn with_means(&self, means: &[DVector<f64>]) -> Result<Self> {
        let d = self.state_dim();
        if means.len() != self.steps() || means.iter().any(|m| m.len() != d) {
            return Err(Error::Domain("one mean per step is required".into()));
        }
        let stacked = DVector::from_iterator(self.law.dim(), means.iter().flat_map(|m| m.iter().copied()));
        Ok(GaussianPathLaw {
            law: GaussianMeasure::new(stacked, self.law.cov().clone())?,
            x0: self.x0.clone(),
        })
    }
}

/// The exact law of the linear chain with measure argument frozen at the
/// means `flow[k]` (`k = 0..K−1`; a trailing entry is ignored).
pub fn frozen_law(spec: &ItoSpec, grid: &EulerGrid, flow: &[DVector<f64>]) -> Result<GaussianPathLaw> {
    grid.check(spec)?;
    let (a, b, c, s) = spec.linear_parts()?;
    let (d, k_steps, h) = (spec.dim(), grid.steps, grid.step);
    if flow.len() < k_steps || flow.iter().any(|m| m.len() != d) {
        return Err(Error::Domain(format!("a flow of {k_steps} means of dimension {d} is required")));
    }
    let p = DMatrix::identity(d, d) + a * h;
    let noise_cov = s * s.transpose() * h;
    let mut means = Vec::with_capacity(k_steps);
    let mut covs = Vec::with_capacity(k_steps);
    let mut m = spec.x0.clone();
    let mut cov = DMatrix::zeros(d, d);
    for theta in flow.iter().take(k_steps) {
        m = &p * &m + (b * theta + c) * h;
        cov = &p * &cov * p.transpose() + &noise_cov;
        means.push(m.clone());
        covs.push(cov.clone());
    }
    let n = k_steps * d;
    let mut big = DMatrix::zeros(n, n);
    for j in 0..k_steps {
        let mut block = covs[j].clone();
        for k in j..k_steps {
            big.view_mut((k * d, j * d), (d, d)).copy_from(&block);
            if k > j {
                big.view_mut((j * d, k * d), (d, d)).copy_from(&block.transpose());
            }
            block = &p * block;
        }
    }
    let stacked = DVector::from_iterator(n, means.iter().flat_map(|m| m.iter().copied()));
    GaussianPathLaw::new(GaussianMeasure::new(stacked, big)?, spec.x0.clone())
}

/// Settings of [`mckean_vlasov_flow`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    /// Particles used to approximate the flow of nonlinear specs.
    pub particles: usize,
    pub seed: u64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            tol: 1e-10,
            max_iter: 10_000,
            damping: 0.5,
            particles: 2000,
            seed: 0,
        }
    }
}

/// The McKean-Vlasov mean flow and, for linear specs, its exact path law.
#[derive(Debug, Clone, PartialEq)]
pub struct McKeanVlasovFlow {
    /// Means at `t₀, …, t_K`.
    pub means: Vec<DVector<f64>>,
    pub path_law: Option<GaussianPathLaw>,
    pub iterations: usize,
    pub residual: f64,
}

/// Solves for the mean flow `θ` that reproduces itself under the frozen
/// dynamics, iterating `θ ← (1 − d)·F(θ) + d·θ`. Linear specs use the exact
/// mean recursion; others use independent particles with common noise.
pub fn mckean_vlasov_flow(spec: &ItoSpec, grid: &EulerGrid, options: FlowOptions) -> Result<McKeanVlasovFlow> {
    grid.check(spec)?;
    if !(options.tol > 0.0) || !(0.0..1.0).contains(&options.damping) || options.particles == 0 {
        return Err(Error::Domain("invalid flow options".into()));
    }
    let k_steps = grid.steps;
    let noise: Vec<Vec<Vec<f64>>> = if spec.is_linear() {
        Vec::new()
    } else {
        let sampler = GaussianVectorNoise { dim: spec.noise_dim };
        (0..options.particles)
            .map(|i| sampler.sample_path(k_steps, &mut particle_rng(options.seed, i as u64)))
            .collect()
    };
    let image = |theta: &[DVector<f64>]| -> Result<Vec<DVector<f64>>> {
        if spec.is_linear() {
            Ok(frozen_law(spec, grid, theta)?.mean_flow())
        } else {
            frozen_particle_means(spec, grid, theta, &noise)
        }
    };

    let mut theta = vec![spec.x0.clone(); k_steps + 1];
    let mut residual = f64::INFINITY;
    for iteration in 1..=options.max_iter {
        let next = image(&theta)?;
        residual = theta
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if residual < options.tol {
            let path_law = if spec.is_linear() {
                Some(frozen_law(spec, grid, &next)?)
            } else {
                None
            };
            return Ok(McKeanVlasovFlow {
                means: next,
                path_law,
                iterations: iteration,
                residual,
            });
        }
        theta = theta
            .iter()
            .zip(&next)
            .map(|(old, new)| new * (1.0 - options.damping) + old * options.damping)
            .collect();
    }
    Err(Error::Convergence {
        iterations: options.max_iter,
        residual,
    })
}

fn frozen_particle_means(
    spec: &ItoSpec,
    grid: &EulerGrid,
    theta: &[DVector<f64>],
    noise: &[Vec<Vec<f64>>],
) -> Result<Vec<DVector<f64>>> {
    let n = noise.len() as f64;
    let mut states: Vec<Vec<f64>> = vec![spec.x0.iter().copied().collect(); noise.len()];
    let mut means = vec![spec.x0.clone()];
    for t in 1..=grid.steps {
        let mut sum = DVector::zeros(spec.dim());
        for (i, (x, y)) in states.iter_mut().zip(noise).enumerate() {
            *x = euler_update(spec, grid, x, &theta[t - 1], &y[t], None);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged { particle: i, stage: t });
            }
            sum += DVector::from_column_slice(x);
        }
        means.push(sum / n);
    }
    Ok(means)
}

/// `I(θ) = R(θ ‖ Ψ(θ))` with `Ψ(θ)` frozen at the mean flow of `θ`.
pub fn ito_rate_re_form(theta: &GaussianPathLaw, spec: &ItoSpec, grid: &EulerGrid) -> Result<ExtReal> {
    check_path_law(theta, spec, grid)?;
    let frozen = frozen_law(spec, grid, &theta.mean_flow())?;
    gaussian_relative_entropy(theta.law(), frozen.law())
}

fn check_path_law(theta: &GaussianPathLaw, spec: &ItoSpec, grid: &EulerGrid) -> Result<()> {
    if theta.state_dim() != spec.dim() || theta.steps() != grid.steps {
        return Err(Error::Domain(format!(
            "path law of {} steps in dimension {} for a grid of {} steps in dimension {}",
            theta.steps(),
            theta.state_dim(),
            grid.steps,
            spec.dim()
        )));
    }
    Ok(())
}

/// Result of [`variational_upper_bound`].
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalBound {
    pub value: ExtReal,
    pub control: Option<ControlPath>,
    /// Why no deterministic control reaches the target, when none does.
    pub note: Option<String>,
}

impl VariationalBound {
    fn unreachable(note: String) -> Self {
        VariationalBound {
            value: ExtReal::Infinite,
            control: None,
            note: Some(note),
        }
    }
}

/// The least energy `½ Σ |u_k|² h` of a deterministic control whose
/// controlled McKean-Vlasov chain has law `θ`.
///
/// Deterministic controls only shift means, so `θ` must carry the
/// uncontrolled covariance. The means then require
/// `S u_k h = m_{k+1} − m_k − ((A + B) m_k + c) h`, solved in the
/// minimum-norm sense.
pub fn variational_upper_bound(theta: &GaussianPathLaw, spec: &ItoSpec, grid: &EulerGrid) -> Result<VariationalBound> {
    check_path_law(theta, spec, grid)?;
    let (a, b, c, s) = spec.linear_parts()?;
    let h = grid.step;
    let means = theta.mean_flow();
    let reference = frozen_law(spec, grid, &means)?;
    let scale = reference.law().cov().amax().max(1.0);
    let mismatch = (theta.law().cov() - reference.law().cov()).amax();
    if mismatch > COVARIANCE_MATCH_TOL * scale {
        return Ok(VariationalBound::unreachable(format!(
            "target covariance differs from the uncontrolled one by {mismatch:e}; deterministic controls only shift means"
        )));
    }
    let pinv = s
        .clone()
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::Domain(format!("dispersion pseudo-inverse: {e}")))?;
    let drift = a + b;
    let mut values = Vec::with_capacity(grid.steps);
    for k in 0..grid.steps {
        let target = (&means[k + 1] - &means[k] - (&drift * &means[k] + c) * h) / h;
        let u = &pinv * &target;
        let miss = (s * &u - &target).norm();
        if miss > 1e-9 * (1.0 + target.norm()) {
            return Ok(VariationalBound::unreachable(format!(
                "mean increment at step {k} lies outside the range of the dispersion (miss {miss:e})"
            )));
        }
        values.push(u);
    }
    let control = ControlPath::new(values)?;
    Ok(VariationalBound {
        value: ExtReal::Finite(control.energy(h)),
        control: Some(control),
        note: None,
    })
}

/// `R(γ ‖ γ₀)` on the grid, where `γ₀` is the law of Brownian motion at
/// `t₁, …, t_K` and `γ` its shift by `∫₀ᵗ u(s) ds`.
pub fn wiener_re_discretized(shift: &ControlPath, grid: &EulerGrid) -> Result<f64> {
    if shift.values.len() != grid.steps {
        return Err(Error::Domain(format!(
            "{} control values for {} steps",
            shift.values.len(),
            grid.steps
        )));
    }
    let (d, k_steps, h) = (shift.dim(), grid.steps, grid.step);
    let n = d * k_steps;
    let cov = DMatrix::from_fn(n, n, |i, j| {
        if i % d == j % d {
            h * ((i / d).min(j / d) + 1) as f64
        } else {
            0.0
        }
    });
    let mut mean = DVector::zeros(n);
    let mut acc = DVector::zeros(d);
    for (k, u) in shift.values.iter().enumerate() {
        acc += u * h;
        mean.rows_mut(k * d, d).copy_from(&acc);
    }
    let wiener = GaussianMeasure::new(DVector::zeros(n), cov.clone())?;
    let shifted = GaussianMeasure::new(mean, cov)?;
    gaussian_relative_entropy(&shifted, &wiener)?
        .finite()
        .ok_or_else(|| Error::Domain("shifted Wiener law is singular".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise_systems::simulate_particles;

    fn brownian(horizon: f64) -> ItoSpec {
        let one = |v: f64| DMatrix::from_element(1, 1, v);
        ItoSpec::linear(one(0.0), one(0.0), DVector::zeros(1), one(1.0), DVector::zeros(1), horizon).unwrap()
    }

    #[test]
    fn pure_noise_is_a_scaled_random_walk() {
        let spec = brownian(1.0);
        let grid = EulerGrid::new(1.0, 4).unwrap();
        let run = euler_simulate(&spec, &grid, 3, 2).unwrap();
        let y = GaussianVectorNoise { dim: 1 }.sample_path(4, &mut particle_rng(2, 1));
        let mut x = 0.0;
        for k in 1..=4 {
            x += 0.5 * y[k][0];
            assert!((run.paths[1][k][0] - x).abs() < 1e-15);
        }
    }

    #[test]
    fn deterministic_drift_gives_a_line() {
        let zero = DMatrix::zeros(1, 1);
        let spec = ItoSpec::linear(zero.clone(), zero.clone(), DVector::from_element(1, 2.0), zero, DVector::from_element(1, 1.0), 1.0).unwrap();
        let grid = EulerGrid::new(1.0, 8).unwrap();
        let run = euler_simulate(&spec, &grid, 4, 0).unwrap();
        for p in &run.paths {
            for (k, x) in p.iter().enumerate() {
                assert!((x[0] - (1.0 + 2.0 * k as f64 / 8.0)).abs() < 1e-14);
            }
        }
        let flow = mckean_vlasov_flow(&spec, &grid, FlowOptions::default()).unwrap();
        assert!((flow.means[8][0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_mean_follows_the_noise_average() {
        let kappa = 1.5;
        let spec = ItoSpec::mean_reverting(kappa, 0.7, 1.0, 1.0).unwrap();
        let grid = EulerGrid::new(1.0, 10).unwrap();
        let run = euler_simulate(&spec, &grid, 50, 4).unwrap();
        let noise: Vec<_> = (0..50u64)
            .map(|i| GaussianVectorNoise { dim: 1 }.sample_path(10, &mut particle_rng(4, i)))
            .collect();
        let mut mean = 1.0;
        for k in 1..=10 {
            mean += 0.7 * 0.1f64.sqrt() * noise.iter().map(|y| y[k][0]).sum::<f64>() / 50.0;
            let observed = run.paths.iter().map(|p| p[k][0]).sum::<f64>() / 50.0;
            assert!((observed - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn staged_route_is_bit_identical() {
        let spec = ItoSpec::new(
            Drift::TanhAttraction { kappa: 0.5, gain: 1.0 },
            Dispersion::Modulated { scale: 0.8, depth: 0.3 },
            DVector::from_vec(vec![0.5, -0.5]),
            1.0,
        )
        .unwrap();
        let grid = EulerGrid::new(1.0, 6).unwrap();
        let run = euler_simulate(&spec, &grid, 40, 8).unwrap();
        let staged = simulate_particles(&GaussianVectorNoise { dim: 2 }, &staged_spec(&spec, &grid).unwrap(), 40, 8).unwrap();
        assert_eq!(run.paths, staged.paths);
        let growth = check_growth(&spec, &run).unwrap();
        assert!(growth.holds(), "{growth:?}");
    }

    #[test]
    fn zero_controls_change_nothing() {
        let spec = ItoSpec::mean_reverting(1.0, 1.0, 0.0, 2.0).unwrap();
        let grid = EulerGrid::new(2.0, 16).unwrap();
        let zero = vec![ControlPath::zero(16, 1); 10];
        assert_eq!(
            euler_controlled_simulate(&spec, &grid, 10, &zero, 3).unwrap(),
            euler_simulate(&spec, &grid, 10, 3).unwrap()
        );
        assert_eq!(zero[0].energy(grid.step()), 0.0);
    }

    #[test]
    fn constant_control_without_noise_is_a_line() {
        let zero = DMatrix::zeros(1, 1);
        let one = DMatrix::from_element(1, 1, 1.0);
        let spec = ItoSpec::linear(zero.clone(), zero, DVector::zeros(1), one, DVector::zeros(1), 1.0).unwrap();
        let grid = EulerGrid::new(1.0, 4).unwrap();
        let u = ControlPath::constant(DVector::from_element(1, 3.0), 4).unwrap();
        let mv = mckean_vlasov_flow(&spec, &grid, FlowOptions::default()).unwrap();
        let target = mv.path_law.unwrap().with_means(&(1..=4).map(|k| DVector::from_element(1, 0.75 * k as f64)).collect::<Vec<_>>()).unwrap();
        let bound = variational_upper_bound(&target, &spec, &grid).unwrap();
        for v in bound.control.unwrap().values() {
            assert!((v[0] - 3.0).abs() < 1e-12);
        }
        assert!((bound.value.finite().unwrap() - u.energy(0.25)).abs() < 1e-12);
    }

    #[test]
    fn random_walk_law() {
        let spec = brownian(1.0);
        let grid = EulerGrid::new(1.0, 5).unwrap();
        let flow = mckean_vlasov_flow(&spec, &grid, FlowOptions::default()).unwrap();
        let law = flow.path_law.unwrap();
        for j in 0..5 {
            assert_eq!(law.law().mean()[j], 0.0);
            for k in 0..5 {
                assert!((law.law().cov()[(j, k)] - 0.2 * (j.min(k) + 1) as f64).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mean_reversion_keeps_the_mean() {
        let spec = ItoSpec::mean_reverting(2.0, 0.5, 1.0, 1.0).unwrap();
        let grid = EulerGrid::new(1.0, 16).unwrap();
        let flow = mckean_vlasov_flow(&spec, &grid, FlowOptions::default()).unwrap();
        assert!(flow.means.iter().all(|m| (m[0] - 1.0).abs() < 1e-12));
        let law = flow.path_law.unwrap();
        assert_eq!(ito_rate_re_form(&law, &spec, &grid).unwrap(), ExtReal::ZERO);
        let bound = variational_upper_bound(&law, &spec, &grid).unwrap();
        assert!(bound.value.finite().unwrap() < 1e-20);
    }

    #[test]
    fn shifted_wiener_rate_and_scaling() {
        let spec = brownian(1.0);
        let grid = EulerGrid::new(1.0, 8).unwrap();
        let base = mckean_vlasov_flow(&spec, &grid, FlowOptions::default()).unwrap().path_law.unwrap();
        let shifted = |c: f64| {
            base.with_means(&(1..=8).map(|k| DVector::from_element(1, c * k as f64 / 8.0)).collect::<Vec<_>>()).unwrap()
        };
        let r1 = ito_rate_re_form(&shifted(1.5), &spec, &grid).unwrap().finite().unwrap();
        let r2 = ito_rate_re_form(&shifted(3.0), &spec, &grid).unwrap().finite().unwrap();
        assert!((r1 - 1.125).abs() < 1e-12);
        assert!((r2 - 4.0 * r1).abs() < 1e-12);
    }

    #[test]
    fn inflated_covariance_is_unreachable() {
        let spec = brownian(1.0);
        let grid = EulerGrid::new(1.0, 4).unwrap();
        let base = mckean_vlasov_flow(&spec, &grid, FlowOptions::default()).unwrap().path_law.unwrap();
        let wide = GaussianPathLaw::new(
            GaussianMeasure::new(base.law().mean().clone(), base.law().cov() * 2.0).unwrap(),
            spec.x0().clone(),
        )
        .unwrap();
        let bound = variational_upper_bound(&wide, &spec, &grid).unwrap();
        assert_eq!(bound.value, ExtReal::Infinite);
        assert!(bound.note.is_some());
        assert!(ito_rate_re_form(&wide, &spec, &grid).unwrap().finite().unwrap() > 0.0);
    }

    #[test]
    fn wiener_telescope() {
        let grid = EulerGrid::new(1.0, 10).unwrap();
        assert_eq!(wiener_re_discretized(&ControlPath::zero(10, 1), &grid).unwrap(), 0.0);
        let two = ControlPath::constant(DVector::from_element(1, 2.0), 10).unwrap();
        assert!((wiener_re_discretized(&two, &grid).unwrap() - 2.0).abs() < 1e-12);
        let coarse = ControlPath::new((0..4).map(|k| DVector::from_vec(vec![k as f64, 1.0 - k as f64])).collect()).unwrap();
        let fine = ControlPath::new((0..8).map(|k| coarse.values()[k / 2].clone()).collect()).unwrap();
        let a = wiener_re_discretized(&coarse, &EulerGrid::new(2.0, 4).unwrap()).unwrap();
        let b = wiener_re_discretized(&fine, &EulerGrid::new(2.0, 8).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!((a - coarse.energy(0.5)).abs() < 1e-12);
    }

    #[test]
    fn nonlinear_specs_have_no_exact_law() {
        let spec = ItoSpec::new(
            Drift::TanhAttraction { kappa: 0.5, gain: 1.0 },
            Dispersion::Constant(DMatrix::from_element(1, 1, 1.0)),
            DVector::from_element(1, 1.0),
            1.0,
        )
        .unwrap();
        let grid = EulerGrid::new(1.0, 4).unwrap();
        assert!(matches!(frozen_law(&spec, &grid, &vec![DVector::zeros(1); 4]), Err(Error::Capacity(_))));
        let flow = mckean_vlasov_flow(&spec, &grid, FlowOptions { particles: 500, ..FlowOptions::default() }).unwrap();
        assert!(flow.path_law.is_none());
        assert!(flow.means[4][0] < 1.0);
    }

    #[test]
    fn exploding_drift_is_reported() {
        let huge = DMatrix::from_element(1, 1, 1e300);
        let spec = ItoSpec::linear(huge.clone(), huge, DVector::zeros(1), DMatrix::from_element(1, 1, 1.0), DVector::from_element(1, 1.0), 1.0).unwrap();
        let grid = EulerGrid::new(1.0, 4).unwrap();
        assert!(matches!(euler_simulate(&spec, &grid, 3, 0), Err(Error::Diverged { .. })));
    }
}
