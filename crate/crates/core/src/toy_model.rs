//! The two-step Gaussian model.
//!
//! With `(Y_i(0), Y_i(1))` i.i.d. standard normal pairs,
//!
//! ```text
//! X_i(0) = Y_i(0),    X_i(1) = X_i(0) + (1/N) Σ_j b(X_j(0)) + Y_i(1)
//! ```
//!
//! for a bounded continuous `b`. The empirical measures of `(X_i(0), X_i(1))`
//! satisfy a large deviation principle with rate function
//!
//! ```text
//! I(θ) = R(θ ‖ γ₀) − F(θ) = R(θ ‖ Ψ_γ₀(θ)),
//! F(θ) = ∫ (y + m_b(θ))·ỹ − ½(y + m_b(θ))² dθ(y, ỹ),    m_b(θ) = ∫ b(y) dθ(y, ỹ),
//! ```
//!
//! where `γ₀ = N(0, I₂)` and `Ψ_γ₀(θ) = N((0, m_b(θ)), [[1, 1], [1, 2]])`.
//!
//! The indicator variant replaces the drift by a random scaling:
//! `X_i(1) = X_i(0) + μ^N(B × ℝ)·Y_i(1)` for a finite union of intervals `B`.

use nalgebra::{DMatrix, DVector};

use crate::measures::{
    gaussian_relative_entropy, DiscreteDistribution, EmpiricalMeasure, GaussianMeasure,
};
use crate::noise_systems::{rate_function_re_form, StagedSystemSpec};
use crate::quadrature::{gaussian_expectation, normal_cell_grid, normal_interval_probability, normal_quantile_grid};
use crate::sampling::{particle_rng, NoiseSampler, StandardNormalNoise};
use crate::{Error, ExtReal, Result};

/// The bounded drift `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftFunction {
    /// `b(x) = scale`.
    Constant { scale: f64 },
    /// `b(x) = scale · tanh(x)`.
    ScaledTanh { scale: f64 },
    /// `b(x) = scale · cos(x)`.
    ScaledCosine { scale: f64 },
}

impl DriftFunction {
    /// Looks up a builtin by name: `constant`, `tanh` or `cosine`.
    pub fn from_name(kind: &str, scale: f64) -> Result<Self> {
        if !scale.is_finite() {
            return Err(Error::Domain(format!("drift scale {scale}")));
        }
        match kind {
            "constant" => Ok(DriftFunction::Constant { scale }),
            "tanh" | "scaled-tanh" => Ok(DriftFunction::ScaledTanh { scale }),
            "cosine" | "scaled-cosine" => Ok(DriftFunction::ScaledCosine { scale }),
            other => Err(Error::Domain(format!("unknown drift `{other}`"))),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            DriftFunction::Constant { scale } => scale,
            DriftFunction::ScaledTanh { scale } => scale * x.tanh(),
            DriftFunction::ScaledCosine { scale } => scale * x.cos(),
        }
    }

    /// `‖b‖_∞`.
    pub fn sup_norm(&self) -> f64 {
        match *self {
            DriftFunction::Constant { scale }
            | DriftFunction::ScaledTanh { scale }
            | DriftFunction::ScaledCosine { scale } => scale.abs(),
        }
    }
}

/// A finite union of half-open intervals `(a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    /// Intervals must satisfy `a < b`; overlapping ones are rejected.
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.iter().any(|(a, b)| !(a < b) || a.is_nan() || b.is_nan()) {
            return Err(Error::Domain("intervals need left < right".into()));
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        if intervals.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(Error::Domain("intervals overlap".into()));
        }
        Ok(IntervalUnion { intervals })
    }

    /// The whole line `(−∞, ∞]`.
    pub fn everything() -> Self {
        IntervalUnion {
            intervals: vec![(f64::NEG_INFINITY, f64::INFINITY)],
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|(a, b)| *a < x && x <= *b)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    fn gaussian_mass(&self, mean: f64, sd: f64) -> f64 {
        self.intervals
            .iter()
            .map(|(a, b)| normal_interval_probability(*a, *b, mean, sd))
            .sum::<f64>()
            .min(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ToyVariant {
    Standard,
    Indicator(IntervalUnion),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyModelSpec {
    pub b: DriftFunction,
    pub variant: ToyVariant,
}

impl ToyModelSpec {
    pub fn standard(b: DriftFunction) -> Self {
        ToyModelSpec {
            b,
            variant: ToyVariant::Standard,
        }
    }

    pub fn indicator(b: DriftFunction, set: IntervalUnion) -> Self {
        ToyModelSpec {
            b,
            variant: ToyVariant::Indicator(set),
        }
    }

    fn require_standard(&self, what: &str) -> Result<()> {
        match self.variant {
            ToyVariant::Standard => Ok(()),
            ToyVariant::Indicator(_) => Err(Error::Domain(format!(
                "{what} is only available in closed form for the standard variant"
            ))),
        }
    }
}

/// A measure on `ℝ²` whose first marginal can be integrated.
pub trait ToyLaw {
    /// `∫ g(y) dθ(y, ỹ)`.
    fn first_marginal_expectation(&self, g: &dyn Fn(f64) -> f64) -> Result<f64>;
    /// `θ(B × ℝ)`.
    fn first_marginal_mass(&self, set: &IntervalUnion) -> Result<f64>;
}

fn check_planar(theta: &GaussianMeasure) -> Result<()> {
    if theta.dim() != 2 {
        return Err(Error::Domain(format!("expected a bivariate Gaussian, got dimension {}", theta.dim())));
    }
    Ok(())
}

impl ToyLaw for GaussianMeasure {
    fn first_marginal_expectation(&self, g: &dyn Fn(f64) -> f64) -> Result<f64> {
        check_planar(self)?;
        Ok(gaussian_expectation(g, self.mean()[0], self.cov()[(0, 0)].sqrt()))
    }

    fn first_marginal_mass(&self, set: &IntervalUnion) -> Result<f64> {
        check_planar(self)?;
        Ok(set.gaussian_mass(self.mean()[0], self.cov()[(0, 0)].sqrt()))
    }
}

fn check_pairs(theta: &DiscreteDistribution<Vec<f64>>) -> Result<()> {
    if theta.atoms().iter().any(|(p, _)| p.len() != 2) {
        return Err(Error::Domain("expected atoms in ℝ²".into()));
    }
    Ok(())
}

impl ToyLaw for DiscreteDistribution<Vec<f64>> {
    fn first_marginal_expectation(&self, g: &dyn Fn(f64) -> f64) -> Result<f64> {
        check_pairs(self)?;
        Ok(self.expect(|p| g(p[0])))
    }

    fn first_marginal_mass(&self, set: &IntervalUnion) -> Result<f64> {
        check_pairs(self)?;
        Ok(self.expect(|p| if set.contains(p[0]) { 1.0 } else { 0.0 }))
    }
}

/// `m_b(θ) = ∫ b(y) dθ(y, ỹ)`; 64-point Gauss-Hermite for Gaussian `θ`, an
/// exact sum for discrete `θ`.
pub fn m_b(theta: &impl ToyLaw, spec: &ToyModelSpec) -> Result<f64> {
    if let DriftFunction::Constant { scale } = spec.b {
        theta.first_marginal_mass(&IntervalUnion::everything())?;
        return Ok(scale);
    }
    theta.first_marginal_expectation(&|x| spec.b.eval(x))
}

/// The mean-field coefficient of a discrete state marginal, shared by both
/// simulation routes.
fn field_of_marginal(spec: &ToyModelSpec, marginal: &DiscreteDistribution<f64>) -> f64 {
    match (&spec.variant, spec.b) {
        (ToyVariant::Standard, DriftFunction::Constant { scale }) => scale,
        (ToyVariant::Standard, b) => marginal.expect(|s| b.eval(*s)),
        (ToyVariant::Indicator(set), _) => marginal.expect(|s| if set.contains(*s) { 1.0 } else { 0.0 }),
    }
}

/// The mean-field coefficient entering the second step: `m_b(θ)` for the
/// standard variant, `θ(B × ℝ)` for the indicator variant.
pub fn mean_field(theta: &impl ToyLaw, spec: &ToyModelSpec) -> Result<f64> {
    match &spec.variant {
        ToyVariant::Standard => m_b(theta, spec),
        ToyVariant::Indicator(set) => theta.first_marginal_mass(set),
    }
}

fn second_step(spec: &ToyModelSpec, x: f64, field: f64, y: f64) -> f64 {
    match spec.variant {
        ToyVariant::Standard => x + field + y,
        ToyVariant::Indicator(_) => x + field * y,
    }
}

/// `ψ(θ, (y, ỹ))`: `(y, y + m_b(θ) + ỹ)`, or `(y, y + θ(B × ℝ)·ỹ)` for the
/// indicator variant.
pub fn toy_psi(theta: &impl ToyLaw, y: [f64; 2], spec: &ToyModelSpec) -> Result<[f64; 2]> {
    let field = mean_field(theta, spec)?;
    Ok([y[0], second_step(spec, y[0], field, y[1])])
}

/// `Ψ_γ₀(θ) = N((0, m_b(θ)), [[1, 1], [1, 2]])`.
pub fn toy_psi_gamma0(theta: &GaussianMeasure, spec: &ToyModelSpec) -> Result<GaussianMeasure> {
    spec.require_standard("Ψ_γ₀")?;
    let m = m_b(theta, spec)?;
    GaussianMeasure::from_slices(&[0.0, m], &[1.0, 1.0, 1.0, 2.0])
}

/// `Ψ_γ(θ)` for a discrete noise law `γ` on `ℝ²`, for either variant.
pub fn toy_psi_discrete(
    theta: &DiscreteDistribution<Vec<f64>>,
    gamma: &DiscreteDistribution<Vec<f64>>,
    spec: &ToyModelSpec,
) -> Result<DiscreteDistribution<Vec<f64>>> {
    check_pairs(gamma)?;
    let field = mean_field(theta, spec)?;
    crate::measures::pushforward(gamma, &|y: &Vec<f64>| {
        vec![y[0], second_step(spec, y[0], field, y[1])]
    })
}

/// The McKean-Vlasov law `N((0, E b(Y₀)), [[1, 1], [1, 2]])`.
pub fn toy_mckean_vlasov(spec: &ToyModelSpec) -> Result<GaussianMeasure> {
    toy_psi_gamma0(&GaussianMeasure::standard(2), spec)
}

/// `f(θ, (y, ỹ)) = (y + m)·ỹ − ½(y + m)²` with `m = m_b(θ)`.
pub fn toy_f(m: f64, y: [f64; 2]) -> f64 {
    let s = y[0] + m;
    s * y[1] - 0.5 * s * s
}

/// `F(θ) = ∫ f(θ, ·) dθ` in closed form from the first two moments of `θ`.
pub fn toy_big_f(theta: &GaussianMeasure, spec: &ToyModelSpec) -> Result<f64> {
    spec.require_standard("F")?;
    let m = m_b(theta, spec)?;
    let (mu, c) = (theta.mean(), theta.cov());
    let e_y = mu[0];
    let e_yy = c[(0, 0)] + mu[0] * mu[0];
    let e_yt = c[(0, 1)] + mu[0] * mu[1];
    let e_t = mu[1];
    Ok(e_yt + m * e_t - 0.5 * (e_yy + 2.0 * m * e_y + m * m))
}

/// `F(θ)` for a discrete `θ`, by direct summation.
pub fn toy_big_f_discrete(theta: &DiscreteDistribution<Vec<f64>>, spec: &ToyModelSpec) -> Result<f64> {
    spec.require_standard("F")?;
    let m = m_b(theta, spec)?;
    Ok(theta.expect(|p| toy_f(m, [p[0], p[1]])))
}

/// Both forms of the rate function at a Gaussian `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyRate {
    /// `R(θ ‖ γ₀) − F(θ)`.
    pub re_minus_f: f64,
    /// `R(θ ‖ Ψ_γ₀(θ))`.
    pub entropy_form: f64,
}

pub fn toy_rate_function(theta: &GaussianMeasure, spec: &ToyModelSpec) -> Result<ToyRate> {
    spec.require_standard("the Gaussian rate function")?;
    check_planar(theta)?;
    if theta.cov().clone().cholesky().is_none() {
        return Err(Error::Domain("θ has a singular covariance".into()));
    }
    let finite = |r: ExtReal| r.finite().ok_or_else(|| Error::Domain("θ is singular".into()));
    let against_noise = finite(gaussian_relative_entropy(theta, &GaussianMeasure::standard(2))?)?;
    let entropy_form = finite(gaussian_relative_entropy(theta, &toy_psi_gamma0(theta, spec)?)?)?;
    Ok(ToyRate {
        re_minus_f: against_noise - toy_big_f(theta, spec)?,
        entropy_form,
    })
}

/// The model as a one-stage system driven by standard normal noise.
pub fn staged_spec(spec: &ToyModelSpec) -> StagedSystemSpec<f64, f64> {
    let spec = spec.clone();
    StagedSystemSpec::new(
        1,
        |y: &f64| Ok(*y),
        move |_, x: &f64, marginal: &DiscreteDistribution<f64>, y: &f64| {
            let field = field_of_marginal(&spec, marginal);
            Ok(second_step(&spec, *x, field, *y))
        },
    )
    .expect("one stage")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyRun {
    /// `(X_i(0), X_i(1))` in particle order.
    pub paths: Vec<Vec<f64>>,
    pub empirical: EmpiricalMeasure<Vec<f64>>,
}

/// Simulates `n` particles; particle `i` draws `(Y_i(0), Y_i(1))` from
/// [`particle_rng`]`(seed, i)`.
pub fn toy_simulate(spec: &ToyModelSpec, n: usize, seed: u64) -> Result<ToyRun> {
    if n == 0 {
        return Err(Error::Domain("at least one particle is required".into()));
    }
    let noise: Vec<Vec<f64>> = (0..n)
        .map(|i| StandardNormalNoise.sample_path(1, &mut particle_rng(seed, i as u64)))
        .collect();
    let start = EmpiricalMeasure::from_samples(noise.iter().map(|y| y[0]))?.to_distribution();
    let field = field_of_marginal(spec, &start);
    let paths: Vec<Vec<f64>> = noise
        .iter()
        .map(|y| vec![y[0], second_step(spec, y[0], field, y[1])])
        .collect();
    Ok(ToyRun {
        empirical: EmpiricalMeasure::from_samples(paths.iter().cloned())?,
        paths,
    })
}

/// A discretized Gaussian rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizedRate {
    pub discrete: f64,
    pub gaussian: f64,
}

/// Evaluates `R(θ ‖ Ψ_γ₀(θ))` with the noise-system machinery on a
/// `cells × cells` discretization and compares it with the Gaussian value.
///
/// `γ₀` becomes the product of two `cells`-point normal discretizations
/// `(y_i, p_i)`. Writing `θ` as the law of `(A, A + m + B)`, the pair `(A, B)`
/// is discretized on the same lattice, so the discrete `θ` lives on the
/// atoms `(y_i, y_i + m + y_j)` charged by the discrete `Ψ_γ₀(θ)`.
pub fn discretized_rate(theta: &GaussianMeasure, spec: &ToyModelSpec, cells: usize) -> Result<DiscretizedRate> {
    spec.require_standard("the discretized rate")?;
    let gaussian = toy_rate_function(theta, spec)?.entropy_form;
    let width = 8.0;
    let grid = normal_cell_grid(cells, width);
    let h = 2.0 * width / cells as f64;

    let m = m_b(theta, spec)?;
    let (mu, c) = (theta.mean(), theta.cov());
    let ab_mean = DVector::from_vec(vec![mu[0], mu[1] - mu[0] - m]);
    let map = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 1.0]);
    let ab_cov = &map * c * map.transpose();
    let inv = ab_cov
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Domain("θ has a singular covariance".into()))?;
    let density = |a: f64, b: f64| {
        let d = DVector::from_vec(vec![a - ab_mean[0], b - ab_mean[1]]);
        (-0.5 * (d.transpose() * &inv * &d)[(0, 0)]).exp()
    };
    let mut ab = Vec::with_capacity(cells * cells);
    for (a, _) in &grid {
        for (b, _) in &grid {
            ab.push((*a, *b, density(*a, *b) * h * h));
        }
    }
    let total: f64 = ab.iter().map(|x| x.2).sum();
    let first: Vec<(f64, f64)> = grid
        .iter()
        .enumerate()
        .map(|(i, (a, _))| (*a, ab[i * cells..(i + 1) * cells].iter().map(|x| x.2).sum::<f64>() / total))
        .collect();
    let m_disc: f64 = first.iter().map(|(a, p)| p * spec.b.eval(*a)).sum();
    let theta_disc = DiscreteDistribution::normalized(
        ab.iter().map(|(a, b, w)| (vec![*a, *a + m_disc + *b], *w)).collect(),
    )?;
    let gamma0 = DiscreteDistribution::normalized(
        grid.iter()
            .flat_map(|(a, p)| grid.iter().map(move |(b, q)| (vec![*a, *b], p * q)))
            .collect(),
    )?;
    let discrete = rate_function_re_form(&theta_disc, &gamma0, &staged_spec(spec))?
        .finite()
        .ok_or_else(|| Error::Domain("discretized θ escaped the lattice".into()))?;
    Ok(DiscretizedRate { discrete, gaussian })
}

/// Estimates of `F` along a sequence of contaminated laws
/// `(1 − 1/n)·μ* + (1/n)·δ_{(t, −t)}`, one row `(t, F)` per tail level `t`.
///
/// The contaminant's mass vanishes as `n` grows, yet `F` can be pushed
/// arbitrarily far down by moving it outward.
pub fn f_discontinuity_demo(spec: &ToyModelSpec, n: usize, tails: &[f64]) -> Result<Vec<(f64, f64)>> {
    spec.require_standard("F")?;
    let k = 40;
    let star = toy_mckean_vlasov(spec)?;
    let m = star.mean()[1];
    let z = normal_quantile_grid(k, 0.0, 1.0);
    let base = DiscreteDistribution::normalized(
        z.iter()
            .flat_map(|a| z.iter().map(move |b| (vec![*a, *a + m + *b], 1.0)))
            .collect(),
    )?;
    tails
        .iter()
        .map(|t| {
            let mixed = base.mix(&DiscreteDistribution::dirac(vec![*t, -*t]), 1.0 / n as f64)?;
            Ok((*t, toy_big_f_discrete(&mixed, spec)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise_systems::simulate_particles;

    fn zero() -> ToyModelSpec {
        ToyModelSpec::standard(DriftFunction::Constant { scale: 0.0 })
    }

    fn sigma_theta(m: [f64; 2]) -> GaussianMeasure {
        GaussianMeasure::from_slices(&m, &[1.0, 1.0, 1.0, 2.0]).unwrap()
    }

    #[test]
    fn closed_form_f_values() {
        let f = |t: &GaussianMeasure| toy_big_f(t, &zero()).unwrap();
        assert!((f(&sigma_theta([0.0, 0.0])) - 0.5).abs() < 1e-15);
        assert!((f(&sigma_theta([1.0, 1.0])) - 1.0).abs() < 1e-15);
        assert!((f(&GaussianMeasure::standard(2)) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn rate_forms_at_reference_points() {
        let r = toy_rate_function(&sigma_theta([1.0, 1.0]), &zero()).unwrap();
        assert!((r.re_minus_f - 0.5).abs() < 1e-14);
        assert!((r.entropy_form - 0.5).abs() < 1e-14);
        let s = toy_rate_function(&GaussianMeasure::standard(2), &zero()).unwrap();
        assert!((s.re_minus_f - 0.5).abs() < 1e-14);
        assert!((s.entropy_form - 0.5).abs() < 1e-14);
        let tanh = ToyModelSpec::standard(DriftFunction::ScaledTanh { scale: 0.7 });
        let star = toy_mckean_vlasov(&tanh).unwrap();
        let z = toy_rate_function(&star, &tanh).unwrap();
        assert!(z.re_minus_f.abs() < 1e-12 && z.entropy_form.abs() < 1e-12);
    }

    #[test]
    fn psi_and_mean_field() {
        let c = ToyModelSpec::standard(DriftFunction::Constant { scale: 1.5 });
        let theta = sigma_theta([0.3, -2.0]);
        assert_eq!(m_b(&theta, &c).unwrap(), 1.5);
        assert_eq!(toy_psi(&theta, [0.0, 0.0], &c).unwrap(), [0.0, 1.5]);
        assert_eq!(toy_psi(&theta, [2.0, 1.0], &zero()).unwrap(), [2.0, 3.0]);
        let tanh = ToyModelSpec::standard(DriftFunction::ScaledTanh { scale: 2.0 });
        assert!(m_b(&GaussianMeasure::standard(2), &tanh).unwrap().abs() < 1e-15);
        let img = toy_psi_gamma0(&theta, &c).unwrap();
        assert_eq!(img.mean().as_slice(), &[0.0, 1.5]);
    }

    #[test]
    fn indicator_variant() {
        let b = DriftFunction::Constant { scale: 1.0 };
        let everything = ToyModelSpec::indicator(b, IntervalUnion::new(vec![(f64::NEG_INFINITY, f64::INFINITY)]).unwrap());
        assert!((mean_field(&GaussianMeasure::standard(2), &everything).unwrap() - 1.0).abs() < 1e-15);
        let far = ToyModelSpec::indicator(b, IntervalUnion::new(vec![(100.0, 101.0)]).unwrap());
        let theta = DiscreteDistribution::uniform(vec![vec![0.0, 0.0], vec![1.0, 3.0]]).unwrap();
        assert_eq!(toy_psi(&theta, [0.5, 9.0], &far).unwrap(), [0.5, 0.5]);
        let half = ToyModelSpec::indicator(b, IntervalUnion::new(vec![(f64::NEG_INFINITY, 0.0)]).unwrap());
        assert!((mean_field(&GaussianMeasure::standard(2), &half).unwrap() - 0.5).abs() < 1e-15);
        assert!(toy_psi_gamma0(&GaussianMeasure::standard(2), &half).is_err());
        assert!(IntervalUnion::new(vec![(0.0, 2.0), (1.0, 3.0)]).is_err());
    }

    #[test]
    fn simulation_matches_the_noise_system_route() {
        for spec in [
            ToyModelSpec::standard(DriftFunction::ScaledCosine { scale: 0.8 }),
            ToyModelSpec::indicator(DriftFunction::Constant { scale: 0.0 }, IntervalUnion::new(vec![(-1.0, 0.5)]).unwrap()),
        ] {
            let direct = toy_simulate(&spec, 200, 5).unwrap();
            let staged = simulate_particles(&StandardNormalNoise, &staged_spec(&spec), 200, 5).unwrap();
            assert_eq!(direct.paths, staged.paths);
            assert_eq!(direct.empirical, staged.empirical);
        }
    }

    #[test]
    fn constant_drift_shifts_every_particle() {
        let c = ToyModelSpec::standard(DriftFunction::Constant { scale: 0.25 });
        let run = toy_simulate(&c, 50, 1).unwrap();
        let noise: Vec<Vec<f64>> = (0..50)
            .map(|i| StandardNormalNoise.sample_path(1, &mut particle_rng(1, i)))
            .collect();
        for (p, y) in run.paths.iter().zip(&noise) {
            assert_eq!(p[0], y[0]);
            assert_eq!(p[1], y[0] + 0.25 + y[1]);
        }
    }

    #[test]
    fn discontinuity_demo_runs_downhill() {
        let rows = f_discontinuity_demo(&zero(), 100, &[1.0, 10.0, 100.0]).unwrap();
        assert!(rows[2].1 < rows[1].1 && rows[1].1 < rows[0].1);
    }
}
