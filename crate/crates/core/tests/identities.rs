use mfrate_core::ito_euler::{
    ito_rate_re_form, mckean_vlasov_flow, variational_upper_bound, wiener_re_discretized, ControlPath, EulerGrid,
    FlowOptions, ItoSpec,
};
use mfrate_core::measures::{gaussian_relative_entropy, relative_entropy, DiscreteDistribution, GaussianMeasure};
use mfrate_core::quadrature::normal_interval_probability;
use mfrate_core::toy_model::{discretized_rate, DriftFunction, ToyModelSpec};
use mfrate_core::ExtReal;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn gaussian_entropy_matches_fine_discretization() {
    let cases: [(f64, f64, f64, f64); 3] = [(0.0, 1.0, 1.0, 2.0), (0.5, 0.7, -0.3, 1.1), (2.0, 1.5, 0.0, 1.0)];
    for (m1, s1, m2, s2) in cases {
        let closed = (s2 / s1).ln() + (s1 * s1 + (m1 - m2) * (m1 - m2)) / (2.0 * s2 * s2) - 0.5;
        let one = |m: f64, s: f64| GaussianMeasure::from_slices(&[m], &[s * s]).unwrap();
        let exact = gaussian_relative_entropy(&one(m1, s1), &one(m2, s2)).unwrap().finite().unwrap();
        assert!((exact - closed).abs() < 1e-12);

        let cells = 4000;
        let (lo, hi) = (-20.0, 20.0);
        let w = (hi - lo) / cells as f64;
        let disc = |m: f64, s: f64| {
            DiscreteDistribution::normalized(
                (0..cells)
                    .map(|i| {
                        let a = lo + i as f64 * w;
                        (i as i64, normal_interval_probability(a, a + w, m, s).max(1e-300))
                    })
                    .collect(),
            )
            .unwrap()
        };
        let approx = relative_entropy(&disc(m1, s1), &disc(m2, s2)).unwrap().finite().unwrap();
        assert!((approx - exact).abs() <= 0.02 * exact, "{approx} vs {exact}");
    }
}

#[test]
fn toy_discretized_rate_converges() {
    let theta = GaussianMeasure::from_slices(&[0.5, 1.0], &[1.0, 0.3, 0.3, 1.5]).unwrap();
    let spec = ToyModelSpec::standard(DriftFunction::from_name("tanh", 1.0).unwrap());
    let r = discretized_rate(&theta, &spec, 200).unwrap();
    assert!((r.discrete - r.gaussian).abs() <= 0.02 * r.gaussian, "{r:?}");
}

fn random_linear(rng: &mut ChaCha8Rng, d: usize, horizon: f64) -> ItoSpec {
    let mut m = |scale: f64, r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.random_range(-scale..scale));
    let a = m(0.8, d, d);
    let b = m(0.8, d, d);
    let d1 = d + 1;
    let s = DMatrix::from_fn(d, d1, |i, j| if i == j { 1.0 } else { 0.0 }) + m(0.3, d, d1);
    let c = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
    let x0 = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
    ItoSpec::linear(a, b, c, s, x0, horizon).unwrap()
}

#[test]
fn variational_and_entropy_forms_agree_on_mean_shifts() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..10 {
        let d = 1 + case % 2;
        let steps = if case < 5 { 8 } else { 32 };
        let spec = random_linear(&mut rng, d, 1.0);
        let grid = EulerGrid::for_spec(&spec, steps).unwrap();
        let law = mckean_vlasov_flow(&spec, &grid, FlowOptions::default()).unwrap().path_law.unwrap();
        let shifted: Vec<DVector<f64>> = law.mean_flow()[1..]
            .iter()
            .map(|m| m + DVector::from_fn(d, |_, _| rng.random_range(-0.5..0.5)))
            .collect();
        let target = law.with_means(&shifted).unwrap();
        let re = ito_rate_re_form(&target, &spec, &grid).unwrap().finite().unwrap();
        let var = variational_upper_bound(&target, &spec, &grid).unwrap().value.finite().unwrap();
        assert!(var >= re - 1e-9 && var <= re + 1e-6, "case {case}: {var} vs {re}");
    }
}

#[test]
fn rate_vanishes_only_at_the_mckean_vlasov_law() {
    for kappa in [0.0, 0.5, 2.0] {
        for sigma in [0.5, 1.0, 2.0] {
            for x0 in [-1.0, 0.0, 1.0] {
                let spec = ItoSpec::mean_reverting(kappa, sigma, x0, 1.0).unwrap();
                let grid = EulerGrid::for_spec(&spec, 8).unwrap();
                let law = mckean_vlasov_flow(&spec, &grid, FlowOptions::default()).unwrap().path_law.unwrap();
                assert_eq!(ito_rate_re_form(&law, &spec, &grid).unwrap(), ExtReal::ZERO);
                for shift in [1e-3, 0.1, 1.0] {
                    let moved: Vec<_> = law.mean_flow()[1..].iter().map(|m| m.add_scalar(shift)).collect();
                    let rate = ito_rate_re_form(&law.with_means(&moved).unwrap(), &spec, &grid).unwrap();
                    assert!(rate > ExtReal::ZERO);
                }
            }
        }
    }
}

#[test]
fn wiener_entropy_is_the_control_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let steps = rng.random_range(1..=40);
        let d = rng.random_range(1..=3);
        let horizon = rng.random_range(0.1..3.0);
        let grid = EulerGrid::new(horizon, steps).unwrap();
        let u = ControlPath::new(
            (0..steps)
                .map(|_| DVector::from_fn(d, |_, _| rng.random_range(-3.0..3.0)))
                .collect(),
        )
        .unwrap();
        let oracle: f64 = 0.5 * u.values().iter().flat_map(|v| v.iter()).map(|x| x * x).sum::<f64>() * grid.step();
        let value = wiener_re_discretized(&u, &grid).unwrap();
        assert!((value - oracle).abs() <= 1e-12 * oracle.max(1.0), "{value} vs {oracle}");
    }
}
