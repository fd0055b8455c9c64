use std::collections::BTreeMap;

use mfrate_core::meanfield_chain::{chain_simulate, enumerate_types, exact_type_probability, MeanFieldChainSpec, TransitionFamily};
use mfrate_core::sampling::replication_seed;
use mfrate_core::toy_model::{toy_simulate, DriftFunction, ToyModelSpec};

#[test]
fn type_frequencies_match_exact_probabilities() {
    let spec = MeanFieldChainSpec::new(vec![0.6, 0.4], TransitionFamily::herding(0.1, 0.5).unwrap(), 2).unwrap();
    let types = enumerate_types(&spec, 3).unwrap();
    let reps = 100_000u64;
    let mut seen: BTreeMap<String, u64> = BTreeMap::new();
    for r in 0..reps {
        let run = chain_simulate(&spec, 3, replication_seed(17, r)).unwrap();
        *seen.entry(format!("{:?}", run.path_type.counts())).or_default() += 1;
    }
    let mut covered = 0;
    for nu in &types {
        let p = exact_type_probability(nu, &spec).unwrap();
        let count = seen.get(&format!("{:?}", nu.counts())).copied().unwrap_or(0);
        covered += count;
        let freq = count as f64 / reps as f64;
        let sigma = (p * (1.0 - p) / reps as f64).sqrt();
        assert!((freq - p).abs() <= 4.0 * sigma + 1e-12, "{:?}: {freq} vs {p}", nu.counts());
    }
    assert_eq!(covered, reps, "a simulated type is missing from the enumeration");
}

#[test]
fn toy_increment_mean_is_clt_small() {
    let spec = ToyModelSpec::standard(DriftFunction::from_name("tanh", 1.5).unwrap());
    for n in [100usize, 1000, 10_000] {
        for seed in 0..5 {
            let run = toy_simulate(&spec, n, seed).unwrap();
            let step: f64 = run.paths.iter().map(|p| p[1] - p[0]).sum::<f64>() / n as f64;
            let drift: f64 = run.paths.iter().map(|p| spec.b.eval(p[0])).sum::<f64>() / n as f64;
            assert!((step - drift).abs() < 3.0 / (n as f64).sqrt(), "n={n} seed={seed}");
        }
    }
}
