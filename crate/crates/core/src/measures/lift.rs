use super::atom::Atom;
use super::discrete::DiscreteDistribution;
use super::entropy::relative_entropy;
use super::map::{pushforward, MeasurableMap};
use crate::{Error, ExtReal, Result};

/// Largest preimage class searched by [`brute_force_lift_infimum`].
pub const MAX_FIBER_ATOMS: usize = 8;
/// Largest source support accepted by [`brute_force_lift_infimum`].
pub const MAX_LIFT_SOURCE_ATOMS: usize = 4096;

const MAX_GRID_POINTS: u64 = 5_000_000;
const FINAL_STEP: f64 = 1e-10;

/// Outcome of [`optimal_lift`].
#[derive(Debug, Clone, PartialEq)]
pub enum Lift<A> {
    /// `lift∘ψ⁻¹ = η`, and `entropy = R(lift ‖ γ₀) = R(η ‖ γ₀∘ψ⁻¹)`.
    Attained {
        lift: DiscreteDistribution<A>,
        entropy: f64,
    },
    /// `η` is not absolutely continuous w.r.t. `γ₀∘ψ⁻¹`; the infimum is `+∞`.
    Infeasible,
}

impl<A> Lift<A> {
    pub fn value(&self) -> ExtReal {
        match self {
            Lift::Attained { entropy, .. } => ExtReal::Finite(*entropy),
            Lift::Infeasible => ExtReal::Infinite,
        }
    }
}

/// The minimizing lift `γ(y) = f(ψ(y))·γ₀(y)` with `f = dη/d(γ₀∘ψ⁻¹)`.
pub fn optimal_lift<A: Atom, B: Atom>(
    eta: &DiscreteDistribution<B>,
    gamma0: &DiscreteDistribution<A>,
    psi: &impl MeasurableMap<A, B>,
) -> Result<Lift<A>> {
    let image = pushforward(gamma0, psi)?;
    if !eta.compatible_with(&image) {
        return Err(Error::Domain("η and the image measure live on different spaces".into()));
    }
    if eta.support().any(|(x, _)| image.weight_of(x) <= 0.0) {
        return Ok(Lift::Infeasible);
    }
    let mut atoms = Vec::with_capacity(gamma0.len());
    for (y, g) in gamma0.atoms() {
        let x = psi.image(y)?;
        let w = if *g > 0.0 {
            eta.weight_of(&x) / image.weight_of(&x) * g
        } else {
            0.0
        };
        atoms.push((y.clone(), w));
    }
    let lift = DiscreteDistribution::from_parts(atoms);
    let entropy = relative_entropy(&lift, gamma0)?
        .finite()
        .expect("a lift of an absolutely continuous target has finite entropy");
    Ok(Lift::Attained { lift, entropy })
}

/// Result of [`brute_force_lift_infimum`].
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceLift<A> {
    pub value: ExtReal,
    /// A minimizer, absent when no lift exists.
    pub argmin: Option<DiscreteDistribution<A>>,
}

/// Numerical infimum of `R(γ ‖ γ₀)` over `γ` with `γ∘ψ⁻¹ = η`.
///
/// Within each preimage class `ψ⁻¹(x)` the lift is `η(x)·c` for a point `c`
/// of the probability simplex, so the pushforward constraint holds by
/// construction. Each class is searched independently: exhaustively over the
/// simplex lattice with spacing `1/grid_resolution`, then by a compass search
/// along the edge directions `e_i − e_j` whose step is halved down to 1e-10.
pub fn brute_force_lift_infimum<A: Atom, B: Atom>(
    eta: &DiscreteDistribution<B>,
    gamma0: &DiscreteDistribution<A>,
    psi: &impl MeasurableMap<A, B>,
    grid_resolution: usize,
) -> Result<BruteForceLift<A>> {
    if grid_resolution == 0 {
        return Err(Error::Domain("grid resolution must be positive".into()));
    }
    if gamma0.len() > MAX_LIFT_SOURCE_ATOMS {
        return Err(Error::Capacity(format!(
            "{} source atoms exceed the limit of {MAX_LIFT_SOURCE_ATOMS}",
            gamma0.len()
        )));
    }
    let images = gamma0
        .atoms()
        .iter()
        .map(|(y, _)| psi.image(y))
        .collect::<Result<Vec<B>>>()?;
    if let (Some(x), Some((e, _))) = (images.first(), eta.atoms().first()) {
        if !x.compatible(e) {
            return Err(Error::Domain("η and the image measure live on different spaces".into()));
        }
    }

    let mut lift = vec![0.0; gamma0.len()];
    let mut total = 0.0;
    for (x, w) in eta.support() {
        let fiber: Vec<usize> = (0..gamma0.len())
            .filter(|&i| gamma0.atoms()[i].1 > 0.0 && images[i].same_atom(x))
            .collect();
        if fiber.is_empty() {
            return Ok(BruteForceLift {
                value: ExtReal::Infinite,
                argmin: None,
            });
        }
        if fiber.len() > MAX_FIBER_ATOMS {
            return Err(Error::Capacity(format!(
                "preimage of {} has {} atoms, limit {MAX_FIBER_ATOMS}",
                x.render(),
                fiber.len()
            )));
        }
        let g: Vec<f64> = fiber.iter().map(|&i| gamma0.atoms()[i].1).collect();
        let (c, h) = minimize_on_simplex(&g, grid_resolution)?;
        total += w * (w.ln() + h);
        for (k, &i) in fiber.iter().enumerate() {
            lift[i] = w * c[k];
        }
    }
    let argmin = DiscreteDistribution::from_parts(
        gamma0
            .atoms()
            .iter()
            .zip(lift)
            .map(|((y, _), w)| (y.clone(), w))
            .collect(),
    );
    Ok(BruteForceLift {
        value: ExtReal::Finite(total.max(0.0)),
        argmin: Some(argmin),
    })
}

/// `Σ c_j log(c_j / g_j)` with `0·log 0 = 0`.
fn fiber_objective(c: &[f64], g: &[f64]) -> f64 {
    c.iter()
        .zip(g)
        .filter(|(c, _)| **c > 0.0)
        .map(|(c, g)| c * (c / g).ln())
        .sum()
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn minimize_on_simplex(g: &[f64], resolution: usize) -> Result<(Vec<f64>, f64)> {
    let m = g.len();
    if m == 1 {
        return Ok((vec![1.0], fiber_objective(&[1.0], g)));
    }
    let points = binomial((resolution + m - 1) as u64, (m - 1) as u64);
    if points > MAX_GRID_POINTS {
        return Err(Error::Capacity(format!(
            "simplex lattice with {points} points exceeds {MAX_GRID_POINTS}"
        )));
    }

    let r = resolution as f64;
    let mut best = vec![0.0; m];
    let mut best_val = f64::INFINITY;
    let mut counts = vec![0usize; m];
    let mut c = vec![0.0; m];
    lattice(&mut counts, 0, resolution, &mut |k| {
        for (cj, kj) in c.iter_mut().zip(k) {
            *cj = *kj as f64 / r;
        }
        let v = fiber_objective(&c, g);
        if v < best_val {
            best_val = v;
            best.copy_from_slice(&c);
        }
    });

    let mut step = 1.0 / r;
    let mut trial = vec![0.0; m];
    while step >= FINAL_STEP {
        let mut improved = false;
        for i in 0..m {
            for j in 0..m {
                if i == j || best[j] <= 0.0 {
                    continue;
                }
                let s = step.min(best[j]);
                trial.copy_from_slice(&best);
                trial[i] += s;
                trial[j] -= s;
                let v = fiber_objective(&trial, g);
                if v < best_val {
                    best_val = v;
                    best.copy_from_slice(&trial);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((best, best_val))
}

/// Calls `visit` on every composition of `remaining` into the slots from
/// `slot` onward.
fn lattice(counts: &mut [usize], slot: usize, remaining: usize, visit: &mut impl FnMut(&[usize])) {
    if slot + 1 == counts.len() {
        counts[slot] = remaining;
        visit(counts);
        return;
    }
    for k in 0..=remaining {
        counts[slot] = k;
        lattice(counts, slot + 1, remaining - k, visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mod2(y: &usize) -> usize {
        y % 2
    }

    #[test]
    fn lift_of_the_image_is_the_reference() {
        let g0 = DiscreteDistribution::new(vec![(1usize, 0.1), (2, 0.2), (3, 0.3), (4, 0.4)]).unwrap();
        let eta = pushforward(&g0, &mod2).unwrap();
        match optimal_lift(&eta, &g0, &mod2).unwrap() {
            Lift::Attained { lift, entropy } => {
                assert!(lift.approx_eq(&g0, 1e-15));
                assert!(entropy.abs() < 1e-15);
            }
            Lift::Infeasible => panic!("feasible"),
        }
        let bf = brute_force_lift_infimum(&eta, &g0, &mod2, 12).unwrap();
        assert!(bf.value.finite().unwrap() < 1e-6);
    }

    #[test]
    fn mod_two_instance() {
        let g0 = DiscreteDistribution::uniform(vec![1usize, 2, 3, 4]).unwrap();
        let eta = DiscreteDistribution::new(vec![(0usize, 0.3), (1, 0.7)]).unwrap();
        let Lift::Attained { lift, entropy } = optimal_lift(&eta, &g0, &mod2).unwrap() else {
            panic!("feasible")
        };
        for (y, w) in [(1usize, 0.35), (2, 0.15), (3, 0.35), (4, 0.15)] {
            assert!((lift.weight_of(&y) - w).abs() < 1e-15);
        }
        let oracle = 0.3 * 0.6f64.ln() + 0.7 * 1.4f64.ln();
        assert!((entropy - oracle).abs() < 1e-15);
        assert_eq!(pushforward(&lift, &mod2).unwrap(), eta);
        let bf = brute_force_lift_infimum(&eta, &g0, &mod2, 10).unwrap();
        assert!((bf.value.finite().unwrap() - oracle).abs() < 1e-9);
        assert!(bf.argmin.unwrap().approx_eq(&lift, 1e-6));
    }

    #[test]
    fn uncharged_class_is_infeasible() {
        let g0 = DiscreteDistribution::uniform(vec![2usize, 4]).unwrap();
        let eta = DiscreteDistribution::dirac(1usize);
        assert_eq!(optimal_lift(&eta, &g0, &mod2).unwrap(), Lift::Infeasible);
        let bf = brute_force_lift_infimum(&eta, &g0, &mod2, 8).unwrap();
        assert_eq!(bf.value, ExtReal::Infinite);
        assert!(bf.argmin.is_none());
    }

    #[test]
    fn oversized_fibers_are_refused() {
        let g0 = DiscreteDistribution::uniform((0..9usize).collect()).unwrap();
        let eta = DiscreteDistribution::dirac(0usize);
        let r = brute_force_lift_infimum(&eta, &g0, &|_: &usize| 0usize, 4);
        assert!(matches!(r, Err(Error::Capacity(_))));
    }

    #[test]
    fn lattice_visits_every_composition() {
        let mut n = 0;
        lattice(&mut [0; 4], 0, 5, &mut |k| {
            assert_eq!(k.iter().sum::<usize>(), 5);
            n += 1;
        });
        assert_eq!(n as u64, binomial(8, 3));
    }
}
