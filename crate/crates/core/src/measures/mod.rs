//! Finite-support and Gaussian probability measures.
//!
//! Relative entropy appears in several guises: the direct sum
//! [`relative_entropy`], its coarse-grained lower bound over a [`Partition`],
//! and the Donsker-Varadhan variational value. The contraction property
//!
//! ```text
//! R(η ‖ γ₀∘ψ⁻¹) = inf { R(γ ‖ γ₀) : γ∘ψ⁻¹ = η }
//! ```
//!
//! is available both in closed form ([`optimal_lift`]) and as a grid search
//! ([`brute_force_lift_infimum`]) that serves as its oracle.

mod atom;
mod bl;
mod discrete;
mod entropy;
mod gaussian;
mod io;
mod lift;
mod map;

pub use atom::{Atom, REAL_ATOM_TOL};
pub use bl::{bounded_lipschitz_distance, bounded_lipschitz_distance_1d, MAX_LP_ATOMS};
pub use discrete::{DiscreteDistribution, EmpiricalMeasure, Mass, WEIGHT_SUM_TOL};
pub use entropy::{donsker_varadhan_value, partition_lower_bound, relative_entropy, Partition};
pub use gaussian::{gaussian_relative_entropy, GaussianMeasure};
pub use io::{read_gaussian, read_table, write_gaussian, write_table};
pub use lift::{
    brute_force_lift_infimum, optimal_lift, BruteForceLift, Lift, MAX_FIBER_ATOMS,
    MAX_LIFT_SOURCE_ATOMS,
};
pub use map::{pushforward, AffineMap, FiniteMap, MeasurableMap};

pub(crate) use discrete::canonicalize;
