//! # mfrate-core
//!
//! Large deviations of empirical measures for weakly interacting (mean-field)
//! particle systems, computed at desk scale.
//!
//! The rate functions handled here all take the relative-entropy form
//!
//! ```text
//! I(η) = R(η ‖ Ψ_γ₀(η))
//! ```
//!
//! where `Ψ_γ₀(η)` is the law of a single particle whose measure argument has
//! been frozen at `η`. Every identity is checked against an independent route:
//! exact enumeration, closed-form Gaussian algebra, or brute-force search.
//!
//! ## Modules
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`measures`] | finite-support and Gaussian measures, relative entropy, lifts, d_bL |
//! | [`noise_systems`] | staged noise-driven systems, McKean-Vlasov law, rate functions |
//! | [`toy_model`] | two-step Gaussian model with closed-form rate function |
//! | [`meanfield_chain`] | finite-state mean-field Markov chains and exact type probabilities |
//! | [`ito_euler`] | Euler-Maruyama particle systems and Gaussian path laws |
//!
//! Randomness is reproducible: every particle draws from its own ChaCha stream
//! derived from one root seed (see [`sampling`]).

pub mod combinatorics;
mod error;
mod ext_real;
pub mod ito_euler;
pub mod meanfield_chain;
pub mod measures;
pub mod noise_systems;
pub mod quadrature;
pub mod sampling;
pub mod toy_model;

pub use error::{Error, Result};
pub use ext_real::ExtReal;
