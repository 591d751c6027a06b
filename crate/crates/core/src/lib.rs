//! Robust alpha-stable limit values for heavy-tailed sums with index
//! `alpha` in `(0, 1]`.
//!
//! The crate computes the limit `u(1, 0)` of normalized heavy-tailed sums
//! under a sublinear expectation three independent ways and cross-checks
//! them:
//!
//! * a dynamic-programming recursion over the summand law ([`scheme`]),
//! * an explicit monotone solver for the fully nonlinear PIDE
//!   `d_t u = sup_F ∫ delta_lambda^alpha u dF` ([`pide`]),
//! * and, in the singleton (classical) case, a stable-law oracle built from
//!   the characteristic exponent ([`oracle`]) plus Monte Carlo ([`mc`]).
//!
//! Model uncertainty enters through a band of spherical masses for the
//! stable Levy measure ([`measure`]); the summand family is the symmetric
//! perturbed-Pareto class ([`pareto`]) whose sublinear expectation is a
//! supremum over the tail parameter ([`sublinear`]).

pub mod config;
pub mod error;
pub mod grid;
pub mod mc;
pub mod measure;
pub mod nonlocal;
pub mod opt;
pub mod oracle;
pub mod pareto;
pub mod pide;
pub mod registry;
pub mod scheme;
pub mod sublinear;

pub use error::{CoreError, Result};
pub use grid::{GridFunction, GridSpec};
pub use measure::{k_alpha, sup_spherical, tail_mass, SphericalMeasure, StableIndex, UncertaintySet};
pub use nonlocal::{delta_alpha, generator_ray, sup_generator, QuadratureSpec, SampledFunction};
pub use pareto::{BetaProfile, HeavyTailLaw, TruncationLevel};
pub use sublinear::LawFamily;
