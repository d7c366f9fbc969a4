//! A workbench for probabilistic PCF (PPCF): a simply typed λ-calculus over a
//! single ground type of natural numbers, extended with a rational-biased coin
//! and a conditional that consumes its scrutinee call-by-value.
//!
//! The crate provides two independent semantic back-ends plus the machinery to
//! compare them:
//!
//! - [`syntax`] — terms, types, parsing, printing, substitution, type checking,
//!   and observation contexts;
//! - [`operational`] — weak-head reduction viewed as an absorbing Markov chain,
//!   with exact rational state masses and a seeded Monte-Carlo sampler;
//! - [`stdlib`] — the standard example programs (predecessor, addition,
//!   comparison, probes, uniform generators, a Las Vegas search, ...);
//! - [`pcs`] — finite-web probabilistic coherence space algebra: pairing,
//!   matrices, the multiset exponential, and Kleisli calculus;
//! - [`denot`] — a compositional evaluator into truncated sub-probability
//!   vectors and function values, with fixpoints by monotone iteration;
//! - [`fullabs`] — testing terms indexed by web elements, coefficient
//!   extraction by exact interpolation, and end-to-end separation experiments.
//!
//! All probability computations default to exact rational arithmetic
//! ([`rat::Rat`]); the denotational evaluator can optionally run in `f64`.

pub mod denot;
pub mod fullabs;
pub mod operational;
pub mod pcs;
pub mod rat;
pub mod stdlib;
pub mod syntax;

pub use rat::Rat;
pub use syntax::{Term, Type, TypingContext};
