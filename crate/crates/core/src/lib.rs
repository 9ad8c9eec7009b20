//! Bochner–Phillips functional calculus for tuples of commuting matrix
//! semigroup generators.
//!
//! The crate evaluates Bernstein functions `ψ ∈ 𝒯_n` of generator tuples
//! through their Lévy representation
//!
//! ```text
//! ψ(A) = c₀ I + Σ c₁ʲ A_j + ∫ (T_A(u) − I) dμ(u),      T_A(u) = Π exp(u_j A_j)
//! ```
//!
//! and ships executable checkers for the perturbation, commutator,
//! differentiability and trace estimates that hold for such functions.
//!
//! Module map:
//!
//! * [`bernstein`]: catalog of Bernstein functions, Lévy triples, moments,
//!   divided differences and subordination laws.
//! * [`quadrature`]: panel Gauss–Legendre integration against Lévy measures
//!   and subordination laws with certified truncation.
//! * [`operators`]: dense complex matrices, `exp(tA)`, Schatten norms and the
//!   commuting-tuple factory.
//! * [`calculus`]: `ψ(A)`, `g_t(A)`, `ψ′(A)` and the divided-difference
//!   operator, plus the spectral oracle.
//! * [`verify`]: bound checkers and randomized campaigns.
//! * [`cli`]: the `bpcalc` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bernstein;
pub mod calculus;
pub mod cli;
pub mod error;
pub mod operators;
pub mod quadrature;
pub mod verify;

pub use bernstein::{BernsteinFunction, Coord, LevyMeasure, LevyTriple, Moment, SubordinationLaw};
pub use calculus::{apply, CalculusResult};
pub use error::{Error, Result};
pub use operators::{GeneratorTuple, IdealNorm, MatrixOp};
pub use quadrature::QuadratureSpec;
pub use verify::BoundReport;

/// Library version written into campaign headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
