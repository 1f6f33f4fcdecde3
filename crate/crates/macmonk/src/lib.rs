//! Exact nonsymmetric Macdonald polynomials and Monk expansion rules in
//! type GL(n).
//!
//! The crate constructs the monic nonsymmetric Macdonald polynomials E_mu
//! over the exact coefficient field Q(q, t^(1/2)) by applying Hecke-algebra
//! intertwiners box by box, and expands the products
//!
//! * `x_j * E_mu` and `(x_1 + ... + x_j) * E_mu`,
//! * `x_j^(-1) * E_mu` and `(x_j^(-1) + ... + x_n^(-1)) * E_mu`,
//! * `E_(e_j) * E_mu` and `E_(-e_j) * E_mu`,
//!
//! back into the E basis with closed-form coefficients indexed by subsets of
//! `{1, ..., n}`. Each expansion also exists in operator form, as a sum of
//! Hecke-word operators with rational-in-Y prefactors, and in specialized
//! form at q = 0, t = 0, and q = t = 0. An independent linear-algebra oracle
//! re-expands arbitrary polynomials in the E basis to verify every rule.
//!
//! Modules, bottom up:
//!
//! * [`scalar`]: exact fractions in Q(q, s) with t = s^2.
//! * [`laurent`]: Laurent polynomials in x_1..x_n over those scalars.
//! * [`hecke`]: Demazure-Lusztig operators T_i, the rotation operators,
//!   Cherednik operators Y_i, and multiplication operators X_j as words.
//! * [`macdonald`]: the E_mu cache built via intertwiners, eigenvalues,
//!   closed forms for E_(e_i) and E_(-e_i).
//! * [`monk`]: subset combinatorics, weights, coefficient families, the six
//!   expansion rules, their operator forms, and the convention resolver.
//! * [`specialize`]: the specialized expansion rules and their direct
//!   combinatorial descriptions.
//! * [`oracle`]: expansion of arbitrary Laurent polynomials in the E basis
//!   with self-checks, rule verification, and parallel sweeps.
//! * [`cli`]: the command-line interface used by the thin binary.

pub mod cli;
pub mod hecke;
pub mod laurent;
pub mod macdonald;
pub mod monk;
pub mod oracle;
pub mod scalar;
pub mod specialize;

use thiserror::Error as ThisError;

/// Crate-wide error type.
#[derive(Debug, ThisError)]
pub enum Error {
    /// Division of a scalar by zero, or inversion of zero.
    #[error("division by zero")]
    DivisionByZero,

    /// A polynomial division that must be exact left a remainder.
    #[error("non-exact polynomial division: {0}")]
    NonExactDivision(String),

    /// A substitution sent a denominator to zero.
    #[error("vanishing denominator under specialization: {0}")]
    VanishingDenominator(String),

    /// Malformed text input (scalar grammar, composition, CLI argument).
    #[error("parse error: {0}")]
    Parse(String),

    /// Invalid argument to a library function.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The E-basis expansion oracle failed one of its internal checks.
    #[error("oracle failure: {0}")]
    Oracle(String),

    /// A verification run found a mismatch between two routes.
    #[error("verification failed: {0}")]
    Verification(String),

    /// A persisted cache file was malformed or inconsistent.
    #[error("cache error: {0}")]
    Cache(String),

    /// The convention resolver could not isolate a unique consistent choice.
    #[error("convention resolution failed: {0}")]
    Conventions(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
