//! Multivariable quantum signal processing over bivariate Laurent polynomials.
//!
//! The crate builds the 2×2 unitary
//! `U = e^{iφ₀σz} ∏ₖ A^{sₖ}(a) B^{1-sₖ}(b) e^{iφₖσz}` as a pair `(P, Q)` of
//! Laurent polynomials, checks the necessary conditions such pairs satisfy,
//! peels protocols back out of pairs, and searches for pairs that satisfy
//! every necessary condition yet admit no protocol.
//!
//! Modules, bottom up:
//!
//! - [`scalar`]: exact (rational) and float complex coefficient backends.
//! - [`laurent`]: sparse bivariate Laurent polynomial arithmetic.
//! - [`protocol`]: protocols, signal operators, extend and peel steps.
//! - [`conditions`]: coefficient-level condition checkers and the
//!   forced-zero deduction for the inconsistent original conditions.
//! - [`decompose`]: backtracking recovery of a protocol from a pair.
//! - [`counterexample`]: least-squares search for non-realizable pairs.
//! - [`torus`]: grid sampling of `|P|² + |Q|²` on the unit torus.
//! - [`wire`]: JSON formats shared by the CLI and the browser demo.

pub mod conditions;
pub mod counterexample;
pub mod decompose;
pub mod laurent;
pub mod protocol;
pub mod scalar;
pub mod torus;
pub mod wire;

/// Absolute tolerance for float-backend coefficient comparisons.
pub const DEFAULT_TOL: f64 = 1e-10;

pub use conditions::{check_conditions, top_proportionality, ConditionReport, Variant};
pub use counterexample::{insufficiency_pipeline, search_nonrealizable, SearchSpec};
pub use decompose::{decompose, Decomposition};
pub use laurent::{Axis, BiLaurent, DegreeBox, Exponent, Parity, Symmetry, UniLaurent};
pub use protocol::{build, PolyPair, Protocol, UnitPhase};
pub use scalar::{Backend, Coeff, Exact, Float};
