//! Numerics for probabilistic bosonic amplifiers.
//!
//! The crate is organized around a single state representation, the truncated
//! number-basis expansion [`fock::FockVector`], and four layers built on it:
//!
//! - [`fock`] — coherent-state expansions, Poisson statistics in log space,
//!   overlaps, moments, and the circle-projection quadrature check.
//! - [`gaussian`] — closed-form output statistics, fidelities, and success
//!   bounds for the deterministic thermal-ancilla amplifier family, plus the
//!   optimal Gaussian cloning fidelity.
//! - [`usd`] — unambiguous discrimination of coherent states equally spaced
//!   on a circle: the exact eigenweight spectrum, dense/sparse asymptotics,
//!   two-state Helstrom/USD bounds, amplifier success bounds, and the
//!   reciprocal-basis amplifier map built from the discrimination POVM.
//! - [`kraus`] — the optimal phase-insensitive probabilistic amplifier as a
//!   single-diagonal-strip Kraus operator, restricted and extended variants,
//!   their closed-form success probabilities and fidelities, and the
//!   monotonicity/covariance verification suites.
//! - [`quasidist`] — Husimi-Q phase-plane grids and quadrature/number
//!   signal-to-noise diagnostics of amplifier outputs.
//!
//! All operations are pure functions of immutable inputs and are safe to run
//! concurrently.

pub mod error;
pub mod fock;
pub mod gaussian;
pub mod kraus;
pub mod quasidist;
pub mod special;
pub mod usd;

pub use error::{Error, Result};
pub use fock::{CoherentParams, FockVector};
pub use gaussian::GaussianAmpSpec;
pub use kraus::{AmplifierSpec, StripKraus};
pub use usd::SymmetricEnsemble;
