//! Optimal type-II error exponents for distributed testing against
//! independence over a two-sensor cooperative multiple-access setup, under
//! both fixed-length and expected-length (variable-length) rate constraints,
//! plus a Monte-Carlo simulator of the variable-length random-coding scheme.
//!
//! All information quantities are in bits.
//!
//! - [`prob`]: finite probability tables and information measures.
//! - [`source`]: the hypothesis pair `P_{X1X2}·P_{Y|X2}` vs. `P_{X1X2}·P_Y`.
//! - [`solver`]: constrained maximisation of `I(U1U2;Y)` over auxiliary channels.
//! - [`sim`]: codebooks, encoders, the typicality receiver and Monte-Carlo estimates.

pub mod error;
pub mod prob;
pub mod sim;
pub mod solver;
pub mod source;

pub use error::{Error, Result};
pub use prob::{CondPmf, JointPmf, Pmf};
pub use solver::{AuxiliarySystem, ExponentResult, RatePair, SolverConfig};
pub use source::{BinaryExampleParams, SourceModel};
