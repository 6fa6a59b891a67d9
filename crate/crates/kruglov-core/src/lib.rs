//! Computational toolkit for the Kruglov transform of discrete laws:
//! exact step-function and distribution calculus, symmetric-space norms on
//! `[0,1]`, closed-form operator-norm bounds, and exact or Monte-Carlo
//! checkers for the associated sum/rearrangement inequalities.
//!
//! Everything is finite and explicit: random variables are finite discrete
//! laws, decreasing rearrangements are step functions, and every truncation
//! is tracked as an explicit mass deficit instead of being renormalized away.

pub mod constants;
pub mod dist;
pub mod error;
pub mod exact;
pub mod harness;
pub mod kruglov;
mod numeric;
pub mod spaces;
pub mod stepfn;

pub use dist::DiscreteLaw;
pub use error::{Error, Result};
pub use harness::{CheckReport, Ensemble};
pub use kruglov::KruglovConfig;
pub use spaces::SpaceSpec;
pub use stepfn::StepFunction;
