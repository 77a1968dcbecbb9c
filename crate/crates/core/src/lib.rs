//! Approximate maximin-share allocation of indivisible goods.
//!
//! [`pipeline::run`] computes an allocation in which every agent receives at
//! least `10/13` of their maximin share, using exact rational arithmetic
//! throughout. [`verify`] certifies allocations against the exact oracle in
//! [`oracle`], and [`calibration`] holds the analysis-only value transforms
//! with a harness for their share bounds.

pub mod bagfill;
pub mod calibration;
pub mod error;
pub mod gen;
pub mod instance;
pub mod matching;
pub mod oracle;
pub mod pipeline;
pub mod rational;
pub mod reduction;
pub mod verify;

pub use error::{Error, Result};
pub use instance::{Allocation, BackMap, Instance};
pub use oracle::{mms_value, MmsResult};
pub use pipeline::{run, run_full, RunConfig, RunOutput, Trace};
pub use rational::Rational;
pub use reduction::{Pattern, ReductionStep};
pub use verify::{verify_allocation, VerificationReport};
