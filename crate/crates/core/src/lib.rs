//! Classical and single-qubit protocols for two multi-party communication
//! complexity problems.
//!
//! - [`task`]: the modulo-4 sum (A) and cosine-sign (B) tasks and their
//!   input decomposition.
//! - [`sampler`]: seeded input generation and task A enumeration.
//! - [`classical`]: one-bit-per-party protocols, exact and Monte Carlo
//!   fidelities, exhaustive certification, coordinate ascent.
//! - [`quantum`]: the sequential phase-encoding protocols.
//! - [`experiment`]: heralded-photon experiment model.
//! - [`stats`]: binomial estimates, significance, block histograms.
//! - [`reproduce`], [`report`], [`cli`]: end-to-end checks and output.

pub mod classical;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod quantum;
pub mod report;
pub mod reproduce;
pub mod sampler;
pub mod stats;
pub mod task;
pub mod verify;

pub use error::{Error, Result};
pub use task::{InputTuple, InputTupleA, InputTupleB, Sign, TaskId};
