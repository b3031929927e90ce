use thiserror::Error;

use crate::task::TaskId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input tuple is empty; at least one party is required")]
    NoParties,

    #[error("task A input digit {value} at party {party} is outside 0..=3")]
    DigitOutOfRange { party: usize, value: u8 },

    #[error("task A promise violated: input sum {sum} is odd")]
    OddSum { sum: u64 },

    #[error("task B input {value} at party {party} is outside [0, 2pi)")]
    AngleOutOfRange { party: usize, value: f64 },

    #[error("reduced task B input {value} at party {party} is outside [0, pi)")]
    ReducedAngleOutOfRange { party: usize, value: f64 },

    #[error("reduced task A input has odd parity")]
    OddParity,

    #[error("cosine of the input sum is {cos:e}, below the tie tolerance {tie_eps:e}")]
    CosineTie { cos: f64, tie_eps: f64 },

    #[error("input tuple is for task {found:?}, expected task {expected:?}")]
    TaskMismatch { expected: TaskId, found: TaskId },

    #[error("rejection sampler gave up after {attempts} proposals")]
    RejectionCapExceeded { attempts: u32 },

    #[error("party count {n} out of supported range {min}..={max}")]
    PartiesOutOfRange { n: usize, min: usize, max: usize },

    #[error("protocol is defined for {expected} parties but input has {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("invalid communication tree: {0}")]
    InvalidTree(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("state is not normalized: norm^2 = {norm_sqr}")]
    Unnormalized { norm_sqr: f64 },

    #[error("parameter {name} = {value} is invalid: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error(
        "conditional correctness {gamma} is not attainable for task {task:?} (range [0.5, {max}])"
    )]
    GammaUnattainable { task: TaskId, gamma: f64, max: f64 },

    #[error("no records to aggregate")]
    EmptyRecords,

    #[error("block size {block_size} exceeds the {n} available records")]
    NotEnoughRecords { n: usize, block_size: usize },

    #[error("standard error is zero; significance is undefined")]
    ZeroSigma,
}

pub type Result<T> = std::result::Result<T, Error>;
