//! Shannon entropies of finite classical distributions, the information
//! causality functional, and executable checks of the inequalities behind it.
//!
//! Everything here works in floating point (`f32` or `f64`); exact rationals
//! from the box code are converted on entry.

mod distribution;
pub mod ic;
pub mod proof;
pub mod strategy;

use thiserror::Error;

pub use distribution::{
    shannon_bits, JointDistribution, Variable, NORMALIZATION_TOLERANCE, ZERO_CUTOFF,
};
pub use ic::{
    bias_capacity, binary_entropy, ic_sum, quadratic_bound, quadratic_bound_counted,
    tsirelson_threshold, violated_up_to, IcEvaluation, QuadraticBound, ThresholdEstimate,
};
pub use proof::{
    check_ic_proof_chain, IcProofQuery, IcProofReport, InequalityCheck, ProofWeights, Relation,
};
pub use strategy::ClassicalStrategy;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InfoError {
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("variable {0:?} appears twice")]
    DuplicateVariable(String),
    #[error("variable {0:?} has an empty alphabet")]
    EmptyAlphabet(String),
    #[error("table has {found} entries, variables need {expected}")]
    TableLength { expected: usize, found: usize },
    #[error("entry {index} is {value}, probabilities must be finite and non-negative")]
    NegativeProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}")]
    NotNormalized { sum: f64 },
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("bias {0} is out of range")]
    BiasOutOfRange(f64),
    #[error("depth {depth} is below the minimum {min}")]
    DepthOutOfRange { depth: u32, min: u32 },
    #[error("malformed channel: {0}")]
    Channel(String),
    #[error("inputs are not independent (total correlation {total_correlation} bits)")]
    DependentInputs { total_correlation: f64 },
    #[error("{found} {what} for {expected} inputs")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("weights must be non-negative")]
    NegativeWeight,
}
