//! Oblivious transfer and the concatenated random access code over
//! no-signaling boxes, exact and sampled.

mod exact;
mod sampling;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use exact::{
    path_bias, rac_exact, rac_exact_enumerated, ExactMethod, ExactRac, ENUMERATION_DEPTH_CAP,
    EXACT_DEPTH_CAP,
};
pub use sampling::{
    alice_phase, bob_phase, ot_success_probability, rac_monte_carlo,
    rac_monte_carlo_with_transcript, run_ot, trial_rng, AliceRecord, BitTally, PairSampler,
    TrialRecord, MONTE_CARLO_DEPTH_CAP,
};
pub use tree::{ConcatenationTree, PairInputs, PathStep, STRUCTURE_DEPTH_CAP};

use crate::boxes::{BoxError, BoxPoint};
use crate::infotheory::InfoError;
use crate::scalar::{bias_of, ExactScalar, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("depth {depth} is outside 1..={max}")]
    DepthOutOfRange { depth: u32, max: u32 },
    #[error("depth {depth} needs {expected} boxes, got {found}")]
    PairCount {
        depth: u32,
        expected: usize,
        found: usize,
    },
    #[error("box for pair {pair} is invalid: {reason}")]
    InvalidBox { pair: usize, reason: String },
    #[error("exact evaluation for these boxes is limited to depth {cap}, got {depth}")]
    ExactUnavailable { depth: u32, cap: u32 },
    #[error("Monte Carlo needs at least one trial")]
    NoTrials,
    #[error("{name} must be 0 or 1, got {value}")]
    NotABit { name: &'static str, value: u8 },
    #[error(transparent)]
    Info(#[from] InfoError),
}

pub(crate) fn check_box<T: Scalar>(pair: usize, b: &BoxPoint<T>) -> Result<(), ProtocolError> {
    let invalid = |reason: String| ProtocolError::InvalidBox { pair, reason };
    b.require_chsh().map_err(|e: BoxError| invalid(e.to_string()))?;
    let report = b.validate();
    if !report.all_pass() {
        return Err(invalid(report.to_string()));
    }
    Ok(())
}

/// Boxes used by the pairs of the tree.
#[derive(Debug, Clone, PartialEq)]
pub enum RacBoxes<T> {
    Uniform(BoxPoint<T>),
    /// One box per pair, in heap order (root first).
    PerPair(Vec<BoxPoint<T>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RacConfig<T> {
    pub depth: u32,
    pub boxes: RacBoxes<T>,
    /// Sampled trials per bit index; 0 means exact only.
    pub trials: u64,
    pub seed: u64,
}

impl<T: Scalar> RacConfig<T> {
    pub fn uniform(depth: u32, pair: BoxPoint<T>, trials: u64, seed: u64) -> Self {
        Self {
            depth,
            boxes: RacBoxes::Uniform(pair),
            trials,
            seed,
        }
    }

    pub fn per_pair(depth: u32, pairs: Vec<BoxPoint<T>>, trials: u64, seed: u64) -> Self {
        Self {
            depth,
            boxes: RacBoxes::PerPair(pairs),
            trials,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let tree = ConcatenationTree::new(self.depth)?;
        match &self.boxes {
            RacBoxes::Uniform(b) => check_box(0, b),
            RacBoxes::PerPair(pairs) => {
                if pairs.len() != tree.pair_count() {
                    return Err(ProtocolError::PairCount {
                        depth: self.depth,
                        expected: tree.pair_count(),
                        found: pairs.len(),
                    });
                }
                pairs.iter().enumerate().try_for_each(|(u, b)| check_box(u, b))
            }
        }
    }

    pub fn box_at(&self, node: usize) -> &BoxPoint<T> {
        match &self.boxes {
            RacBoxes::Uniform(b) => b,
            RacBoxes::PerPair(pairs) => &pairs[node],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BitResult<T> {
    pub k: usize,
    pub exact: Option<T>,
    pub exact_bias: Option<T>,
    pub empirical: Option<BitTally>,
}

/// Combined exact and sampled outcome of a concatenated RAC run. Exact fields
/// are absent when the boxes only allow sampling at this depth; empirical
/// fields are absent when no trials were requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "RacResultWire", try_from = "RacResultWire")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct RacResult<T> {
    pub n: u32,
    pub trials: u64,
    pub seed: u64,
    pub per_bit: Vec<BitResult<T>>,
    pub ic_sum: Option<f64>,
    pub violated: Option<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct BitWire {
    k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exact: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exact_bias: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    successes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    std_err: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RacResultWire {
    n: u32,
    trials: u64,
    seed: u64,
    per_bit: Vec<BitWire>,
    ic_sum: Option<f64>,
    violated: Option<bool>,
}

impl<T: Scalar> From<RacResult<T>> for RacResultWire {
    fn from(r: RacResult<T>) -> Self {
        Self {
            n: r.n,
            trials: r.trials,
            seed: r.seed,
            per_bit: r
                .per_bit
                .into_iter()
                .map(|b| BitWire {
                    k: b.k,
                    exact: b.exact.map(|v| v.to_text()),
                    exact_bias: b.exact_bias.map(|v| v.to_text()),
                    successes: b.empirical.map(|t| t.successes),
                    trials: b.empirical.map(|t| t.trials),
                    std_err: b.empirical.map(|t| t.std_err()),
                })
                .collect(),
            ic_sum: r.ic_sum,
            violated: r.violated,
        }
    }
}

impl<T: Scalar> TryFrom<RacResultWire> for RacResult<T> {
    type Error = String;

    fn try_from(w: RacResultWire) -> Result<Self, Self::Error> {
        let parse = |v: Option<String>| v.map(|s| T::parse_text(&s)).transpose();
        let per_bit = w
            .per_bit
            .into_iter()
            .map(|b| {
                let empirical = match (b.successes, b.trials) {
                    (Some(successes), Some(trials)) => Some(BitTally {
                        k: b.k,
                        successes,
                        trials,
                    }),
                    (None, None) => None,
                    _ => return Err(format!("bit {} has a partial tally", b.k)),
                };
                Ok(BitResult {
                    k: b.k,
                    exact: parse(b.exact).map_err(|e| e.to_string())?,
                    exact_bias: parse(b.exact_bias).map_err(|e| e.to_string())?,
                    empirical,
                })
            })
            .collect::<Result<_, String>>()?;
        Ok(Self {
            n: w.n,
            trials: w.trials,
            seed: w.seed,
            per_bit,
            ic_sum: w.ic_sum,
            violated: w.violated,
        })
    }
}

/// Exact evaluation where available plus `cfg.trials` samples per bit.
pub fn run_rac<T: ExactScalar>(cfg: &RacConfig<T>) -> Result<RacResult<T>, ProtocolError> {
    Ok(run(cfg, false)?.0)
}

/// [`run_rac`] plus the per-trial transcript (empty when `trials == 0`).
pub fn run_rac_with_transcript<T: ExactScalar>(
    cfg: &RacConfig<T>,
) -> Result<(RacResult<T>, Vec<TrialRecord>), ProtocolError> {
    run(cfg, true)
}

fn run<T: ExactScalar>(
    cfg: &RacConfig<T>,
    transcript: bool,
) -> Result<(RacResult<T>, Vec<TrialRecord>), ProtocolError> {
    let exact = match rac_exact(cfg) {
        Ok(e) => Some(e),
        Err(ProtocolError::ExactUnavailable { .. }) if cfg.trials > 0 => None,
        Err(e) => return Err(e),
    };
    let (tallies, records) = match (cfg.trials, transcript) {
        (0, _) => (None, Vec::new()),
        (_, false) => (Some(rac_monte_carlo(cfg)?), Vec::new()),
        (_, true) => {
            let (t, r) = rac_monte_carlo_with_transcript(cfg)?;
            (Some(t), r)
        }
    };
    let bits = 1usize << cfg.depth;
    let per_bit = (0..bits)
        .map(|k| {
            let exact_k = exact.as_ref().map(|e| e.success[k].clone());
            BitResult {
                k,
                exact_bias: exact_k.as_ref().map(bias_of),
                exact: exact_k,
                empirical: tallies.as_ref().map(|t| t[k]),
            }
        })
        .collect();
    let result = RacResult {
        n: cfg.depth,
        trials: cfg.trials,
        seed: cfg.seed,
        per_bit,
        ic_sum: exact.as_ref().map(|e| e.ic_sum),
        violated: exact.as_ref().map(|e| e.violated),
    };
    Ok((result, records))
}
