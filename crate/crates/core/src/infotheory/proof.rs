//! Numerical evaluation of the inequalities used to show that classical
//! resources respect information causality, on an explicit joint distribution.
//!
//! Bob's black box `e` is the classical pair (message, side information). The
//! per-bit entropic terms are written `H(x_i|β_i)` and `H(x_i|e)`; the
//! summed and weighted forms use the same `x_i`.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{InfoError, JointDistribution};

/// Slack tolerated before an inequality is reported as failing.
pub const PROOF_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `lhs ≤ rhs`
    AtMost,
    /// `lhs ≥ rhs`
    AtLeast,
    /// `lhs = rhs`
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck<F> {
    pub name: String,
    pub lhs: F,
    pub rhs: F,
    pub relation: Relation,
    /// Positive when the inequality holds with room to spare; for equalities
    /// this is `−|lhs − rhs|`.
    pub slack: F,
    pub holds: bool,
}

impl<F: Float> InequalityCheck<F> {
    fn new(name: impl Into<String>, lhs: F, relation: Relation, rhs: F) -> Self {
        let slack = match relation {
            Relation::AtMost => rhs - lhs,
            Relation::AtLeast => lhs - rhs,
            Relation::Equal => -(lhs - rhs).abs(),
        };
        let tol = F::from(PROOF_TOLERANCE).expect("float conversion");
        Self {
            name: name.into(),
            lhs,
            rhs,
            relation,
            slack,
            holds: slack >= -tol,
        }
    }
}

/// Non-negative weights for the weighted entropic form: `message` multiplies
/// the message term, `guesses[i]` the term for bit `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofWeights<F> {
    pub message: F,
    pub guesses: Vec<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcProofQuery<F> {
    /// Alice's input variables `x_i`.
    pub inputs: Vec<String>,
    /// Message variables `m̄`.
    pub message: Vec<String>,
    /// Bob's resources held before the message arrives (may be empty).
    pub side: Vec<String>,
    /// Bob's guesses `β_i`, one per input.
    pub guesses: Vec<String>,
    /// Message length `M` in bits.
    pub capacity: F,
    pub weights: Option<ProofWeights<F>>,
    /// Fail instead of skipping the superadditivity check when the inputs
    /// are not independent.
    pub require_independent_inputs: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcProofReport<F> {
    pub checks: Vec<InequalityCheck<F>>,
    /// `Σ_i H(x_i) − H(x̄)`; zero for independent inputs.
    pub input_total_correlation: F,
}

impl<F: Float> IcProofReport<F> {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn get(&self, name: &str) -> Option<&InequalityCheck<F>> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub mod names {
    pub const MESSAGE_CAPACITY: &str = "message-capacity";
    pub const CHAIN_RULE: &str = "chain-rule";
    pub const PRIOR_INFORMATION: &str = "no-prior-information";
    pub const CONDITIONAL_GAIN: &str = "conditional-gain";
    pub const SUPERADDITIVITY: &str = "independence-superadditivity";
    pub const INFORMATION_CAUSALITY: &str = "information-causality";
    pub const ENTROPIC_MESSAGE: &str = "entropic-message";
    pub const ENTROPIC_SUM: &str = "entropic-sum";
    pub const WEIGHTED: &str = "weighted";

    pub fn data_processing(i: usize) -> String {
        format!("data-processing-{i}")
    }

    pub fn entropic_guess(i: usize) -> String {
        format!("entropic-guess-{i}")
    }
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Evaluates both sides of every step of the argument on `d`.
pub fn check_ic_proof_chain<F: Float>(
    d: &JointDistribution<F>,
    query: &IcProofQuery<F>,
) -> Result<IcProofReport<F>, InfoError> {
    if query.inputs.len() != query.guesses.len() {
        return Err(InfoError::LengthMismatch {
            what: "guesses",
            expected: query.inputs.len(),
            found: query.guesses.len(),
        });
    }
    if let Some(w) = &query.weights {
        if w.guesses.len() != query.inputs.len() {
            return Err(InfoError::LengthMismatch {
                what: "weights",
                expected: query.inputs.len(),
                found: w.guesses.len(),
            });
        }
        if w.message < F::zero() || w.guesses.iter().any(|&g| g < F::zero()) {
            return Err(InfoError::NegativeWeight);
        }
    }

    let x = refs(&query.inputs);
    let m = refs(&query.message);
    let side = refs(&query.side);
    let e: Vec<&str> = m.iter().chain(&side).copied().collect();
    let tol = F::from(PROOF_TOLERANCE).expect("float conversion");
    let mut checks = Vec::new();

    let total_correlation = x
        .iter()
        .map(|xi| d.entropy(&[xi]))
        .try_fold(F::zero(), |acc, h| h.map(|h| acc + h))?
        - d.entropy(&x)?;

    let gain = d.mutual_information(&x, &e)?;
    checks.push(InequalityCheck::new(
        names::MESSAGE_CAPACITY,
        gain,
        Relation::AtMost,
        query.capacity,
    ));
    let prior = d.mutual_information(&x, &side)?;
    let conditional = d.conditional_mutual_information(&x, &m, &side)?;
    checks.push(InequalityCheck::new(
        names::CHAIN_RULE,
        gain,
        Relation::Equal,
        prior + conditional,
    ));
    checks.push(InequalityCheck::new(
        names::PRIOR_INFORMATION,
        prior,
        Relation::Equal,
        F::zero(),
    ));
    checks.push(InequalityCheck::new(
        names::CONDITIONAL_GAIN,
        conditional,
        Relation::AtMost,
        query.capacity,
    ));

    let per_bit_e = x
        .iter()
        .map(|xi| d.mutual_information(&[xi], &e))
        .collect::<Result<Vec<_>, _>>()?;
    if total_correlation <= tol {
        let sum = per_bit_e.iter().fold(F::zero(), |acc, &v| acc + v);
        checks.push(InequalityCheck::new(
            names::SUPERADDITIVITY,
            gain,
            Relation::AtLeast,
            sum,
        ));
    } else if query.require_independent_inputs {
        return Err(InfoError::DependentInputs {
            total_correlation: total_correlation.to_f64().unwrap_or(f64::NAN),
        });
    }

    let mut guess_info_sum = F::zero();
    for (i, (xi, bi)) in x.iter().zip(refs(&query.guesses)).enumerate() {
        let info = d.mutual_information(&[xi], &[bi])?;
        guess_info_sum = guess_info_sum + info;
        checks.push(InequalityCheck::new(
            names::data_processing(i),
            per_bit_e[i],
            Relation::AtLeast,
            info,
        ));
    }
    checks.push(InequalityCheck::new(
        names::INFORMATION_CAUSALITY,
        guess_info_sum,
        Relation::AtMost,
        query.capacity,
    ));

    let h_message = d.entropy(&m)?;
    checks.push(InequalityCheck::new(
        names::ENTROPIC_MESSAGE,
        h_message,
        Relation::AtLeast,
        gain,
    ));
    let mut h_given_guess = Vec::with_capacity(x.len());
    let mut h_given_e = Vec::with_capacity(x.len());
    for (i, (xi, bi)) in x.iter().zip(refs(&query.guesses)).enumerate() {
        let lhs = d.conditional_entropy(&[xi], &[bi])?;
        let rhs = d.conditional_entropy(&[xi], &e)?;
        h_given_guess.push(lhs);
        h_given_e.push(rhs);
        checks.push(InequalityCheck::new(
            names::entropic_guess(i),
            lhs,
            Relation::AtLeast,
            rhs,
        ));
    }
    let summed = h_given_guess.iter().fold(h_message, |acc, &v| acc + v);
    checks.push(InequalityCheck::new(
        names::ENTROPIC_SUM,
        summed,
        Relation::AtLeast,
        d.entropy(&x)?,
    ));

    if let Some(w) = &query.weights {
        let lhs = w
            .guesses
            .iter()
            .zip(&h_given_guess)
            .fold(w.message * h_message, |acc, (&wi, &h)| acc + wi * h);
        let rhs = w
            .guesses
            .iter()
            .zip(&h_given_e)
            .fold(w.message * gain, |acc, (&wi, &h)| acc + wi * h);
        checks.push(InequalityCheck::new(names::WEIGHTED, lhs, Relation::AtLeast, rhs));
    }

    Ok(IcProofReport {
        checks,
        input_total_correlation: total_correlation,
    })
}
