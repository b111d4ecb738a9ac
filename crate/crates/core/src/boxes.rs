//! Bipartite probability points `P(a,b|x,y)` ("boxes") and the CHSH game.
//!
//! A [`BoxPoint`] stores a dense table in row-major `(x, y, a, b)` order. The
//! constructors here always produce valid no-signaling points; arbitrary
//! tables can be loaded with [`BoxPoint::from_table`] and inspected with
//! [`BoxPoint::validate`], which reports every failed property instead of
//! stopping at the first.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoxError {
    #[error("alphabet sizes must all be at least 1, got {0:?}")]
    InvalidScenario([usize; 4]),
    #[error("table has {found} entries, scenario needs {expected}")]
    TableLength { expected: usize, found: usize },
    #[error("bias {0} is outside [-1, 1]")]
    BiasOutOfRange(String),
    #[error("{party} strategy has {found} entries for {expected} inputs")]
    StrategyLength {
        party: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{party} strategy maps input {input} to {output}, alphabet has {alphabet} outputs")]
    OutputOutOfRange {
        party: &'static str,
        input: usize,
        output: usize,
        alphabet: usize,
    },
    #[error("mixture needs at least one component")]
    EmptyMixture,
    #[error("{points} points but {weights} weights")]
    WeightCount { points: usize, weights: usize },
    #[error("weight {0} is negative")]
    NegativeWeight(String),
    #[error("weights sum to {0}, expected exactly 1")]
    WeightSum(String),
    #[error("scenario mismatch: {0} vs {1}")]
    ScenarioMismatch(Scenario, Scenario),
    #[error("operation needs the CHSH scenario (2,2,2,2), got {0}")]
    NotChsh(Scenario),
    #[error("box fails validation: {0}")]
    Invalid(String),
}

/// Alphabet sizes `(|X|, |Y|, |A|, |B|)` of a bipartite box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "[usize; 4]", try_from = "[usize; 4]")]
pub struct Scenario {
    inputs_a: usize,
    inputs_b: usize,
    outputs_a: usize,
    outputs_b: usize,
}

impl Scenario {
    pub const CHSH: Scenario = Scenario {
        inputs_a: 2,
        inputs_b: 2,
        outputs_a: 2,
        outputs_b: 2,
    };

    pub fn new(
        inputs_a: usize,
        inputs_b: usize,
        outputs_a: usize,
        outputs_b: usize,
    ) -> Result<Self, BoxError> {
        let sizes = [inputs_a, inputs_b, outputs_a, outputs_b];
        if sizes.contains(&0) {
            return Err(BoxError::InvalidScenario(sizes));
        }
        Ok(Self {
            inputs_a,
            inputs_b,
            outputs_a,
            outputs_b,
        })
    }

    pub fn inputs_a(&self) -> usize {
        self.inputs_a
    }

    pub fn inputs_b(&self) -> usize {
        self.inputs_b
    }

    pub fn outputs_a(&self) -> usize {
        self.outputs_a
    }

    pub fn outputs_b(&self) -> usize {
        self.outputs_b
    }

    pub fn is_chsh(&self) -> bool {
        *self == Self::CHSH
    }

    pub fn table_len(&self) -> usize {
        self.inputs_a * self.inputs_b * self.outputs_a * self.outputs_b
    }

    /// Row-major position of `P(a,b|x,y)`.
    pub fn index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        debug_assert!(x < self.inputs_a && y < self.inputs_b);
        debug_assert!(a < self.outputs_a && b < self.outputs_b);
        ((x * self.inputs_b + y) * self.outputs_a + a) * self.outputs_b + b
    }

    /// Inverse of [`Scenario::index`].
    pub fn entry(&self, index: usize) -> EntryIndex {
        let b = index % self.outputs_b;
        let rest = index / self.outputs_b;
        let a = rest % self.outputs_a;
        let rest = rest / self.outputs_a;
        let y = rest % self.inputs_b;
        let x = rest / self.inputs_b;
        EntryIndex { x, y, a, b }
    }

    pub fn settings(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.inputs_a).flat_map(move |x| (0..self.inputs_b).map(move |y| (x, y)))
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{})",
            self.inputs_a, self.inputs_b, self.outputs_a, self.outputs_b
        )
    }
}

impl From<Scenario> for [usize; 4] {
    fn from(s: Scenario) -> Self {
        [s.inputs_a, s.inputs_b, s.outputs_a, s.outputs_b]
    }
}

impl TryFrom<[usize; 4]> for Scenario {
    type Error = BoxError;

    fn try_from(v: [usize; 4]) -> Result<Self, Self::Error> {
        Scenario::new(v[0], v[1], v[2], v[3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntryIndex {
    pub x: usize,
    pub y: usize,
    pub a: usize,
    pub b: usize,
}

/// Where a marginal first depends on the remote input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "party", rename_all = "camelCase")]
pub enum Signaling {
    /// `Σ_b P(a,b|x,y)` differs from its value at `y = 0`.
    Alice { x: usize, a: usize, y: usize },
    /// `Σ_a P(a,b|x,y)` differs from its value at `x = 0`.
    Bob { y: usize, b: usize, x: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Check<V> {
    pub passed: bool,
    pub first_violation: Option<V>,
}

impl<V> Check<V> {
    fn from_violation(first_violation: Option<V>) -> Self {
        Self {
            passed: first_violation.is_none(),
            first_violation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Setting {
    pub x: usize,
    pub y: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub non_negativity: Check<EntryIndex>,
    pub normalization: Check<Setting>,
    pub no_signaling: Check<Signaling>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.non_negativity.passed && self.normalization.passed && self.no_signaling.passed
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
        write!(
            f,
            "non-negativity {}, normalization {}, no-signaling {}",
            mark(self.non_negativity.passed),
            mark(self.normalization.passed),
            mark(self.no_signaling.passed)
        )?;
        if let Some(e) = self.non_negativity.first_violation {
            write!(f, "; negative P({},{}|{},{})", e.a, e.b, e.x, e.y)?;
        }
        if let Some(s) = self.normalization.first_violation {
            write!(f, "; setting ({},{}) not normalized", s.x, s.y)?;
        }
        if let Some(s) = self.no_signaling.first_violation {
            write!(f, "; signaling at {s:?}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChshTier {
    Classical,
    QuantumCompatible,
    Superquantum,
}

impl fmt::Display for ChshTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChshTier::Classical => "classical",
            ChshTier::QuantumCompatible => "quantum-compatible",
            ChshTier::Superquantum => "superquantum",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChshClassification<T> {
    pub value: T,
    pub tier: ChshTier,
}

impl<T: Scalar> ChshClassification<T> {
    /// `E = 2·value − 1`.
    pub fn bias(&self) -> T {
        crate::scalar::bias_of(&self.value)
    }
}

/// Classical CHSH winning probability `p_C = 3/4`.
pub fn classical_bound<T: Scalar>() -> T {
    T::from_ratio(3, 4)
}

/// `v ≤ (2+√2)/4`, decided as `4v − 2 ≤ 0 ∨ (4v − 2)² ≤ 2` so no irrational
/// threshold is ever rounded.
pub fn within_tsirelson<T: Scalar>(value: &T) -> bool {
    let d = T::from_usize(4) * value.clone() - T::from_usize(2);
    !d.is_positive() || d.clone() * d <= T::from_usize(2) + T::tolerance()
}

/// Tier of a CHSH value; boundary values land in the lower tier.
pub fn chsh_tier<T: Scalar>(value: &T) -> ChshTier {
    if *value <= classical_bound::<T>() + T::tolerance() {
        ChshTier::Classical
    } else if within_tsirelson(value) {
        ChshTier::QuantumCompatible
    } else {
        ChshTier::Superquantum
    }
}

/// A probability point `{P(a,b|x,y)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxPoint<T> {
    scenario: Scenario,
    table: Vec<T>,
}

impl<T: Scalar> BoxPoint<T> {
    /// Wraps a raw table without checking probabilities; use
    /// [`BoxPoint::validate`] or [`BoxPoint::validated`] afterwards.
    pub fn from_table(scenario: Scenario, table: Vec<T>) -> Result<Self, BoxError> {
        if table.len() != scenario.table_len() {
            return Err(BoxError::TableLength {
                expected: scenario.table_len(),
                found: table.len(),
            });
        }
        Ok(Self { scenario, table })
    }

    /// Builds the table entry by entry.
    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let table = (0..scenario.table_len())
            .map(|i| {
                let e = scenario.entry(i);
                f(e.x, e.y, e.a, e.b)
            })
            .collect();
        Self { scenario, table }
    }

    /// The PR box: `P(a,b|x,y) = 1/2` when `a ⊕ b = x·y`.
    pub fn pr_box() -> Self {
        Self::from_fn(Scenario::CHSH, |x, y, a, b| {
            if (a ^ b) == (x & y) {
                T::from_ratio(1, 2)
            } else {
                T::zero()
            }
        })
    }

    /// Uniform outputs for every setting.
    pub fn white_noise(scenario: Scenario) -> Self {
        let weight = T::from_ratio(1, (scenario.outputs_a * scenario.outputs_b) as i64);
        Self::from_fn(scenario, |_, _, _, _| weight.clone())
    }

    /// `P(a,b|x,y) = (1 + (−1)^{a⊕b⊕xy}·E) / 4`, i.e. `E·PR + (1−E)·noise`.
    pub fn isotropic(bias: T) -> Result<Self, BoxError> {
        if bias > T::one() || bias < -T::one() {
            return Err(BoxError::BiasOutOfRange(bias.to_text()));
        }
        let four = T::from_usize(4);
        Ok(Self::from_fn(Scenario::CHSH, |x, y, a, b| {
            if (a ^ b) == (x & y) {
                (T::one() + bias.clone()) / four.clone()
            } else {
                (T::one() - bias.clone()) / four.clone()
            }
        }))
    }

    /// `P(a,b|x,y) = δ_{a=f(x)} δ_{b=g(y)}`.
    pub fn local_deterministic(
        scenario: Scenario,
        alice: &[usize],
        bob: &[usize],
    ) -> Result<Self, BoxError> {
        check_strategy("Alice", alice, scenario.inputs_a, scenario.outputs_a)?;
        check_strategy("Bob", bob, scenario.inputs_b, scenario.outputs_b)?;
        Ok(Self::from_fn(scenario, |x, y, a, b| {
            if alice[x] == a && bob[y] == b {
                T::one()
            } else {
                T::zero()
            }
        }))
    }

    /// Convex combination `Σ wᵢ·Bᵢ`; weights must be non-negative and sum to 1.
    pub fn mix(points: &[BoxPoint<T>], weights: &[T]) -> Result<Self, BoxError> {
        let first = points.first().ok_or(BoxError::EmptyMixture)?;
        if points.len() != weights.len() {
            return Err(BoxError::WeightCount {
                points: points.len(),
                weights: weights.len(),
            });
        }
        let mut total = T::zero();
        for w in weights {
            if *w < -T::tolerance() {
                return Err(BoxError::NegativeWeight(w.to_text()));
            }
            total = total + w.clone();
        }
        if (total.clone() - T::one()).abs() > T::tolerance() {
            return Err(BoxError::WeightSum(total.to_text()));
        }
        let mut table = vec![T::zero(); first.table.len()];
        for (point, w) in points.iter().zip(weights) {
            if point.scenario != first.scenario {
                return Err(BoxError::ScenarioMismatch(first.scenario, point.scenario));
            }
            for (acc, p) in table.iter_mut().zip(&point.table) {
                *acc = acc.clone() + w.clone() * p.clone();
            }
        }
        Ok(Self {
            scenario: first.scenario,
            table,
        })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    pub fn into_table(self) -> Vec<T> {
        self.table
    }

    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> &T {
        &self.table[self.scenario.index(x, y, a, b)]
    }

    /// `Σ_b P(a,b|x,y)`.
    pub fn marginal_a(&self, x: usize, y: usize, a: usize) -> T {
        (0..self.scenario.outputs_b).fold(T::zero(), |acc, b| acc + self.get(x, y, a, b).clone())
    }

    /// `Σ_a P(a,b|x,y)`.
    pub fn marginal_b(&self, x: usize, y: usize, b: usize) -> T {
        (0..self.scenario.outputs_a).fold(T::zero(), |acc, a| acc + self.get(x, y, a, b).clone())
    }

    pub fn validate(&self) -> ValidationReport {
        let s = &self.scenario;
        let tol = T::tolerance();

        let negative = self
            .table
            .iter()
            .position(|p| *p < -tol.clone())
            .map(|i| s.entry(i));

        let unnormalized = s
            .settings()
            .find(|&(x, y)| {
                let total = (0..s.outputs_a)
                    .flat_map(|a| (0..s.outputs_b).map(move |b| (a, b)))
                    .fold(T::zero(), |acc, (a, b)| acc + self.get(x, y, a, b).clone());
                (total - T::one()).abs() > tol
            })
            .map(|(x, y)| Setting { x, y });

        ValidationReport {
            non_negativity: Check::from_violation(negative),
            normalization: Check::from_violation(unnormalized),
            no_signaling: Check::from_violation(self.first_signaling()),
        }
    }

    fn first_signaling(&self) -> Option<Signaling> {
        let s = &self.scenario;
        let tol = T::tolerance();
        for x in 0..s.inputs_a {
            for a in 0..s.outputs_a {
                let reference = self.marginal_a(x, 0, a);
                for y in 1..s.inputs_b {
                    if (self.marginal_a(x, y, a) - reference.clone()).abs() > tol {
                        return Some(Signaling::Alice { x, a, y });
                    }
                }
            }
        }
        for y in 0..s.inputs_b {
            for b in 0..s.outputs_b {
                let reference = self.marginal_b(0, y, b);
                for x in 1..s.inputs_a {
                    if (self.marginal_b(x, y, b) - reference.clone()).abs() > tol {
                        return Some(Signaling::Bob { y, b, x });
                    }
                }
            }
        }
        None
    }

    /// Returns `self` if every validation check passes.
    pub fn validated(self) -> Result<Self, BoxError> {
        let report = self.validate();
        if report.all_pass() {
            Ok(self)
        } else {
            Err(BoxError::Invalid(report.to_string()))
        }
    }

    pub fn require_chsh(&self) -> Result<(), BoxError> {
        if self.scenario.is_chsh() {
            Ok(())
        } else {
            Err(BoxError::NotChsh(self.scenario))
        }
    }

    /// `P(a ⊕ b = x·y | x, y)` for one CHSH setting.
    pub fn chsh_win_probability(&self, x: usize, y: usize) -> T {
        let target = x & y;
        (0..2).fold(T::zero(), |acc, a| acc + self.get(x, y, a, a ^ target).clone())
    }

    /// `(1/4) Σ_{x,y} P(a⊕b = xy | x,y)`.
    pub fn chsh_value(&self) -> Result<T, BoxError> {
        self.require_chsh()?;
        let total = self
            .scenario
            .settings()
            .fold(T::zero(), |acc, (x, y)| acc + self.chsh_win_probability(x, y));
        Ok(total / T::from_usize(4))
    }

    pub fn classify_chsh(&self) -> Result<ChshClassification<T>, BoxError> {
        self.require_chsh()?;
        let report = self.validate();
        if !report.all_pass() {
            return Err(BoxError::Invalid(report.to_string()));
        }
        let value = self.chsh_value()?;
        let tier = chsh_tier(&value);
        Ok(ChshClassification { value, tier })
    }

    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> BoxPoint<U> {
        BoxPoint {
            scenario: self.scenario,
            table: self.table.iter().map(f).collect(),
        }
    }
}

fn check_strategy(
    party: &'static str,
    strategy: &[usize],
    inputs: usize,
    outputs: usize,
) -> Result<(), BoxError> {
    if strategy.len() != inputs {
        return Err(BoxError::StrategyLength {
            party,
            expected: inputs,
            found: strategy.len(),
        });
    }
    if let Some((input, &output)) = strategy.iter().enumerate().find(|(_, &o)| o >= outputs) {
        return Err(BoxError::OutputOutOfRange {
            party,
            input,
            output,
            alphabet: outputs,
        });
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct BoxWire {
    scenario: Scenario,
    table: Vec<String>,
}

impl<T: Scalar> Serialize for BoxPoint<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        BoxWire {
            scenario: self.scenario,
            table: self.table.iter().map(Scalar::to_text).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for BoxPoint<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = BoxWire::deserialize(deserializer)?;
        let table = wire
            .table
            .iter()
            .map(|t| T::parse_text(t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        BoxPoint::from_table(wire.scenario, table).map_err(D::Error::custom)
    }
}
