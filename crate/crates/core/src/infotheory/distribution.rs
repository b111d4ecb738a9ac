use std::collections::HashSet;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::InfoError;

/// Entries smaller than this are treated as exact zeros in entropy sums.
pub const ZERO_CUTOFF: f64 = 1e-15;

/// Allowed deviation of the total probability from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub size: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        Self {
            name: name.into(),
            size,
        }
    }
}

/// Joint distribution over named finite variables, stored row-major with the
/// last variable varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionWire<F>", into = "DistributionWire<F>")]
#[serde(bound(
    serialize = "F: Float + Serialize + Clone",
    deserialize = "F: Float + Deserialize<'de>"
))]
pub struct JointDistribution<F> {
    vars: Vec<Variable>,
    probs: Vec<F>,
}

#[derive(Serialize, Deserialize)]
struct DistributionWire<F> {
    vars: Vec<Variable>,
    probs: Vec<F>,
}

impl<F: Float> TryFrom<DistributionWire<F>> for JointDistribution<F> {
    type Error = InfoError;

    fn try_from(wire: DistributionWire<F>) -> Result<Self, Self::Error> {
        JointDistribution::new(wire.vars, wire.probs)
    }
}

impl<F> From<JointDistribution<F>> for DistributionWire<F> {
    fn from(d: JointDistribution<F>) -> Self {
        Self {
            vars: d.vars,
            probs: d.probs,
        }
    }
}

fn cast<F: Float>(value: f64) -> F {
    F::from(value).expect("float conversion")
}

fn normalization_tolerance<F: Float>(len: usize) -> F {
    let floor = cast::<F>(NORMALIZATION_TOLERANCE);
    let rounding = F::epsilon() * cast::<F>(4.0 * len.max(1) as f64);
    floor.max(rounding)
}

impl<F: Float> JointDistribution<F> {
    pub fn new(vars: Vec<Variable>, probs: Vec<F>) -> Result<Self, InfoError> {
        let mut seen = HashSet::new();
        for v in &vars {
            if v.size == 0 {
                return Err(InfoError::EmptyAlphabet(v.name.clone()));
            }
            if !seen.insert(v.name.as_str()) {
                return Err(InfoError::DuplicateVariable(v.name.clone()));
            }
        }
        let expected = vars.iter().map(|v| v.size).product::<usize>();
        if probs.len() != expected {
            return Err(InfoError::TableLength {
                expected,
                found: probs.len(),
            });
        }
        if let Some((index, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < F::zero())
        {
            return Err(InfoError::NegativeProbability {
                index,
                value: p.to_f64().unwrap_or(f64::NAN),
            });
        }
        let total = probs.iter().fold(F::zero(), |acc, &p| acc + p);
        if (total - F::one()).abs() > normalization_tolerance(probs.len()) {
            return Err(InfoError::NotNormalized {
                sum: total.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { vars, probs })
    }

    /// Builds the table from a function of the per-variable outcomes.
    pub fn from_fn(
        vars: Vec<Variable>,
        mut f: impl FnMut(&[usize]) -> F,
    ) -> Result<Self, InfoError> {
        let sizes: Vec<usize> = vars.iter().map(|v| v.size).collect();
        let len = sizes.iter().product::<usize>();
        let mut outcome = vec![0; sizes.len()];
        let mut probs = Vec::with_capacity(len);
        for _ in 0..len {
            probs.push(f(&outcome));
            for (slot, &size) in outcome.iter_mut().zip(&sizes).rev() {
                *slot += 1;
                if *slot < size {
                    break;
                }
                *slot = 0;
            }
        }
        Self::new(vars, probs)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn probs(&self) -> &[F] {
        &self.probs
    }

    pub fn position(&self, name: &str) -> Result<usize, InfoError> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| InfoError::UnknownVariable(name.to_owned()))
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.vars[i + 1].size;
        }
        strides
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>, InfoError> {
        let mut out: Vec<usize> = Vec::with_capacity(names.len());
        for name in names {
            let p = self.position(name)?;
            if !out.contains(&p) {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// Distribution of `names` (duplicates ignored), in the given order.
    pub fn marginal(&self, names: &[&str]) -> Result<Self, InfoError> {
        let keep = self.positions(names)?;
        Ok(self.marginal_by_position(&keep))
    }

    fn marginal_by_position(&self, keep: &[usize]) -> Self {
        let strides = self.strides();
        let vars: Vec<Variable> = keep.iter().map(|&i| self.vars[i].clone()).collect();
        let mut out_strides = vec![1; keep.len()];
        for i in (0..keep.len().saturating_sub(1)).rev() {
            out_strides[i] = out_strides[i + 1] * vars[i + 1].size;
        }
        let len = vars.iter().map(|v| v.size).product::<usize>();
        let mut probs = vec![F::zero(); len];
        for (flat, &p) in self.probs.iter().enumerate() {
            let target = keep
                .iter()
                .zip(&out_strides)
                .map(|(&i, &s)| (flat / strides[i]) % self.vars[i].size * s)
                .sum::<usize>();
            probs[target] = probs[target] + p;
        }
        Self { vars, probs }
    }

    /// Shannon entropy of the listed variables, in bits; `H(∅) = 0`.
    pub fn entropy(&self, names: &[&str]) -> Result<F, InfoError> {
        let keep = self.positions(names)?;
        if keep.is_empty() {
            return Ok(F::zero());
        }
        Ok(shannon_bits(self.marginal_by_position(&keep).probs.iter().copied()))
    }

    /// `H(target | given) = H(target, given) − H(given)`.
    pub fn conditional_entropy(&self, target: &[&str], given: &[&str]) -> Result<F, InfoError> {
        let joint: Vec<&str> = target.iter().chain(given).copied().collect();
        Ok(self.entropy(&joint)? - self.entropy(given)?)
    }

    /// `I(A : B) = H(A) + H(B) − H(A, B)`.
    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<F, InfoError> {
        let joint: Vec<&str> = a.iter().chain(b).copied().collect();
        Ok(self.entropy(a)? + self.entropy(b)? - self.entropy(&joint)?)
    }

    /// `I(A : B | C) = H(A,C) + H(B,C) − H(A,B,C) − H(C)`.
    pub fn conditional_mutual_information(
        &self,
        a: &[&str],
        b: &[&str],
        given: &[&str],
    ) -> Result<F, InfoError> {
        let ac: Vec<&str> = a.iter().chain(given).copied().collect();
        let bc: Vec<&str> = b.iter().chain(given).copied().collect();
        let abc: Vec<&str> = a.iter().chain(b).chain(given).copied().collect();
        Ok(self.entropy(&ac)? + self.entropy(&bc)? - self.entropy(&abc)? - self.entropy(given)?)
    }

    /// Sends `target` through a stochastic matrix; `channel[i][j]` is the
    /// probability of output `j` given input `i`. The output alphabet size is
    /// the row length and the variable keeps its name.
    pub fn apply_local_channel(&self, target: &str, channel: &[Vec<F>]) -> Result<Self, InfoError> {
        let pos = self.position(target)?;
        let input_size = self.vars[pos].size;
        if channel.len() != input_size {
            return Err(InfoError::Channel(format!(
                "{} rows for an alphabet of {}",
                channel.len(),
                input_size
            )));
        }
        let output_size = channel[0].len();
        if output_size == 0 {
            return Err(InfoError::Channel("empty output alphabet".into()));
        }
        let tol = cast::<F>(1e-9);
        for (i, row) in channel.iter().enumerate() {
            if row.len() != output_size {
                return Err(InfoError::Channel(format!("row {i} is ragged")));
            }
            if row.iter().any(|p| !p.is_finite() || *p < F::zero()) {
                return Err(InfoError::Channel(format!("row {i} has a negative entry")));
            }
            let total = row.iter().fold(F::zero(), |acc, &p| acc + p);
            if (total - F::one()).abs() > tol {
                return Err(InfoError::Channel(format!("row {i} sums to {:?}", total.to_f64())));
            }
        }

        let mut vars = self.vars.clone();
        vars[pos].size = output_size;
        let strides = self.strides();
        let outer = strides[pos] * input_size;
        let inner = strides[pos];
        let mut probs = vec![F::zero(); self.probs.len() / input_size * output_size];
        for (flat, &p) in self.probs.iter().enumerate() {
            if p == F::zero() {
                continue;
            }
            let block = flat / outer;
            let symbol = (flat / inner) % input_size;
            let rest = flat % inner;
            for (out, &w) in channel[symbol].iter().enumerate() {
                let target = (block * output_size + out) * inner + rest;
                probs[target] = probs[target] + p * w;
            }
        }
        Ok(Self { vars, probs })
    }
}

/// `−Σ p log₂ p` with `0·log 0 = 0`.
pub fn shannon_bits<F: Float>(probs: impl IntoIterator<Item = F>) -> F {
    let cutoff = cast::<F>(ZERO_CUTOFF);
    let h = probs
        .into_iter()
        .filter(|&p| p > cutoff)
        .fold(F::zero(), |acc, p| acc - p * p.log2());
    h.max(F::zero())
}
