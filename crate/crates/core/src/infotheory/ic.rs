//! The information-causality functional for concatenated random access codes
//! and the bias threshold it implies.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::InfoError;

/// Below this `|t|` the functional is evaluated in log space.
pub const LOG_SPACE_CUTOFF: f64 = 1e-8;

/// Absolute bisection resolution of [`tsirelson_threshold`] (`2⁻²⁴`).
pub const THRESHOLD_RESOLUTION: f64 = 1.0 / (1u64 << 24) as f64;

const SERIES_CUTOFF: f64 = 0.1;

fn cast<F: Float>(value: f64) -> F {
    F::from(value).expect("float conversion")
}

/// `h(p) = −p log₂ p − (1−p) log₂(1−p)`.
pub fn binary_entropy<F: Float>(p: F) -> Result<F, InfoError> {
    if !(p >= F::zero() && p <= F::one()) {
        return Err(InfoError::ProbabilityOutOfRange(p.to_f64().unwrap_or(f64::NAN)));
    }
    let term = |q: F| if q > F::zero() { -q * q.log2() } else { F::zero() };
    Ok(term(p) + term(F::one() - p))
}

/// `1 − h((1+t)/2)`: information carried by a binary symmetric channel
/// with bias `t`, accurate down to the smallest representable `t`.
pub fn bias_capacity<F: Float>(t: F) -> F {
    let t = t.abs().min(F::one());
    if t == F::one() {
        return F::one();
    }
    if t < cast(SERIES_CUTOFF) {
        // Σ_k t^{2k} / (2k(2k−1) ln 2)
        let t2 = t * t;
        let mut power = t2;
        let mut sum = F::zero();
        for k in 1..=12 {
            let k = cast::<F>(f64::from(k));
            let two_k = k + k;
            sum = sum + power / (two_k * (two_k - F::one()));
            power = power * t2;
        }
        return sum / cast(LN_2);
    }
    ((F::one() + t) * t.ln_1p() + (F::one() - t) * (-t).ln_1p()) / cast(2.0 * LN_2)
}

/// Result of evaluating `Σ_{i=1}^{2ⁿ} I(x_i:β_i)` for the depth-`n`
/// concatenated code built from boxes of bias `E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
#[serde(bound(
    serialize = "F: Float + Serialize",
    deserialize = "F: Float + Deserialize<'de>"
))]
pub struct IcEvaluation<F> {
    pub n: u32,
    #[serde(rename = "E")]
    pub bias: F,
    /// `I(x_i:β_i) = 1 − h((1+Eⁿ)/2)` for every bit.
    pub per_term_info: F,
    pub sum: F,
    /// Message length `M` in bits.
    #[serde(rename = "M")]
    pub bound: F,
    /// `log₂` of `sum`; stays finite when `sum` under- or overflows.
    #[serde(with = "float_or_null")]
    pub log_sum2: F,
    pub violated: bool,
}

/// `log₂(1 − h((1+t)/2))` given `log₂ |t|`.
fn log2_capacity_from_log2_bias(log2_t: f64) -> f64 {
    if log2_t == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if log2_t < LOG_SPACE_CUTOFF.log2() {
        let t2 = (2.0 * log2_t).exp2();
        2.0 * log2_t - (2.0 * LN_2).log2() + (t2 / 6.0 + t2 * t2 / 15.0).ln_1p() / LN_2
    } else {
        bias_capacity(log2_t.exp2()).log2()
    }
}

fn log2_ic_sum(n: u32, bias: f64) -> f64 {
    let log2_t = f64::from(n) * bias.abs().log2();
    f64::from(n) + log2_capacity_from_log2_bias(log2_t)
}

/// `Σ_{i=1}^{2ⁿ} (1 − h((1+Eⁿ)/2))` with `M = 1`.
pub fn ic_sum<F: Float>(n: u32, bias: F) -> Result<IcEvaluation<F>, InfoError> {
    if n == 0 {
        return Err(InfoError::DepthOutOfRange { depth: 0, min: 1 });
    }
    let e = bias.to_f64().unwrap_or(f64::NAN);
    if !(0.0..=1.0).contains(&e) {
        return Err(InfoError::BiasOutOfRange(e));
    }
    let log_sum2 = log2_ic_sum(n, e);
    let per_term = (log_sum2 - f64::from(n)).exp2();
    Ok(IcEvaluation {
        n,
        bias,
        per_term_info: cast(per_term),
        sum: cast(log_sum2.exp2()),
        bound: F::one(),
        log_sum2: cast(log_sum2),
        violated: log_sum2 > 0.0,
    })
}

/// Whether some depth `n ≤ n_max` gives `ic_sum(n, E) > 1`.
pub fn violated_up_to(n_max: u32, bias: f64) -> bool {
    if bias <= 0.0 || n_max == 0 {
        return false;
    }
    let log2_e = bias.log2();
    let growth = 1.0 + 2.0 * log2_e;
    for n in 1..=n_max {
        if log2_ic_sum(n, bias) > 0.0 {
            return true;
        }
        // Once in the log-space regime the sum is n·growth minus a constant
        // plus a correction that only shrinks with n: monotone from here on.
        if f64::from(n) * log2_e < LOG_SPACE_CUTOFF.log2() {
            return growth > 0.0 && log2_ic_sum(n_max, bias) > 0.0;
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ThresholdEstimate {
    pub n_max: u32,
    /// Smallest grid bias that violates for some depth `n ≤ n_max`.
    pub threshold: f64,
    /// Largest grid bias that violates for no depth.
    pub lower: f64,
    /// `threshold − 1/√2`.
    pub gap_to_limit: f64,
}

/// Locates the smallest bias `E` for which the concatenated code violates
/// information causality at some depth `n ≤ n_max`, by bisection on the
/// dyadic grid of spacing [`THRESHOLD_RESOLUTION`]. Because the violation set
/// only grows with `n_max`, the result is nonincreasing in `n_max`.
pub fn tsirelson_threshold(n_max: u32) -> ThresholdEstimate {
    let steps = 1u64 << 24;
    let (mut lo, mut hi) = (0u64, steps);
    let at = |i: u64| i as f64 / steps as f64;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if violated_up_to(n_max, at(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    ThresholdEstimate {
        n_max,
        threshold: at(hi),
        lower: at(lo),
        gap_to_limit: at(hi) - FRAC_1_SQRT_2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticBound<F> {
    /// `Σ E_i²`.
    pub value: F,
    pub satisfied: bool,
}

/// Slack on `Σ E_i² ≤ 1`.
pub const QUADRATIC_TOLERANCE: f64 = 1e-12;

pub fn quadratic_bound<F: Float>(biases: &[F]) -> Result<QuadraticBound<F>, InfoError> {
    quadratic_bound_counted(biases.iter().map(|&e| (e, 1)))
}

/// `Σ count·E²` for biases with multiplicities, so that code families with
/// `2ⁿ` equal biases need not be materialized.
pub fn quadratic_bound_counted<F: Float>(
    biases: impl IntoIterator<Item = (F, u64)>,
) -> Result<QuadraticBound<F>, InfoError> {
    let mut value = F::zero();
    for (e, count) in biases {
        if e.is_nan() || e.abs() > F::one() {
            return Err(InfoError::BiasOutOfRange(e.to_f64().unwrap_or(f64::NAN)));
        }
        value = value + e * e * cast(count as f64);
    }
    Ok(QuadraticBound {
        value,
        satisfied: value <= F::one() + cast(QUADRATIC_TOLERANCE),
    })
}

/// Serializes non-finite floats as JSON `null`.
pub(crate) mod float_or_null {
    use num_traits::Float;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<F: Float + Serialize, S: Serializer>(v: &F, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            v.serialize(s)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, F, D>(d: D) -> Result<F, D::Error>
    where
        F: Float + Deserialize<'de>,
        D: Deserializer<'de>,
    {
        Ok(Option::<F>::deserialize(d)?.unwrap_or_else(F::neg_infinity))
    }
}
