//! Exact per-bit success probabilities of the concatenated code.
//!
//! Boxes whose error `a ⊕ b ≠ x·y` has the same probability for every
//! `(a, x, y)` follow the path parity law: bit `k` is decoded correctly iff
//! an even number of pairs on its path err, so its bias is the product of the
//! path biases. Any other box goes through an exhaustive sum over Alice's
//! inputs with a small dynamic program over the decode path.

use serde::Serialize;

use super::{ConcatenationTree, PairInputs, ProtocolError, RacBoxes, RacConfig};
use crate::boxes::BoxPoint;
use crate::infotheory::{binary_entropy, ic_sum, JointDistribution, Variable};
use crate::scalar::{powu, probability_of, ExactScalar, Scalar};

/// Largest depth for the path parity law.
pub const EXACT_DEPTH_CAP: u32 = 20;

/// Largest depth for boxes that need full enumeration.
pub const ENUMERATION_DEPTH_CAP: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactMethod {
    PathParity,
    Enumeration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactRac<T> {
    /// `P(β_k = x_k)` per bit index.
    pub success: Vec<T>,
    /// `Σ_k I(x_k : β_k)` in bits.
    pub ic_sum: f64,
    pub violated: bool,
    pub method: ExactMethod,
}

/// Bias `1 − 2ε` when the pair errs with the same probability `ε` for every
/// `(a, x, y)` Alice can produce, else `None`.
pub fn path_bias<T: Scalar>(pair: &BoxPoint<T>) -> Option<T> {
    let mut common: Option<T> = None;
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                let pa = pair.marginal_a(x, y, a);
                if pa.is_zero() {
                    continue;
                }
                let err = pair.get(x, y, a, a ^ (x & y) ^ 1).clone() / pa;
                match &common {
                    None => common = Some(err),
                    Some(e) if (e.clone() - err).abs() <= T::tolerance() => {}
                    Some(_) => return None,
                }
            }
        }
    }
    common.map(|e| T::one() - e.clone() - e)
}

/// Exact per-bit results, by the parity law when every box allows it and by
/// enumeration otherwise.
pub fn rac_exact<T: ExactScalar>(cfg: &RacConfig<T>) -> Result<ExactRac<T>, ProtocolError> {
    cfg.validate()?;
    let n = cfg.depth;
    match &cfg.boxes {
        RacBoxes::Uniform(pair) => match path_bias(pair) {
            Some(e) => {
                exact_cap(n, EXACT_DEPTH_CAP)?;
                let p = probability_of(&powu(&e, n));
                let ic = ic_sum(n, e.abs().to_f64())?;
                Ok(ExactRac {
                    success: vec![p; 1 << n],
                    ic_sum: ic.sum,
                    violated: ic.violated,
                    method: ExactMethod::PathParity,
                })
            }
            None => rac_exact_enumerated(cfg),
        },
        RacBoxes::PerPair(pairs) => {
            let biases: Option<Vec<T>> = pairs.iter().map(path_bias).collect();
            let Some(biases) = biases else {
                return rac_exact_enumerated(cfg);
            };
            exact_cap(n, EXACT_DEPTH_CAP)?;
            let tree = ConcatenationTree::new(n)?;
            let success: Vec<T> = (0..tree.input_count())
                .map(|k| {
                    let bias = tree
                        .decode_path(k)
                        .iter()
                        .fold(T::one(), |acc, s| acc * biases[s.node].clone());
                    probability_of(&bias)
                })
                .collect();
            let mut total = 0.0;
            for p in &success {
                total += 1.0 - binary_entropy(p.to_f64())?;
            }
            Ok(ExactRac {
                success,
                ic_sum: total,
                violated: total > 1.0,
                method: ExactMethod::PathParity,
            })
        }
    }
}

fn exact_cap(depth: u32, cap: u32) -> Result<(), ProtocolError> {
    if depth > cap {
        return Err(ProtocolError::ExactUnavailable { depth, cap });
    }
    Ok(())
}

type Pair2<T> = [[T; 2]; 2];

/// Exact results for arbitrary valid boxes, summing over every input string
/// and every box outcome. Limited to depth [`ENUMERATION_DEPTH_CAP`].
pub fn rac_exact_enumerated<T: ExactScalar>(
    cfg: &RacConfig<T>,
) -> Result<ExactRac<T>, ProtocolError> {
    cfg.validate()?;
    exact_cap(cfg.depth, ENUMERATION_DEPTH_CAP)?;
    let tree = ConcatenationTree::new(cfg.depth)?;
    let inputs = tree.input_count();
    let pairs = tree.pair_count();
    let zero = || T::zero();
    let prior = T::from_ratio(1, 1 << inputs);

    // joint[k][x_k][β_k]
    let mut joint: Vec<Pair2<T>> = vec![[[zero(), zero()], [zero(), zero()]]; inputs];
    let mut bits = vec![0u8; inputs];
    let mut messages: Vec<[T; 2]> = vec![[zero(), zero()]; pairs];

    for word in 0..1usize << inputs {
        for (i, bit) in bits.iter_mut().enumerate() {
            *bit = ((word >> (inputs - 1 - i)) & 1) as u8;
        }
        // Distribution of every pair's outgoing message.
        for node in (0..pairs).rev() {
            let pair = cfg.box_at(node);
            let mut out = [zero(), zero()];
            match tree.inputs(node) {
                PairInputs::Bits(i, j) => {
                    let (l, r) = (bits[i] as usize, bits[j] as usize);
                    for a in 0..2 {
                        out[l ^ a] = out[l ^ a].clone() + pair.marginal_a(l ^ r, 0, a);
                    }
                }
                PairInputs::Pairs(cl, cr) => {
                    for ml in 0..2 {
                        for mr in 0..2 {
                            let w = messages[cl][ml].clone() * messages[cr][mr].clone();
                            if w.is_zero() {
                                continue;
                            }
                            for a in 0..2 {
                                out[ml ^ a] = out[ml ^ a].clone()
                                    + w.clone() * pair.marginal_a(ml ^ mr, 0, a);
                            }
                        }
                    }
                }
            }
            messages[node] = out;
        }

        for (k, cell) in joint.iter_mut().enumerate() {
            let root = decode_distribution(&tree, cfg, &bits, &messages, k);
            let xk = bits[k] as usize;
            for beta in 0..2 {
                let p = root[0][beta].clone() + root[1][beta].clone();
                cell[xk][beta] = cell[xk][beta].clone() + prior.clone() * p;
            }
        }
    }

    let mut success = Vec::with_capacity(inputs);
    let mut total = 0.0;
    for cell in &joint {
        success.push(cell[0][0].clone() + cell[1][1].clone());
        let probs = cell.iter().flatten().map(Scalar::to_f64).collect();
        let d = JointDistribution::new(vec![Variable::new("x", 2), Variable::new("beta", 2)], probs)?;
        total += d.mutual_information(&["x"], &["beta"])?;
    }
    Ok(ExactRac {
        success,
        ic_sum: total,
        violated: total > 1.0,
        method: ExactMethod::Enumeration,
    })
}

/// `D[m][z]` at the root for bit `k`, where `m` is the pair's message and `z`
/// is Bob's running decode `m ⊕ (XOR of his outputs on the path below)`.
fn decode_distribution<T: ExactScalar>(
    tree: &ConcatenationTree,
    cfg: &RacConfig<T>,
    bits: &[u8],
    messages: &[[T; 2]],
    k: usize,
) -> Pair2<T> {
    let mut below: Option<Pair2<T>> = None;
    for step in tree.decode_path(k).into_iter().rev() {
        let pair = cfg.box_at(step.node);
        let y = step.y as usize;
        let mut d: Pair2<T> = [[T::zero(), T::zero()], [T::zero(), T::zero()]];
        match (tree.inputs(step.node), &below) {
            (PairInputs::Bits(i, j), _) => {
                let (l, r) = (bits[i] as usize, bits[j] as usize);
                for a in 0..2 {
                    for b in 0..2 {
                        let m = l ^ a;
                        d[m][m ^ b] = d[m][m ^ b].clone() + pair.get(l ^ r, y, a, b).clone();
                    }
                }
            }
            (PairInputs::Pairs(cl, cr), Some(child)) => {
                let sibling = &messages[if y == 0 { cr } else { cl }];
                for (mc, row) in child.iter().enumerate() {
                    for (zc, pc) in row.iter().enumerate() {
                        for (ms, psib) in sibling.iter().enumerate() {
                            let w = pc.clone() * psib.clone();
                            if w.is_zero() {
                                continue;
                            }
                            let (ml, mr) = if y == 0 { (mc, ms) } else { (ms, mc) };
                            for a in 0..2 {
                                for b in 0..2 {
                                    let p = pair.get(ml ^ mr, y, a, b);
                                    if p.is_zero() {
                                        continue;
                                    }
                                    let m = ml ^ a;
                                    let z = m ^ b ^ zc ^ mc;
                                    d[m][z] = d[m][z].clone() + w.clone() * p.clone();
                                }
                            }
                        }
                    }
                }
            }
            (PairInputs::Pairs(..), None) => unreachable!("paths end at a leaf pair"),
        }
        below = Some(d);
    }
    below.expect("decode paths are non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::Scenario;
    use num_rational::Ratio;

    // Small denominators: i128 keeps the enumeration fast in debug builds.
    type Q = Ratio<i128>;
    use num_traits::{One, Zero};

    fn r(p: i64, q: i64) -> Q {
        Q::new(p.into(), q.into())
    }

    /// Sum over every error pattern of the `2^n − 1` pairs; a bit is right
    /// iff its path holds an even number of errors.
    fn error_pattern_oracle(n: u32, pair_error: &[Q]) -> Vec<Q> {
        let tree = ConcatenationTree::new(n).unwrap();
        let pairs = tree.pair_count();
        (0..tree.input_count())
            .map(|k| {
                let path = tree.decode_path(k);
                let mut total = Q::zero();
                for pattern in 0..1usize << pairs {
                    let mut p = Q::one();
                    for (u, err) in pair_error.iter().enumerate() {
                        p *= if pattern >> u & 1 == 1 {
                            *err
                        } else {
                            Q::one() - err
                        };
                    }
                    let flips = path.iter().filter(|s| pattern >> s.node & 1 == 1).count();
                    if flips % 2 == 0 {
                        total += p;
                    }
                }
                total
            })
            .collect()
    }

    #[test]
    fn parity_law_matches_enumeration_and_oracle() {
        for n in 1..=3u32 {
            for e in [r(0, 1), r(2, 5), r(4, 5), r(1, 1), r(-1, 3)] {
                let cfg = RacConfig::uniform(n, BoxPoint::isotropic(e).unwrap(), 0, 0);
                let parity = rac_exact(&cfg).unwrap();
                let enumerated = rac_exact_enumerated(&cfg).unwrap();
                let want = (Q::one() + powu(&e, n)) / r(2, 1);
                let err = (Q::one() - e) / r(2, 1);
                let oracle = error_pattern_oracle(n, &vec![err; (1 << n) - 1]);
                assert_eq!(parity.method, ExactMethod::PathParity);
                assert_eq!(enumerated.method, ExactMethod::Enumeration);
                assert_eq!(parity.success.len(), 1 << n);
                assert!(parity.success.iter().all(|p| *p == want));
                assert_eq!(enumerated.success, parity.success);
                assert_eq!(oracle, parity.success);
                assert!((parity.ic_sum - enumerated.ic_sum).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn four_fifths_depth_two() {
        let cfg = RacConfig::uniform(2, BoxPoint::isotropic(r(4, 5)).unwrap(), 0, 0);
        let out = rac_exact(&cfg).unwrap();
        assert_eq!(out.success, vec![r(41, 50); 4]);
    }

    #[test]
    fn violation_at_three_quarters() {
        let cfg = RacConfig::uniform(3, BoxPoint::isotropic(r(3, 4)).unwrap(), 0, 0);
        let out = rac_exact(&cfg).unwrap();
        assert!((out.ic_sum - 1.0599429241470314).abs() < 1e-9);
        assert!(out.violated);
    }

    #[test]
    fn per_pair_biases_multiply_along_paths() {
        let biases = [r(1, 1), r(1, 2), r(1, 3)];
        let pairs: Vec<_> = biases
            .iter()
            .map(|e| BoxPoint::isotropic(*e).unwrap())
            .collect();
        let cfg = RacConfig::per_pair(2, pairs, 0, 0);
        let out = rac_exact(&cfg).unwrap();
        assert_eq!(out.method, ExactMethod::PathParity);
        assert_eq!(out.success[0], r(3, 4));
        assert_eq!(out.success[3], r(2, 3));
        let errs: Vec<_> = biases.iter().map(|e| (r(1, 1) - e) / r(2, 1)).collect();
        assert_eq!(out.success, error_pattern_oracle(2, &errs));
        assert_eq!(rac_exact_enumerated(&cfg).unwrap().success, out.success);
    }

    #[test]
    fn local_box_needs_enumeration() {
        // a = 0, b = y: loses only at x = 0, y = 1.
        let det = BoxPoint::<Q>::local_deterministic(Scenario::CHSH, &[0, 0], &[0, 1]).unwrap();
        assert!(path_bias(&det).is_none());
        let cfg = RacConfig::uniform(1, det.clone(), 0, 0);
        let out = rac_exact(&cfg).unwrap();
        assert_eq!(out.method, ExactMethod::Enumeration);
        // Bit 0 via y = 0: b = 0, guess x0. Bit 1 via y = 1: b = 1, guess ¬x0.
        assert_eq!(out.success, vec![r(1, 1), r(1, 2)]);
        assert!((out.ic_sum - 1.0).abs() < 1e-12);

        let deep = RacConfig::uniform(4, det, 0, 0);
        assert!(matches!(
            rac_exact(&deep),
            Err(ProtocolError::ExactUnavailable { depth: 4, cap: 3 })
        ));
    }

    #[test]
    fn enumeration_never_beats_one_bit() {
        let boxes = [
            BoxPoint::local_deterministic(Scenario::CHSH, &[1, 0], &[0, 1]).unwrap(),
            BoxPoint::mix(
                &[BoxPoint::pr_box(), BoxPoint::local_deterministic(Scenario::CHSH, &[0, 1], &[1, 1]).unwrap()],
                &[r(1, 2), r(1, 2)],
            )
            .unwrap(),
        ];
        for pair in boxes {
            let classical = pair.classify_chsh().unwrap().value <= r(3, 4);
            for n in 1..=3 {
                let cfg = RacConfig::uniform(n, pair.clone(), 0, 0);
                let out = rac_exact(&cfg).unwrap();
                if classical {
                    assert!(out.ic_sum <= 1.0 + 1e-9);
                }
            }
        }
    }

    #[test]
    fn deep_uniform_parity() {
        let cfg = RacConfig::uniform(EXACT_DEPTH_CAP, BoxPoint::isotropic(r(1, 2)).unwrap(), 0, 0);
        let out = rac_exact(&cfg).unwrap();
        assert_eq!(out.success.len(), 1 << EXACT_DEPTH_CAP);
        let too_deep = RacConfig::uniform(EXACT_DEPTH_CAP + 1, BoxPoint::isotropic(r(1, 2)).unwrap(), 0, 0);
        assert!(matches!(rac_exact(&too_deep), Err(ProtocolError::ExactUnavailable { .. })));
    }
}
