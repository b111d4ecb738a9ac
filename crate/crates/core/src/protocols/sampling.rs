//! Sampled runs: oblivious transfer and Monte Carlo concatenated RAC.
//!
//! A trial runs Alice's phase to completion (her bits and her box outputs
//! only) before Bob's phase sees the target index. Bob's outputs come from a
//! referee that holds Alice's record and samples `b ~ P(b | a, x, y)`, which
//! together with `a ~ P(a | x)` reproduces the joint `P(a, b | x, y)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ConcatenationTree, PairInputs, ProtocolError, RacConfig};
use crate::boxes::BoxPoint;
use crate::scalar::Scalar;

/// Largest depth accepted for sampling.
pub const MONTE_CARLO_DEPTH_CAP: u32 = 16;

/// Floating-point sampling tables for one CHSH-scenario box.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSampler {
    /// `P(a = 1 | x)`.
    alice: [f64; 2],
    /// `P(b = 1 | a, x, y)`, indexed `[a][x][y]`.
    bob: [[[f64; 2]; 2]; 2],
}

impl PairSampler {
    #[allow(clippy::needless_range_loop)]
    pub fn new<T: Scalar>(pair: &BoxPoint<T>) -> Self {
        let mut alice = [0.0; 2];
        let mut bob = [[[0.0; 2]; 2]; 2];
        for x in 0..2 {
            alice[x] = pair.marginal_a(x, 0, 1).to_f64();
            for y in 0..2 {
                for a in 0..2 {
                    let pa = pair.marginal_a(x, y, a).to_f64();
                    if pa > 0.0 {
                        bob[a][x][y] = pair.get(x, y, a, 1).to_f64() / pa;
                    }
                }
            }
        }
        Self { alice, bob }
    }

    pub fn sample_alice<R: Rng + ?Sized>(&self, x: u8, rng: &mut R) -> u8 {
        u8::from(rng.gen::<f64>() < self.alice[x as usize])
    }

    pub fn sample_bob<R: Rng + ?Sized>(&self, a: u8, x: u8, y: u8, rng: &mut R) -> u8 {
        u8::from(rng.gen::<f64>() < self.bob[a as usize][x as usize][y as usize])
    }
}

/// Everything Alice did in one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliceRecord {
    /// Box input per pair.
    pub inputs: Vec<u8>,
    /// Box output per pair.
    pub outputs: Vec<u8>,
    /// The single transmitted bit.
    pub message: u8,
}

/// Alice's XOR cascade. `output(node, x)` supplies her box output at each
/// pair; children are always queried before their parent.
pub fn alice_phase(
    tree: &ConcatenationTree,
    bits: &[u8],
    mut output: impl FnMut(usize, u8) -> u8,
) -> AliceRecord {
    assert_eq!(bits.len(), tree.input_count(), "wrong number of input bits");
    let pairs = tree.pair_count();
    let mut inputs = vec![0; pairs];
    let mut outputs = vec![0; pairs];
    let mut messages = vec![0u8; pairs];
    for node in (0..pairs).rev() {
        let (left, right) = match tree.inputs(node) {
            PairInputs::Bits(i, j) => (bits[i], bits[j]),
            PairInputs::Pairs(l, r) => (messages[l], messages[r]),
        };
        let x = left ^ right;
        let a = output(node, x);
        inputs[node] = x;
        outputs[node] = a;
        messages[node] = left ^ a;
    }
    AliceRecord {
        inputs,
        outputs,
        message: messages[0],
    }
}

/// Bob's decoding of bit `k` from the message: XOR in his box output at
/// every pair on the path. `output(node, y)` is his box.
pub fn bob_phase(
    tree: &ConcatenationTree,
    k: usize,
    message: u8,
    mut output: impl FnMut(usize, u8) -> u8,
) -> u8 {
    tree.decode_path(k)
        .into_iter()
        .fold(message, |c, step| c ^ output(step.node, step.y))
}

fn check_bit(name: &'static str, value: u8) -> Result<u8, ProtocolError> {
    if value > 1 {
        return Err(ProtocolError::NotABit { name, value });
    }
    Ok(value)
}

/// One oblivious-transfer run: Bob learns `x_k` through one box and one bit.
pub fn run_ot<T: Scalar, R: Rng + ?Sized>(
    x0: u8,
    x1: u8,
    k: u8,
    pair: &BoxPoint<T>,
    rng: &mut R,
) -> Result<u8, ProtocolError> {
    let bits = [check_bit("x0", x0)?, check_bit("x1", x1)?];
    let k = check_bit("k", k)?;
    super::check_box(0, pair)?;
    let sampler = PairSampler::new(pair);
    let tree = ConcatenationTree::new(1)?;
    let alice = alice_phase(&tree, &bits, |_, x| sampler.sample_alice(x, rng));
    Ok(bob_phase(&tree, k as usize, alice.message, |node, y| {
        sampler.sample_bob(alice.outputs[node], alice.inputs[node], y, rng)
    }))
}

/// Exact `P(C = x_k)` for one oblivious-transfer run.
pub fn ot_success_probability<T: Scalar>(
    x0: u8,
    x1: u8,
    k: u8,
    pair: &BoxPoint<T>,
) -> Result<T, ProtocolError> {
    let (x0, x1, k) = (
        check_bit("x0", x0)?,
        check_bit("x1", x1)?,
        check_bit("k", k)?,
    );
    super::check_box(0, pair)?;
    let target = if k == 0 { x0 } else { x1 };
    let x = (x0 ^ x1) as usize;
    let mut total = T::zero();
    for a in 0..2u8 {
        for b in 0..2u8 {
            if x0 ^ a ^ b == target {
                total = total + pair.get(x, k as usize, a as usize, b as usize).clone();
            }
        }
    }
    Ok(total)
}

/// Success count for one bit index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitTally {
    pub k: usize,
    pub successes: u64,
    pub trials: u64,
}

impl BitTally {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            return f64::NAN;
        }
        self.successes as f64 / self.trials as f64
    }

    /// Binomial standard error `sqrt(p̂(1 − p̂)/trials)`.
    pub fn std_err(&self) -> f64 {
        let p = self.rate();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// One line of the audit transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub k: usize,
    pub trial: u64,
    /// Alice's bits, first bit leftmost.
    pub inputs: String,
    pub message: u8,
    pub guess: u8,
    pub correct: bool,
}

/// RNG for trial `t` of bit `k`: a ChaCha stream keyed by the seed and
/// selected by `k · trials + t`, so any trial can be replayed alone.
pub fn trial_rng(seed: u64, trials: u64, k: usize, t: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64 * trials + t);
    rng
}

struct Engine {
    tree: ConcatenationTree,
    samplers: Vec<PairSampler>,
    trials: u64,
    seed: u64,
}

impl Engine {
    fn new<T: Scalar>(cfg: &RacConfig<T>) -> Result<Self, ProtocolError> {
        cfg.validate()?;
        if cfg.trials == 0 {
            return Err(ProtocolError::NoTrials);
        }
        let tree = ConcatenationTree::with_cap(cfg.depth, MONTE_CARLO_DEPTH_CAP)?;
        let samplers = (0..tree.pair_count())
            .map(|u| PairSampler::new(cfg.box_at(u)))
            .collect();
        Ok(Self {
            tree,
            samplers,
            trials: cfg.trials,
            seed: cfg.seed,
        })
    }

    fn trial(&self, k: usize, t: u64) -> (Vec<u8>, u8, u8) {
        let mut rng = trial_rng(self.seed, self.trials, k, t);
        let bits: Vec<u8> = (0..self.tree.input_count())
            .map(|_| u8::from(rng.gen::<bool>()))
            .collect();
        let alice = alice_phase(&self.tree, &bits, |node, x| {
            self.samplers[node].sample_alice(x, &mut rng)
        });
        let guess = bob_phase(&self.tree, k, alice.message, |node, y| {
            self.samplers[node].sample_bob(alice.outputs[node], alice.inputs[node], y, &mut rng)
        });
        (bits, alice.message, guess)
    }

    fn tallies(&self) -> Vec<BitTally> {
        (0..self.tree.input_count())
            .into_par_iter()
            .map(|k| {
                let successes = (0..self.trials)
                    .into_par_iter()
                    .filter(|&t| {
                        let (bits, _, guess) = self.trial(k, t);
                        bits[k] == guess
                    })
                    .count() as u64;
                BitTally {
                    k,
                    successes,
                    trials: self.trials,
                }
            })
            .collect()
    }

    fn transcript(&self) -> Vec<TrialRecord> {
        let total = self.tree.input_count() as u64 * self.trials;
        (0..total)
            .into_par_iter()
            .map(|g| {
                let k = (g / self.trials) as usize;
                let t = g % self.trials;
                let (bits, message, guess) = self.trial(k, t);
                TrialRecord {
                    k,
                    trial: t,
                    inputs: bits.iter().map(|b| char::from(b'0' + b)).collect(),
                    message,
                    guess,
                    correct: bits[k] == guess,
                }
            })
            .collect()
    }
}

/// Runs `cfg.trials` sampled trials for every bit index. Results depend only
/// on the configuration, not on thread count or scheduling.
pub fn rac_monte_carlo<T: Scalar>(cfg: &RacConfig<T>) -> Result<Vec<BitTally>, ProtocolError> {
    Ok(Engine::new(cfg)?.tallies())
}

/// Like [`rac_monte_carlo`], also returning one record per trial, ordered by
/// `(k, trial)`.
pub fn rac_monte_carlo_with_transcript<T: Scalar>(
    cfg: &RacConfig<T>,
) -> Result<(Vec<BitTally>, Vec<TrialRecord>), ProtocolError> {
    let engine = Engine::new(cfg)?;
    let records = engine.transcript();
    let mut tallies: Vec<BitTally> = (0..engine.tree.input_count())
        .map(|k| BitTally {
            k,
            successes: 0,
            trials: engine.trials,
        })
        .collect();
    for r in &records {
        tallies[r.k].successes += u64::from(r.correct);
    }
    Ok((tallies, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn ot_with_pr_box_is_exact() {
        let pr = BoxPoint::<BigRational>::pr_box();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for case in 0..8u8 {
            let (x0, x1, k) = (case >> 2 & 1, case >> 1 & 1, case & 1);
            let want = if k == 0 { x0 } else { x1 };
            for _ in 0..20 {
                assert_eq!(run_ot(x0, x1, k, &pr, &mut rng).unwrap(), want);
            }
            assert_eq!(ot_success_probability(x0, x1, k, &pr).unwrap(), r(1, 1));
        }
    }

    #[test]
    fn ot_success_matches_isotropic_bias() {
        let e = r(3, 5);
        let iso = BoxPoint::isotropic(e.clone()).unwrap();
        let mut total = r(0, 1);
        for case in 0..8u8 {
            total += ot_success_probability(case >> 2 & 1, case >> 1 & 1, case & 1, &iso).unwrap();
        }
        assert_eq!(total / r(8, 1), (r(1, 1) + e) / r(2, 1));
    }

    #[test]
    fn ot_with_noise_is_a_coin() {
        let noise = BoxPoint::<BigRational>::white_noise(crate::boxes::Scenario::CHSH);
        for case in 0..8u8 {
            let p = ot_success_probability(case >> 2 & 1, case >> 1 & 1, case & 1, &noise).unwrap();
            assert_eq!(p, r(1, 2));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let hits = (0..20_000)
            .filter(|_| run_ot(1, 0, 0, &noise, &mut rng).unwrap() == 1)
            .count();
        assert!((hits as f64 / 20_000.0 - 0.5).abs() < 0.02);
    }

    #[test]
    fn ot_rejects_bad_inputs() {
        let pr = BoxPoint::<BigRational>::pr_box();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            run_ot(2, 0, 0, &pr, &mut rng),
            Err(ProtocolError::NotABit { name: "x0", .. })
        ));
        let bad = BoxPoint::from_table(crate::boxes::Scenario::CHSH, vec![r(1, 1); 16]).unwrap();
        assert!(matches!(
            run_ot(0, 0, 0, &bad, &mut rng),
            Err(ProtocolError::InvalidBox { .. })
        ));
    }

    #[test]
    fn alice_runs_before_the_target_is_known() {
        // One Alice record serves every target index under the PR box.
        let tree = ConcatenationTree::new(3).unwrap();
        let pr = PairSampler::new(&BoxPoint::<BigRational>::pr_box());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let bits: Vec<u8> = (0..8).map(|_| u8::from(rng.gen::<bool>())).collect();
            let alice = alice_phase(&tree, &bits, |_, x| pr.sample_alice(x, &mut rng));
            for (k, &bit) in bits.iter().enumerate() {
                let guess = bob_phase(&tree, k, alice.message, |node, y| {
                    pr.sample_bob(alice.outputs[node], alice.inputs[node], y, &mut rng)
                });
                assert_eq!(guess, bit);
            }
        }
    }

    #[test]
    fn perfect_boxes_never_fail() {
        let cfg = RacConfig::uniform(1, BoxPoint::<BigRational>::pr_box(), 1000, 7);
        let tallies = rac_monte_carlo(&cfg).unwrap();
        assert_eq!(tallies.len(), 2);
        for t in tallies {
            assert_eq!((t.successes, t.trials), (1000, 1000));
            assert_eq!(t.std_err(), 0.0);
        }
    }

    #[test]
    fn transcript_agrees_with_tallies() {
        let iso = BoxPoint::isotropic(r(4, 5)).unwrap();
        let cfg = RacConfig::uniform(2, iso, 300, 9);
        let (tallies, records) = rac_monte_carlo_with_transcript(&cfg).unwrap();
        assert_eq!(records.len(), 4 * 300);
        assert_eq!(tallies, rac_monte_carlo(&cfg).unwrap());
        assert_eq!(records[301].k, 1);
        assert_eq!(records[301].trial, 1);
    }

    #[test]
    fn replaying_a_trial_is_deterministic() {
        let a = trial_rng(42, 100, 3, 17).gen::<u64>();
        let b = trial_rng(42, 100, 3, 17).gen::<u64>();
        let c = trial_rng(42, 100, 3, 18).gen::<u64>();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_trials_is_an_error() {
        let cfg = RacConfig::uniform(1, BoxPoint::<BigRational>::pr_box(), 0, 0);
        assert!(matches!(rac_monte_carlo(&cfg), Err(ProtocolError::NoTrials)));
    }
}
