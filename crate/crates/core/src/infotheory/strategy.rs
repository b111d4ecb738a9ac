//! Random classical strategies for the one-bit random access task: Alice
//! and Bob share a random variable `λ`, Alice sends `m = f(x̄, λ)` and Bob
//! guesses each bit from `(m, λ)`, all possibly noisy.

use rand::Rng;

use super::{InfoError, IcProofQuery, JointDistribution, Variable};

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalStrategy {
    pub n_bits: usize,
    pub shared_size: usize,
    /// `P(m = 1 | x̄, λ)`, indexed `x̄ · shared_size + λ` with `x̄` read as a
    /// binary number whose first bit is most significant.
    pub message: Vec<f64>,
    /// `P(β_i = 1 | m, λ)`, indexed `[i][m · shared_size + λ]`.
    pub guesses: Vec<Vec<f64>>,
}

fn random_response<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Mix deterministic and noisy responses.
    match rng.gen_range(0..4) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen::<f64>(),
    }
}

impl ClassicalStrategy {
    pub fn random<R: Rng + ?Sized>(n_bits: usize, shared_size: usize, rng: &mut R) -> Self {
        let message = (0..(1usize << n_bits) * shared_size)
            .map(|_| random_response(rng))
            .collect();
        let guesses = (0..n_bits)
            .map(|_| (0..2 * shared_size).map(|_| random_response(rng)).collect())
            .collect();
        Self {
            n_bits,
            shared_size,
            message,
            guesses,
        }
    }

    pub fn input_names(&self) -> Vec<String> {
        (0..self.n_bits).map(|i| format!("x{i}")).collect()
    }

    pub fn guess_names(&self) -> Vec<String> {
        (0..self.n_bits).map(|i| format!("beta{i}")).collect()
    }

    /// Joint over `x0.., lambda, m, beta0..` with uniform independent inputs
    /// and uniform `λ`.
    pub fn joint_distribution(&self) -> Result<JointDistribution<f64>, InfoError> {
        let n = self.n_bits;
        let mut vars: Vec<Variable> = self
            .input_names()
            .into_iter()
            .map(|name| Variable::new(name, 2))
            .collect();
        vars.push(Variable::new("lambda", self.shared_size));
        vars.push(Variable::new("m", 2));
        vars.extend(self.guess_names().into_iter().map(|name| Variable::new(name, 2)));

        let prior = 1.0 / ((1usize << n) * self.shared_size) as f64;
        let pick = |p_one: f64, bit: usize| if bit == 1 { p_one } else { 1.0 - p_one };
        JointDistribution::from_fn(vars, |o| {
            let inputs = o[..n].iter().fold(0, |acc, &b| acc * 2 + b);
            let lambda = o[n];
            let m = o[n + 1];
            let mut p = prior * pick(self.message[inputs * self.shared_size + lambda], m);
            for (i, table) in self.guesses.iter().enumerate() {
                p *= pick(table[m * self.shared_size + lambda], o[n + 2 + i]);
            }
            p
        })
    }

    /// Proof-chain query for this strategy: `e = (m, λ)`, `M = 1`.
    pub fn proof_query(&self) -> IcProofQuery<f64> {
        IcProofQuery {
            inputs: self.input_names(),
            message: vec!["m".into()],
            side: vec!["lambda".into()],
            guesses: self.guess_names(),
            capacity: 1.0,
            weights: None,
            require_independent_inputs: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::check_ic_proof_chain;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn copy_first_bit_strategy() {
        // m = x0, β0 = m, β1 = 0: one full bit about x0, nothing about x1.
        let s = ClassicalStrategy {
            n_bits: 2,
            shared_size: 1,
            message: vec![0.0, 0.0, 1.0, 1.0],
            guesses: vec![vec![0.0, 1.0], vec![0.0, 0.0]],
        };
        let d = s.joint_distribution().unwrap();
        assert!((d.mutual_information(&["x0"], &["beta0"]).unwrap() - 1.0).abs() < 1e-12);
        assert!(d.mutual_information(&["x1"], &["beta1"]).unwrap().abs() < 1e-12);
        let report = check_ic_proof_chain(&d, &s.proof_query()).unwrap();
        assert!(report.all_hold());
    }

    #[test]
    fn random_strategies_are_valid_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 3] {
            let s = ClassicalStrategy::random(n, 3, &mut rng);
            let d = s.joint_distribution().unwrap();
            assert_eq!(d.variables().len(), 2 * n + 2);
        }
    }
}
