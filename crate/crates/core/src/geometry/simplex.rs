//! Exact phase-one simplex on a dense tableau.
//!
//! Solves `min Σ s  s.t.  A·w + s = c,  w ≥ 0,  s ≥ 0` with Bland's rule, so
//! the run is deterministic and cannot cycle. The optimum is zero exactly when
//! `A·w = c, w ≥ 0` is feasible; otherwise the final duals give a Farkas-type
//! witness `y` with `y·c > 0` and `y·Aⱼ ≤ 0` for every column.

use crate::scalar::ExactScalar;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOneSolution<T> {
    /// Optimal total artificial slack.
    pub objective: T,
    /// Values of the structural variables `w`.
    pub primal: Vec<T>,
    /// Dual values, one per constraint row, in the caller's sign convention.
    pub dual: Vec<T>,
    pub pivots: usize,
}

impl<T: ExactScalar> PhaseOneSolution<T> {
    pub fn is_feasible(&self) -> bool {
        self.objective.is_zero()
    }
}

struct Tableau<T> {
    rows: usize,
    structural: usize,
    /// `rows × (structural + rows)` coefficients.
    body: Vec<Vec<T>>,
    rhs: Vec<T>,
    /// Reduced costs for every column.
    costs: Vec<T>,
    objective: T,
    basis: Vec<usize>,
}

impl<T: ExactScalar> Tableau<T> {
    fn new(matrix: &[Vec<T>], rhs: &[T]) -> (Self, Vec<bool>) {
        let rows = matrix.len();
        let structural = matrix.first().map_or(0, Vec::len);
        let width = structural + rows;
        let mut body = Vec::with_capacity(rows);
        let mut rhs_col = Vec::with_capacity(rows);
        let mut flipped = Vec::with_capacity(rows);
        for (i, (row, value)) in matrix.iter().zip(rhs).enumerate() {
            assert_eq!(row.len(), structural, "ragged constraint matrix");
            let flip = value.is_negative();
            let mut line: Vec<T> = row
                .iter()
                .map(|a| if flip { -a.clone() } else { a.clone() })
                .collect();
            line.resize(width, T::zero());
            line[structural + i] = T::one();
            body.push(line);
            rhs_col.push(if flip { -value.clone() } else { value.clone() });
            flipped.push(flip);
        }
        // Every artificial starts basic with cost 1, so the reduced cost of a
        // structural column is minus its column sum.
        let mut costs = vec![T::zero(); width];
        for (j, cost) in costs.iter_mut().enumerate().take(structural) {
            *cost = body.iter().fold(T::zero(), |acc, line| acc - line[j].clone());
        }
        let objective = rhs_col.iter().fold(T::zero(), |acc, v| acc + v.clone());
        let basis = (structural..width).collect();
        (
            Self {
                rows,
                structural,
                body,
                rhs: rhs_col,
                costs,
                objective,
                basis,
            },
            flipped,
        )
    }

    fn entering(&self) -> Option<usize> {
        self.costs.iter().position(|d| d.is_negative())
    }

    fn leaving(&self, column: usize) -> Option<usize> {
        let mut best: Option<(usize, T)> = None;
        for i in 0..self.rows {
            let coeff = &self.body[i][column];
            if !coeff.is_positive() {
                continue;
            }
            let ratio = self.rhs[i].clone() / coeff.clone();
            best = match best {
                None => Some((i, ratio)),
                Some((j, current)) => {
                    if ratio < current || (ratio == current && self.basis[i] < self.basis[j]) {
                        Some((i, ratio))
                    } else {
                        Some((j, current))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, row: usize, column: usize) {
        let pivot = self.body[row][column].clone();
        for v in self.body[row].iter_mut() {
            *v = v.clone() / pivot.clone();
        }
        self.rhs[row] = self.rhs[row].clone() / pivot;
        let pivot_row = self.body[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let factor = self.body[i][column].clone();
            if factor.is_zero() {
                continue;
            }
            for (v, p) in self.body[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v = v.clone() - factor.clone() * p.clone();
                }
            }
            self.rhs[i] = self.rhs[i].clone() - factor * pivot_rhs.clone();
        }
        let factor = self.costs[column].clone();
        if !factor.is_zero() {
            for (d, p) in self.costs.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *d = d.clone() - factor.clone() * p.clone();
                }
            }
            self.objective = self.objective.clone() + factor * pivot_rhs;
        }
        self.basis[row] = column;
    }
}

/// Runs phase one on `matrix · w = rhs`, `w ≥ 0`.
///
/// Rows with a negative right-hand side are negated internally; the reported
/// duals are mapped back so that `dual · rhs = objective` and
/// `dual · column ≤ 0` for every column of the original matrix.
pub fn phase_one<T: ExactScalar>(matrix: &[Vec<T>], rhs: &[T]) -> PhaseOneSolution<T> {
    assert_eq!(matrix.len(), rhs.len(), "row count mismatch");
    let (mut tableau, flipped) = Tableau::new(matrix, rhs);
    let mut pivots = 0;
    while let Some(column) = tableau.entering() {
        let row = tableau
            .leaving(column)
            .expect("phase one is bounded below by zero");
        tableau.pivot(row, column);
        pivots += 1;
    }

    let mut primal = vec![T::zero(); tableau.structural];
    for (row, &var) in tableau.basis.iter().enumerate() {
        if var < tableau.structural {
            primal[var] = tableau.rhs[row].clone();
        }
    }
    // Artificial column i has cost 1, so its reduced cost is 1 − yᵢ.
    let dual = (0..tableau.rows)
        .map(|i| {
            let y = T::one() - tableau.costs[tableau.structural + i].clone();
            if flipped[i] {
                -y
            } else {
                y
            }
        })
        .collect();

    PhaseOneSolution {
        objective: tableau.objective,
        primal,
        dual,
        pivots,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use num_rational::{BigRational, Rational64};
    use num_traits::Signed;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
        a.iter()
            .zip(b)
            .fold(q(0, 1), |acc, (x, y)| acc + x.clone() * y.clone())
    }

    #[test]
    fn feasible_system() {
        // w0 + w1 = 1, w0 - w1 = 1/2
        let a = vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(-1, 1)]];
        let c = vec![q(1, 1), q(1, 2)];
        let sol = phase_one(&a, &c);
        assert!(sol.is_feasible());
        assert_eq!(sol.primal, vec![q(3, 4), q(1, 4)]);
    }

    #[test]
    fn infeasible_system_has_farkas_witness() {
        // w0 + w1 = 1 and w0 + w1 = 2 cannot both hold.
        let a = vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(1, 1)]];
        let c = vec![q(1, 1), q(2, 1)];
        let sol = phase_one(&a, &c);
        assert!(!sol.is_feasible());
        assert_eq!(sol.objective, q(1, 1));
        assert_eq!(dot(&sol.dual, &c), sol.objective);
        for j in 0..2 {
            let column: Vec<_> = a.iter().map(|r| r[j].clone()).collect();
            assert!(dot(&sol.dual, &column) <= q(0, 1));
        }
    }

    #[test]
    fn negative_rhs_rows() {
        // -w0 = -1/3, w0 + w1 = 1
        let a = vec![vec![q(-1, 1), q(0, 1)], vec![q(1, 1), q(1, 1)]];
        let c = vec![q(-1, 3), q(1, 1)];
        let sol = phase_one(&a, &c);
        assert!(sol.is_feasible());
        assert_eq!(sol.primal, vec![q(1, 3), q(2, 3)]);

        // w0 = -1 is infeasible for w0 ≥ 0
        let a = vec![vec![q(1, 1)]];
        let c = vec![q(-1, 1)];
        let sol = phase_one(&a, &c);
        assert!(!sol.is_feasible());
        assert!(dot(&sol.dual, &c).is_positive());
        assert!(dot(&sol.dual, &[q(1, 1)]) <= q(0, 1));
    }

    #[test]
    fn works_with_fixed_width_rationals() {
        let a = vec![vec![Rational64::from_ratio(2, 1), Rational64::from_ratio(1, 1)]];
        let c = vec![Rational64::from_ratio(1, 1)];
        let sol = phase_one(&a, &c);
        assert!(sol.is_feasible());
        assert_eq!(sol.primal[0], Rational64::from_ratio(1, 2));
    }
}
