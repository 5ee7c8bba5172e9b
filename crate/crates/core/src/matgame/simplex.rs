//! Exact matrix game solving via a dense tableau simplex.
//!
//! The minimax problem `max_x min_y xᵀAy` is reduced to standard form with
//! the classic normalization trick: shift `A` so every entry is positive
//! (the game value shifts by the same constant and the equilibria are
//! unchanged), then the column player's problem becomes
//!
//! ```text
//!   maximize  Σ w        subject to  A w ≤ 1,  w ≥ 0
//! ```
//!
//! whose optimum satisfies `Σ w = 1/v`, `y = v·w`. The dual solution, read
//! off the slack columns of the final tableau, gives the row player's
//! strategy the same way. One simplex solve therefore produces both
//! strategies and the value.

use super::{exploitability_matrix, GameSolution, MatGameError, MixedStrategy, PayoffMatrix};

const PIVOT_EPS: f64 = 1e-12;

/// Solves a zero-sum matrix game exactly.
///
/// The returned strategies form a Nash equilibrium of `a` (joint
/// exploitability at most `1e-8` relative to the matrix scale; verified
/// before returning) and `value` is the game value to the row player.
pub fn solve_lp(a: &PayoffMatrix) -> Result<GameSolution, MatGameError> {
    // Shift so all entries are >= 1, then rescale to (0, 1] for conditioning.
    let offset = 1.0 - a.min_entry();
    let shifted = a.shifted(offset);
    let scale = shifted.max_entry();
    let n = a.rows();
    let m = a.cols();

    let mut t = Tableau::new(&shifted, scale);
    t.run()?;

    let w = t.primal_solution();
    let u = t.dual_solution();

    let w_sum: f64 = w.iter().sum();
    let u_sum: f64 = u.iter().sum();
    if w_sum <= 0.0 || u_sum <= 0.0 {
        return Err(MatGameError::SolverFailure(
            "degenerate normalization: primal or dual sums to zero".into(),
        ));
    }

    let y = MixedStrategy::from_normalized(w.iter().map(|v| v / w_sum).collect());
    let x = MixedStrategy::from_normalized(u.iter().map(|v| v / u_sum).collect());
    let value = scale / w_sum - offset;

    let tol = 1e-8 * f64::max(1.0, a.max_abs());
    let gap = exploitability_matrix(a, &x, &y)?;
    if gap > tol {
        return Err(MatGameError::SolverFailure(format!(
            "simplex result fails the equilibrium check: exploitability {gap:.3e} on a {n}x{m} game"
        )));
    }

    Ok(GameSolution {
        row_strategy: x,
        col_strategy: y,
        value,
    })
}

/// Dense simplex tableau for `max Σw  s.t.  A w ≤ 1, w ≥ 0`.
///
/// Variables are indexed `0..m` for `w` and `m..m+n` for slacks; Bland's rule
/// picks the entering and leaving variables, which rules out cycling on
/// degenerate games.
struct Tableau {
    n: usize,
    m: usize,
    /// n rows of length m + n + 1 (vars, slacks, rhs).
    rows: Vec<Vec<f64>>,
    /// Objective row (z_j - c_j), same layout.
    obj: Vec<f64>,
    /// Basic variable per row.
    basis: Vec<usize>,
}

impl Tableau {
    fn new(shifted: &PayoffMatrix, scale: f64) -> Self {
        let n = shifted.rows();
        let m = shifted.cols();
        let width = m + n + 1;
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = vec![0.0; width];
            for j in 0..m {
                row[j] = shifted.get(i, j) / scale;
            }
            row[m + i] = 1.0;
            row[width - 1] = 1.0;
            rows.push(row);
        }
        let mut obj = vec![0.0; width];
        for j in 0..m {
            obj[j] = -1.0;
        }
        Self {
            n,
            m,
            rows,
            obj,
            basis: (m..m + n).collect(),
        }
    }

    fn run(&mut self) -> Result<(), MatGameError> {
        let max_pivots = 10_000 + 100 * (self.n + self.m);
        for _ in 0..max_pivots {
            let Some(entering) = self.entering() else {
                return Ok(());
            };
            let leaving = self.leaving(entering).ok_or_else(|| {
                MatGameError::SolverFailure("unbounded tableau on a bounded game".into())
            })?;
            self.pivot(leaving, entering);
        }
        Err(MatGameError::SolverFailure(
            "pivot limit exceeded".into(),
        ))
    }

    /// Bland: lowest-index variable with a negative reduced cost.
    fn entering(&self) -> Option<usize> {
        (0..self.m + self.n).find(|&j| self.obj[j] < -PIVOT_EPS)
    }

    /// Minimum-ratio row; ties broken by lowest basic variable index.
    fn leaving(&self, entering: usize) -> Option<usize> {
        let rhs = self.m + self.n;
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.n {
            let coef = self.rows[i][entering];
            if coef > PIVOT_EPS {
                let ratio = self.rows[i][rhs] / coef;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - PIVOT_EPS
                            || ((ratio - br).abs() <= PIVOT_EPS
                                && self.basis[i] < self.basis[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.m + self.n + 1;
        let piv = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= piv;
        }
        for i in 0..self.n {
            if i == row {
                continue;
            }
            let factor = self.rows[i][col];
            if factor != 0.0 {
                for j in 0..width {
                    self.rows[i][j] -= factor * self.rows[row][j];
                }
            }
        }
        let factor = self.obj[col];
        if factor != 0.0 {
            for j in 0..width {
                self.obj[j] -= factor * self.rows[row][j];
            }
        }
        self.basis[row] = col;
    }

    /// Values of the `w` variables at the current basis.
    fn primal_solution(&self) -> Vec<f64> {
        let rhs = self.m + self.n;
        let mut w = vec![0.0; self.m];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.m {
                w[b] = self.rows[i][rhs].max(0.0);
            }
        }
        w
    }

    /// Dual values read from the slack columns of the objective row.
    fn dual_solution(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.obj[self.m + i].max(0.0)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgame::brute_force_solve;

    fn mat(rows: Vec<Vec<f64>>) -> PayoffMatrix {
        PayoffMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn single_entry_game() {
        let s = solve_lp(&mat(vec![vec![0.0]])).unwrap();
        assert_eq!(s.row_strategy.probs(), &[1.0]);
        assert_eq!(s.col_strategy.probs(), &[1.0]);
        assert!(s.value.abs() < 1e-12);
    }

    #[test]
    fn matching_pennies_is_uniform() {
        let s = solve_lp(&mat(vec![vec![1.0, -1.0], vec![-1.0, 1.0]])).unwrap();
        assert!(s.value.abs() < 1e-8);
        for p in s.row_strategy.probs().iter().chain(s.col_strategy.probs()) {
            assert!((p - 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn asymmetric_two_by_two() {
        // Equilibrium (0.4, 0.6) for both players, value 0.2. Cross-checked
        // against the grid-search oracle before pinning the constants.
        let a = mat(vec![vec![2.0, -1.0], vec![-1.0, 1.0]]);
        let oracle = brute_force_solve(&a, 1e-3).unwrap();
        let s = solve_lp(&a).unwrap();
        assert!((s.value - oracle.value).abs() < 0.01);
        assert!((s.value - 0.2).abs() < 1e-8);
        assert!((s.row_strategy.prob(0) - 0.4).abs() < 1e-8);
        assert!((s.col_strategy.prob(0) - 0.4).abs() < 1e-8);
    }

    #[test]
    fn dominant_strategy_game() {
        // Row 0 dominates; column 1 is the column player's best reply.
        let s = solve_lp(&mat(vec![vec![3.0, 1.0], vec![0.0, -2.0]])).unwrap();
        assert!((s.value - 1.0).abs() < 1e-8);
        assert!((s.row_strategy.prob(0) - 1.0).abs() < 1e-8);
        assert!((s.col_strategy.prob(1) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rectangular_games_solve() {
        let a = mat(vec![
            vec![0.3, -0.8, 0.2, 0.9],
            vec![-0.5, 0.6, -0.1, -0.3],
        ]);
        let s = solve_lp(&a).unwrap();
        let e = exploitability_matrix(&a, &s.row_strategy, &s.col_strategy).unwrap();
        assert!(e <= 1e-8);
    }

    #[test]
    fn nash_pair_has_zero_exploitability() {
        let a = mat(vec![
            vec![0.2, -0.4, 0.7],
            vec![0.1, 0.5, -0.6],
            vec![-0.9, 0.3, 0.0],
        ]);
        let s = solve_lp(&a).unwrap();
        let e = exploitability_matrix(&a, &s.row_strategy, &s.col_strategy).unwrap();
        assert!((0.0..=1e-8).contains(&e));
    }

    #[test]
    fn value_antisymmetry_and_swapped_equilibrium() {
        let a = mat(vec![
            vec![0.37, -0.21, 0.88],
            vec![-0.64, 0.12, -0.53],
        ]);
        let s = solve_lp(&a).unwrap();
        let b = a.neg_transpose();
        let sb = solve_lp(&b).unwrap();
        assert!((sb.value + s.value).abs() < 1e-8);
        // The swapped pair must be an equilibrium of the swapped game.
        let e = exploitability_matrix(&b, &s.col_strategy, &s.row_strategy).unwrap();
        assert!(e <= 1e-8);
    }

    #[test]
    fn constant_shift_moves_value_only() {
        let a = mat(vec![vec![2.0, -1.0], vec![-1.0, 1.0]]);
        let c = 3.25;
        let s = solve_lp(&a).unwrap();
        let sc = solve_lp(&a.shifted(c)).unwrap();
        assert!((sc.value - s.value - c).abs() < 1e-9);
        let e = exploitability_matrix(&a.shifted(c), &s.row_strategy, &s.col_strategy).unwrap();
        assert!(e <= 1e-8);
    }
}
