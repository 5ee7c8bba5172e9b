//! Zero-sum matrix games: exact and approximate solvers plus the
//! exploitability metric used as an oracle throughout the crate.
//!
//! A matrix game is given by the row player's payoff matrix `A`; the column
//! player receives the negation. The exact solver ([`solve_lp`]) reformulates
//! the minimax problem as a linear program and solves it with a dense tableau
//! simplex. The approximate solver ([`regret_matching_solve`]) runs
//! simultaneous regret matching and returns the average strategies, which
//! converge to an equilibrium in zero-sum games. [`brute_force_solve`] is an
//! independent grid-search oracle for small matrices, used by tests to
//! validate the other two.

mod brute;
mod regret;
mod simplex;

pub use brute::brute_force_solve;
pub use regret::{regret_matching_solve, regret_matching_solve_seeded, RegretState};
pub use simplex::solve_lp;

use thiserror::Error;

/// Strategy-simplex tolerance: probability vectors must sum to 1 within this.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Errors from matrix game construction and solving.
#[derive(Debug, Error)]
pub enum MatGameError {
    #[error("payoff matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("payoff matrix entry ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    EntryCountMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },
    #[error("dimension mismatch: matrix is {rows}x{cols}, strategies have {row_len} and {col_len} entries")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        row_len: usize,
        col_len: usize,
    },
    #[error("invalid mixed strategy: {reason}")]
    InvalidStrategy { reason: String },
    #[error("internal simplex failure: {0}")]
    SolverFailure(String),
    #[error("brute force supports at most 4 actions per player, got {rows}x{cols}")]
    BruteForceTooLarge { rows: usize, cols: usize },
    #[error("brute force resolution must lie in (0, 0.1], got {0}")]
    BadResolution(f64),
}

/// Dense row-major payoff matrix holding the row player's utilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl PayoffMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self, MatGameError> {
        if rows == 0 || cols == 0 {
            return Err(MatGameError::EmptyMatrix);
        }
        if entries.len() != rows * cols {
            return Err(MatGameError::EntryCountMismatch {
                rows,
                cols,
                expected: rows * cols,
                got: entries.len(),
            });
        }
        for (i, v) in entries.iter().enumerate() {
            if !v.is_finite() {
                return Err(MatGameError::NonFiniteEntry {
                    row: i / cols,
                    col: i % cols,
                });
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, MatGameError> {
        if rows.is_empty() {
            return Err(MatGameError::EmptyMatrix);
        }
        let cols = rows[0].len();
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * cols);
        for r in &rows {
            if r.len() != cols {
                return Err(MatGameError::EntryCountMismatch {
                    rows: n,
                    cols,
                    expected: n * cols,
                    got: r.len() * n,
                });
            }
            entries.extend_from_slice(r);
        }
        Self::new(n, cols, entries)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.entries
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// The column player's view of the game: `-Aᵀ`, a `cols x rows` matrix.
    pub fn neg_transpose(&self) -> PayoffMatrix {
        let mut entries = vec![0.0; self.rows * self.cols];
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries[j * self.rows + i] = -self.get(i, j);
            }
        }
        PayoffMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// Adds a constant to every entry.
    pub fn shifted(&self, c: f64) -> PayoffMatrix {
        PayoffMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|v| v + c).collect(),
        }
    }

    /// Row payoffs `A y` against a column strategy.
    pub fn row_payoffs(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            out[i] = row.iter().zip(y).map(|(a, p)| a * p).sum();
        }
        out
    }

    /// Column payoffs `xᵀ A` against a row strategy.
    pub fn col_payoffs(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            for (j, a) in self.row(i).iter().enumerate() {
                out[j] += xi * a;
            }
        }
        out
    }

    /// Expected payoff `xᵀ A y`.
    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(i, xi)| xi * self.row(i).iter().zip(y).map(|(a, p)| a * p).sum::<f64>())
            .sum()
    }

    fn check_dims(&self, x: &MixedStrategy, y: &MixedStrategy) -> Result<(), MatGameError> {
        if x.len() != self.rows || y.len() != self.cols {
            return Err(MatGameError::DimensionMismatch {
                rows: self.rows,
                cols: self.cols,
                row_len: x.len(),
                col_len: y.len(),
            });
        }
        Ok(())
    }
}

/// A probability distribution over one player's actions.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    probs: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self, MatGameError> {
        if probs.is_empty() {
            return Err(MatGameError::InvalidStrategy {
                reason: "empty probability vector".into(),
            });
        }
        let mut sum = 0.0;
        for p in &probs {
            if !p.is_finite() || *p < 0.0 {
                return Err(MatGameError::InvalidStrategy {
                    reason: format!("entry {p} is negative or non-finite"),
                });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(MatGameError::InvalidStrategy {
                reason: format!("entries sum to {sum}, expected 1"),
            });
        }
        Ok(Self { probs })
    }

    /// Wraps a vector known to be normalized (solver output paths).
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOL);
        Self { probs }
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "uniform strategy needs at least one action");
        Self {
            probs: vec![1.0 / k as f64; k],
        }
    }

    pub fn pure(k: usize, action: usize) -> Self {
        assert!(action < k, "pure action out of range");
        let mut probs = vec![0.0; k];
        probs[action] = 1.0;
        Self { probs }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn prob(&self, action: usize) -> f64 {
        self.probs[action]
    }

    /// Samples an action index.
    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }
}

/// An equilibrium (or approximate equilibrium) of a matrix game.
#[derive(Debug, Clone)]
pub struct GameSolution {
    pub row_strategy: MixedStrategy,
    pub col_strategy: MixedStrategy,
    /// Game value to the row player.
    pub value: f64,
}

/// Joint exploitability of a strategy pair on one stage game:
/// `max_i (A y)_i - min_j (xᵀ A)_j`.
///
/// Nonnegative for any valid strategies, and zero exactly at equilibrium.
pub fn exploitability_matrix(
    a: &PayoffMatrix,
    x: &MixedStrategy,
    y: &MixedStrategy,
) -> Result<f64, MatGameError> {
    a.check_dims(x, y)?;
    let best_row = a
        .row_payoffs(y.probs())
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let worst_col = a
        .col_payoffs(x.probs())
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(best_row - worst_col)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn pennies() -> PayoffMatrix {
        PayoffMatrix::from_rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap()
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(
            PayoffMatrix::new(0, 2, vec![]),
            Err(MatGameError::EmptyMatrix)
        ));
        assert!(matches!(
            PayoffMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(MatGameError::NonFiniteEntry { row: 0, col: 1 })
        ));
    }

    #[test]
    fn strategy_validation() {
        assert!(MixedStrategy::new(vec![0.5, 0.5]).is_ok());
        assert!(MixedStrategy::new(vec![0.5, 0.6]).is_err());
        assert!(MixedStrategy::new(vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn exploitability_matches_hand_computation() {
        // Pure row 0 vs uniform on matching pennies: best row payoff vs y is
        // 0, worst column of xᵀA is -1.
        let a = pennies();
        let x = MixedStrategy::pure(2, 0);
        let y = MixedStrategy::uniform(2);
        let e = exploitability_matrix(&a, &x, &y).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exploitability_single_action_game() {
        let a = PayoffMatrix::from_rows(vec![vec![0.0]]).unwrap();
        let x = MixedStrategy::pure(1, 0);
        let y = MixedStrategy::pure(1, 0);
        assert_eq!(exploitability_matrix(&a, &x, &y).unwrap(), 0.0);
    }

    #[test]
    fn exploitability_rejects_dimension_mismatch() {
        let a = pennies();
        let x = MixedStrategy::uniform(3);
        let y = MixedStrategy::uniform(2);
        assert!(matches!(
            exploitability_matrix(&a, &x, &y),
            Err(MatGameError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn neg_transpose_swaps_perspective() {
        let a = PayoffMatrix::from_rows(vec![vec![2.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let b = a.neg_transpose();
        assert_eq!(b.rows(), 2);
        assert_eq!(b.get(1, 0), 1.0);
        assert_eq!(b.get(0, 1), 1.0);
    }

    #[test]
    fn regret_matching_median_exploitability_shrinks_with_iterations() {
        // Over random games the deterministic dynamics leave the uniform
        // fixed point immediately, so longer runs must dominate short ones.
        use rand::Rng;
        let mut rng = crate::rng::substream(17, "rm-median");
        let mut short = Vec::new();
        let mut long = Vec::new();
        for _ in 0..100 {
            let entries: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = PayoffMatrix::new(3, 3, entries).unwrap();
            let s100 = crate::matgame::regret_matching_solve(&a, 100);
            let s10k = crate::matgame::regret_matching_solve(&a, 10_000);
            short.push(exploitability_matrix(&a, &s100.row_strategy, &s100.col_strategy).unwrap());
            long.push(exploitability_matrix(&a, &s10k.row_strategy, &s10k.col_strategy).unwrap());
        }
        let median = |v: &mut Vec<f64>| {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v[v.len() / 2]
        };
        assert!(median(&mut long) < median(&mut short));
    }
}
