//! Simultaneous regret matching.
//!
//! Each iteration both players form their strategy from the positive part of
//! their cumulative regrets (uniform when no regret is positive), then both
//! update regrets against the same iterate. The averages of the played
//! strategies converge to an equilibrium in zero-sum games.
//!
//! The general form takes a separate payoff matrix per player (both `n x m`,
//! each read from its owner's maximizing perspective); the tree search uses
//! that to solve its per-player optimism-augmented stage games.

use rand::Rng;

use super::{GameSolution, MixedStrategy, PayoffMatrix};

/// Cumulative regrets and strategy sums for one regret-matching run.
#[derive(Debug, Clone)]
pub struct RegretState {
    cum_regret_row: Vec<f64>,
    cum_regret_col: Vec<f64>,
    strategy_sum_row: Vec<f64>,
    strategy_sum_col: Vec<f64>,
    iterations: u64,
    // Scratch reused across iterations.
    x: Vec<f64>,
    y: Vec<f64>,
}

impl RegretState {
    pub fn new(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "regret matching needs nonempty action sets");
        Self {
            cum_regret_row: vec![0.0; rows],
            cum_regret_col: vec![0.0; cols],
            strategy_sum_row: vec![0.0; rows],
            strategy_sum_col: vec![0.0; cols],
            iterations: 0,
            x: vec![0.0; rows],
            y: vec![0.0; cols],
        }
    }

    /// Starts from small random positive regrets instead of the uniform
    /// fixed point. Symmetric games (rock-paper-scissors, matching pennies)
    /// keep every iterate exactly uniform under the plain dynamics, so runs
    /// that should explore the convergence behaviour need the symmetry
    /// broken at the start.
    pub fn new_perturbed<R: Rng>(rows: usize, cols: usize, scale: f64, rng: &mut R) -> Self {
        let mut s = Self::new(rows, cols);
        for r in s.cum_regret_row.iter_mut() {
            *r = rng.gen::<f64>() * scale;
        }
        for r in s.cum_regret_col.iter_mut() {
            *r = rng.gen::<f64>() * scale;
        }
        s
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn cumulative_regret_row(&self) -> &[f64] {
        &self.cum_regret_row
    }

    pub fn cumulative_regret_col(&self) -> &[f64] {
        &self.cum_regret_col
    }

    /// Strategies played at the next iterate: positive regrets normalized,
    /// uniform when nothing is positive.
    pub fn current_strategies(&self) -> (MixedStrategy, MixedStrategy) {
        (
            MixedStrategy::from_normalized(positive_part(&self.cum_regret_row)),
            MixedStrategy::from_normalized(positive_part(&self.cum_regret_col)),
        )
    }

    /// Average strategies over the run; uniform when no iterations have run.
    pub fn average_strategies(&self) -> (MixedStrategy, MixedStrategy) {
        let avg = |sum: &[f64], t: u64| {
            if t == 0 {
                MixedStrategy::uniform(sum.len())
            } else {
                let total: f64 = sum.iter().sum();
                MixedStrategy::from_normalized(sum.iter().map(|v| v / total).collect())
            }
        };
        (
            avg(&self.strategy_sum_row, self.iterations),
            avg(&self.strategy_sum_col, self.iterations),
        )
    }

    /// One zero-sum iteration on `a` (column player sees `-a`).
    pub fn step_zero_sum(&mut self, a: &PayoffMatrix) {
        self.step_inner(a, None);
    }

    /// One iteration with independent payoff views. Both matrices are
    /// `n x m`; entry `(j, k)` of `col_payoff` is the column player's utility
    /// for the joint action, from its own maximizing perspective.
    pub fn step_bimatrix(&mut self, row_payoff: &PayoffMatrix, col_payoff: &PayoffMatrix) {
        self.step_inner(row_payoff, Some(col_payoff));
    }

    fn step_inner(&mut self, row_payoff: &PayoffMatrix, col_payoff: Option<&PayoffMatrix>) {
        let n = self.cum_regret_row.len();
        let m = self.cum_regret_col.len();
        debug_assert_eq!(row_payoff.rows(), n);
        debug_assert_eq!(row_payoff.cols(), m);

        fill_positive_part(&self.cum_regret_row, &mut self.x);
        fill_positive_part(&self.cum_regret_col, &mut self.y);
        for (s, p) in self.strategy_sum_row.iter_mut().zip(&self.x) {
            *s += p;
        }
        for (s, p) in self.strategy_sum_col.iter_mut().zip(&self.y) {
            *s += p;
        }

        // Row player: utility of each pure row against y, minus realized.
        let u_row = row_payoff.row_payoffs(&self.y);
        let realized_row: f64 = u_row.iter().zip(&self.x).map(|(u, p)| u * p).sum();
        for (r, u) in self.cum_regret_row.iter_mut().zip(&u_row) {
            *r += u - realized_row;
        }

        // Column player: either its own payoff view or the negated shared one.
        let u_col: Vec<f64> = match col_payoff {
            Some(b) => {
                debug_assert_eq!(b.rows(), n);
                debug_assert_eq!(b.cols(), m);
                b.col_payoffs(&self.x)
            }
            None => row_payoff
                .col_payoffs(&self.x)
                .into_iter()
                .map(|v| -v)
                .collect(),
        };
        let realized_col: f64 = u_col.iter().zip(&self.y).map(|(u, p)| u * p).sum();
        for (r, u) in self.cum_regret_col.iter_mut().zip(&u_col) {
            *r += u - realized_col;
        }

        self.iterations += 1;
    }
}

fn positive_part(regrets: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; regrets.len()];
    fill_positive_part(regrets, &mut out);
    out
}

fn fill_positive_part(regrets: &[f64], out: &mut [f64]) {
    let mut total = 0.0;
    for (o, r) in out.iter_mut().zip(regrets) {
        *o = r.max(0.0);
        total += *o;
    }
    if total > 0.0 {
        for o in out.iter_mut() {
            *o /= total;
        }
    } else {
        let u = 1.0 / out.len() as f64;
        for o in out.iter_mut() {
            *o = u;
        }
    }
}

/// Runs `iterations` of simultaneous regret matching on `a` and returns the
/// average strategies with their induced value `x̄ᵀAȳ`. Zero iterations
/// yields uniform strategies.
pub fn regret_matching_solve(a: &PayoffMatrix, iterations: usize) -> GameSolution {
    let mut state = RegretState::new(a.rows(), a.cols());
    for _ in 0..iterations {
        state.step_zero_sum(a);
    }
    solution_from(a, &state)
}

/// [`regret_matching_solve`] with small random initial regrets, for seeded
/// convergence studies on symmetric games where the plain dynamics never
/// leave the uniform fixed point.
pub fn regret_matching_solve_seeded<R: Rng>(
    a: &PayoffMatrix,
    iterations: usize,
    rng: &mut R,
) -> GameSolution {
    let scale = 0.01 * f64::max(1.0, a.max_abs());
    let mut state = RegretState::new_perturbed(a.rows(), a.cols(), scale, rng);
    for _ in 0..iterations {
        state.step_zero_sum(a);
    }
    solution_from(a, &state)
}

fn solution_from(a: &PayoffMatrix, state: &RegretState) -> GameSolution {
    let (x, y) = state.average_strategies();
    let value = a.value(x.probs(), y.probs());
    GameSolution {
        row_strategy: x,
        col_strategy: y,
        value,
    }
}
