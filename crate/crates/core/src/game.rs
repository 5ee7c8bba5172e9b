//! The Markov game abstraction every environment implements and every solver
//! consumes: two players, simultaneous actions, deterministic transitions,
//! zero-sum rewards, finite horizon.

use std::fmt;

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::matgame::MixedStrategy;

/// Player index in a two-player game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

/// A pair of action indices, one per player.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JointAction {
    pub a1: usize,
    pub a2: usize,
}

impl JointAction {
    pub fn new(a1: usize, a2: usize) -> Self {
        Self { a1, a2 }
    }
}

/// Outcome of one deterministic transition. `reward1` is player 1's reward;
/// player 2 receives the negation.
#[derive(Debug, Clone)]
pub struct StepResult<S> {
    pub next_state: S,
    pub reward1: f64,
    pub terminal: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StepError {
    #[error("player {player:?} action {index} out of range (state has {count} actions)")]
    ActionOutOfRange {
        player: Player,
        index: usize,
        count: usize,
    },
    #[error("cannot step a terminal state")]
    TerminalState,
}

/// A two-player zero-sum simultaneous-move Markov game with deterministic
/// transitions.
///
/// Implementors provide the raw [`Game::transition`]; callers go through
/// [`Game::step`], which enforces the action-range and nonterminal
/// preconditions. Determinism is part of the contract: identical inputs must
/// produce identical outputs.
pub trait Game: Send + Sync {
    type State: Clone + fmt::Debug + Send + Sync;

    /// Step-count horizon `D`.
    fn horizon(&self) -> usize;

    /// Discount factor in `[0, 1]`.
    fn discount(&self) -> f64;

    /// Draws an initial state; deterministic given the stream.
    fn initial_state(&self, rng: &mut ChaCha8Rng) -> Self::State;

    fn is_terminal(&self, state: &Self::State) -> bool;

    /// Per-state action counts `(n, m)`; both at least 1 for nonterminal
    /// states.
    fn action_counts(&self, state: &Self::State) -> (usize, usize);

    /// Maximum action counts over all states, used to size network heads.
    fn action_space(&self) -> (usize, usize);

    /// Raw deterministic transition; preconditions already checked.
    fn transition(&self, state: &Self::State, action: JointAction) -> StepResult<Self::State>;

    /// Fixed-length feature vector for the network input.
    fn encode_state(&self, state: &Self::State) -> Vec<f64>;

    fn encoding_len(&self) -> usize;

    /// Largest absolute single-step reward, used to scale value bins.
    fn max_abs_reward(&self) -> f64;

    /// Checked transition: validates terminality and action ranges, then
    /// delegates to [`Game::transition`].
    fn step(&self, state: &Self::State, action: JointAction) -> Result<StepResult<Self::State>, StepError> {
        if self.is_terminal(state) {
            return Err(StepError::TerminalState);
        }
        let (n, m) = self.action_counts(state);
        if action.a1 >= n {
            return Err(StepError::ActionOutOfRange {
                player: Player::One,
                index: action.a1,
                count: n,
            });
        }
        if action.a2 >= m {
            return Err(StepError::ActionOutOfRange {
                player: Player::Two,
                index: action.a2,
                count: m,
            });
        }
        Ok(self.transition(state, action))
    }
}

/// Upper bound on the absolute discounted return: `Σ_{t<D} γᵗ·r_max`.
pub fn value_scale(horizon: usize, discount: f64, max_abs_reward: f64) -> f64 {
    let mut scale = 0.0;
    let mut weight = 1.0;
    for _ in 0..horizon {
        scale += weight;
        weight *= discount;
    }
    scale * max_abs_reward
}

/// One step of a recorded episode.
#[derive(Debug, Clone)]
pub struct TrajectoryStep<S> {
    pub state: S,
    pub pi1: MixedStrategy,
    pub pi2: MixedStrategy,
    pub reward1: f64,
}

/// An ordered record of the states visited in one episode together with the
/// search-improved strategies and rewards.
#[derive(Debug, Clone, Default)]
pub struct Trajectory<S> {
    pub steps: Vec<TrajectoryStep<S>>,
}

impl<S> Trajectory<S> {
    pub fn new() -> Self {
        Self { steps: Vec::new() }
    }

    pub fn push(&mut self, state: S, pi1: MixedStrategy, pi2: MixedStrategy, reward1: f64) {
        self.steps.push(TrajectoryStep {
            state,
            pi1,
            pi2,
            reward1,
        });
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.reward1).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::tabular::make_tabular_toy;
    use crate::rng::substream;

    #[test]
    fn step_rejects_bad_action_and_terminal_state() {
        let g = make_tabular_toy("matching_pennies(1)").unwrap();
        let mut rng = substream(0, "t");
        let s0 = g.initial_state(&mut rng);
        let err = g.step(&s0, JointAction::new(5, 0)).unwrap_err();
        assert!(matches!(err, StepError::ActionOutOfRange { player: Player::One, .. }));

        let r = g.step(&s0, JointAction::new(0, 0)).unwrap();
        assert!(r.terminal);
        assert_eq!(
            g.step(&r.next_state, JointAction::new(0, 0)).unwrap_err(),
            StepError::TerminalState
        );
    }

    #[test]
    fn step_is_deterministic() {
        let g = make_tabular_toy("rps(2)").unwrap();
        let mut rng = substream(1, "t");
        let s0 = g.initial_state(&mut rng);
        let a = JointAction::new(1, 2);
        let r1 = g.step(&s0, a).unwrap();
        let r2 = g.step(&s0, a).unwrap();
        assert_eq!(r1.reward1, r2.reward1);
        assert_eq!(r1.terminal, r2.terminal);
        assert_eq!(format!("{:?}", r1.next_state), format!("{:?}", r2.next_state));
    }

    #[test]
    fn value_scale_sums_discounted_rewards() {
        assert_eq!(value_scale(3, 1.0, 1.0), 3.0);
        assert!((value_scale(3, 0.5, 2.0) - 3.5).abs() < 1e-15);
        assert_eq!(value_scale(1, 0.0, 1.0), 1.0);
    }
}
