//! Randomly rewarded full game trees.
//!
//! Every `(state, joint action)` pair gets a reward hashed from the seed, so
//! the game is deterministic, cheap to rebuild, and never stores the tree.
//! Used by the oracle-consistency sweeps that compare search against exact
//! backward induction.

use rand_chacha::ChaCha8Rng;

use crate::game::{Game, JointAction, StepResult};

/// A depth-`depth` tree where every internal state has `rows x cols` joint
/// actions and i.i.d. rewards in `[-scale, scale]`.
#[derive(Debug, Clone)]
pub struct RandomTreeGame {
    pub depth: usize,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    pub gamma: f64,
    pub reward_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeState {
    pub depth: usize,
    /// Index of the node within its level, in joint-action radix.
    pub path: u64,
}

impl RandomTreeGame {
    pub fn new(depth: usize, rows: usize, cols: usize, seed: u64) -> Self {
        Self {
            depth,
            rows,
            cols,
            seed,
            gamma: 1.0,
            reward_scale: 1.0,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    fn reward(&self, state: &TreeState, action: JointAction) -> f64 {
        let mut z = self.seed;
        for v in [
            state.depth as u64,
            state.path,
            action.a1 as u64,
            action.a2 as u64,
        ] {
            z = mix(z ^ mix(v.wrapping_add(0x9e37_79b9)));
        }
        let unit = (z >> 11) as f64 / (1u64 << 53) as f64;
        (2.0 * unit - 1.0) * self.reward_scale
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Game for RandomTreeGame {
    type State = TreeState;

    fn horizon(&self) -> usize {
        self.depth
    }

    fn discount(&self) -> f64 {
        self.gamma
    }

    fn initial_state(&self, _rng: &mut ChaCha8Rng) -> TreeState {
        TreeState { depth: 0, path: 0 }
    }

    fn is_terminal(&self, state: &TreeState) -> bool {
        state.depth >= self.depth
    }

    fn action_counts(&self, _state: &TreeState) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn action_space(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn transition(&self, state: &TreeState, action: JointAction) -> StepResult<TreeState> {
        let branch = (self.rows * self.cols) as u64;
        let next = TreeState {
            depth: state.depth + 1,
            path: state.path * branch + (action.a1 * self.cols + action.a2) as u64,
        };
        StepResult {
            reward1: self.reward(state, action),
            terminal: next.depth >= self.depth,
            next_state: next,
        }
    }

    fn encode_state(&self, state: &TreeState) -> Vec<f64> {
        let h = mix(self.seed ^ state.path ^ ((state.depth as u64) << 32));
        vec![
            state.depth as f64 / self.depth.max(1) as f64,
            (h >> 11) as f64 / (1u64 << 53) as f64,
            ((h & 0xffff_ffff) as f64) / u32::MAX as f64,
        ]
    }

    fn encoding_len(&self) -> usize {
        3
    }

    fn max_abs_reward(&self) -> f64 {
        self.reward_scale
    }
}
