//! Planning and learning for two-player zero-sum simultaneous-move Markov
//! games with deterministic transitions.
//!
//! Every decision point of such a game is a matrix game whose payoffs mix
//! the immediate reward with the value of the successor state. This crate
//! builds the whole stack on that view:
//!
//! - [`matgame`] — exact (linear programming) and approximate (regret
//!   matching) solvers for zero-sum matrix games, plus exploitability
//!   metrics used as oracles everywhere else.
//! - [`game`] — the Markov game abstraction environments implement.
//! - [`exact`] — backward induction over the tree of stage games and exact
//!   best-response / exploitability computation for small games.
//! - [`mcts`] — simultaneous-move Monte Carlo Tree Search with
//!   optimism-augmented stage games and minimax backups.
//! - [`net`] — a multi-headed fully connected network (two policy heads and
//!   a distributional value head) with analytic backpropagation.
//! - [`train`] — the self-play training loop: episode generation, replay
//!   buffer, minibatch updates.
//! - [`envs`] — benchmark environments: a pursuit-evasion tag game on Dubin
//!   dynamics, a planar orbital custody game, and tabular toys.
//! - [`eval`] — exploitability experiments and the empirical check of the
//!   frontier-error contraction bound.
//!
//! The narrative guide lives in [`guide`]; its chapters are compiled as
//! doc-tests so the book and the API cannot drift apart.

pub mod envs;
pub mod eval;
pub mod exact;
pub mod game;
pub mod guide;
mod linalg;
pub mod matgame;
pub mod mcts;
pub mod net;
pub mod rng;
pub mod train;
