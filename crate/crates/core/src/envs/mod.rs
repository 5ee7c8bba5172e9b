//! Benchmark environments implementing the [`crate::game::Game`] contract.
//!
//! - [`tabular`] — small finite games with known equilibria, the fixtures
//!   every solver is validated against.
//! - [`random_tree`] — randomly rewarded game trees for oracle-consistency
//!   sweeps.
//! - [`dubin`] — continuous-state pursuit-evasion tag on Dubin dynamics.
//! - [`sda`] — a planar orbital custody game with eclipse, occlusion and
//!   sun-exclusion geometry.

pub mod dubin;
pub mod random_tree;
pub mod sda;
pub mod tabular;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("unknown toy game {0:?}; expected matching_pennies(H), rps(H), asym22(H) or grid_pursuit(k,H)")]
    UnknownToy(String),
    #[error("could not parse toy game arguments in {0:?}: {1}")]
    BadToyArgs(String, String),
}
