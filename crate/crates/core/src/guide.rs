//! The narrative guide, compiled from the book chapters.
//!
//! Each submodule's documentation is a chapter of the mdbook under `book/`;
//! including them here turns every fenced code block into a doc-test, so
//! `cargo test --doc` keeps the book honest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/matrix-games.md")]
pub mod matrix_games {}

#[doc = include_str!("../../../book/src/markov-games.md")]
pub mod markov_games {}

#[doc = include_str!("../../../book/src/search.md")]
pub mod search {}

#[doc = include_str!("../../../book/src/network.md")]
pub mod network {}

#[doc = include_str!("../../../book/src/training.md")]
pub mod training {}

#[doc = include_str!("../../../book/src/environments.md")]
pub mod environments {}

#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
