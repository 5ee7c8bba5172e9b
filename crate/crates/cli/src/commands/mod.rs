pub mod bench;
pub mod eval;
pub mod solve;
pub mod train;
