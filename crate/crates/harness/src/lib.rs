//! Instance generation, brute-force fuzzing and benchmarking for the
//! transmission-graph oracles.

pub mod bench;
pub mod fuzz;
pub mod instance;
