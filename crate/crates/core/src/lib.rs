//! Exact-rational maximal fractional matchings in anonymous networks: a
//! synchronous port-numbering simulator, the degree-induction algorithm,
//! a verifier, the loopy-graph lower-bound construction and brute-force
//! oracles for small instances.

pub mod algorithms;
pub mod format;
pub mod generate;
pub mod graph;
pub mod lowerbound;
pub mod oracle;
pub mod rational;
pub mod sim;
pub mod verify;

pub use graph::{PortGraph, RawGraph};
pub use rational::{Rat, ValueSet};
pub use sim::{run, run_loopy, Algorithm, Model, RunOptions, RunResult};
pub use verify::{verify, EdgeAssignment, VerifyReport};
