//! Distributed automata on labeled digraphs: simulation, logic
//! characterizations, alternating automata on DAGs and the classic
//! decidability reductions.

pub mod alternating;
pub mod asynchronous;
pub mod catalog;
pub mod decision;
pub mod error;
pub mod forgetful;
pub mod graph;
pub mod logic;
pub mod mu_compiler;
pub mod reductions;
pub mod rules;
pub mod sets;
pub mod sync;
pub mod tiling;

pub use error::{Error, Result};
pub use graph::{Digraph, Pointed};
pub use sync::DistributedAutomaton;
