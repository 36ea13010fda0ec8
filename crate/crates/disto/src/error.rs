use thiserror::Error;

/// Errors raised by the toolkit. Structural problems that are part of a
/// normal answer (a digraph that is not a grid, a level violation) are
/// reported as values instead.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid digraph: {0}")]
    Digraph(String),
    #[error("invalid automaton: {0}")]
    Automaton(String),
    #[error("no initial state for label {0:?}")]
    Initialization(String),
    #[error("horizon of {0} steps exceeded before the run became periodic")]
    HorizonExceeded(usize),
    #[error("automaton reads {found} relations but {expected} are supported here")]
    Arity { expected: usize, found: usize },
    #[error("invalid timing: {0}")]
    Timing(String),
    #[error("{0}")]
    Class(String),
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("formula outside the permitted kernel: {0}")]
    Kernel(String),
    #[error("unbound symbol {0:?}")]
    Unbound(String),
    #[error("oracle bound exceeded: {0}")]
    Bound(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no witness: {0}")]
    NoWitness(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
