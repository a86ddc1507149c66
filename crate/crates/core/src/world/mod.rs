//! The grid-world environment: layout, dynamics, atoms and demonstrations.

pub mod atoms;
pub mod demo;
pub mod grid;
pub mod state;

use thiserror::Error;

pub use atoms::{atom_distance, atom_eval, atom_spec, slotted_atom, AtomSpec, ParamKind, StateTrace, WorldVocabulary, ATOMS};
pub use demo::{
    demo_to_trace, inject_delays, prefixes_as_negatives, record, state_record, states_to_trace, DemoSpec,
    Demonstration, StartSpec, Step,
};
pub use grid::{manhattan, Cell, Fixtures, GridSpec, ItemSpec, DEFAULT_GRID};
pub use state::{step, Action, ItemPos, WorldState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid state: {0}")]
    BadState(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("atom `{name}` takes {expected} argument(s), got {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("unresolved argument ?{0}")]
    Unresolved(String),
    #[error("bad atom argument `{0}`")]
    BadArgument(String),
    #[error("unknown item `{0}`")]
    UnknownItem(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("demonstration is empty")]
    EmptyDemo,
    #[error("demonstration is inconsistent at step {index}")]
    Inconsistent { index: usize },
    #[error("delay position {position} is outside a demonstration of length {len}")]
    DelayOutOfRange { position: usize, len: usize },
    #[error("demonstration file line {line}: {msg}")]
    DemoFile { line: usize, msg: String },
}
