//! Signal temporal logic: syntax, parsing, traces and monitoring.

pub mod ast;
pub mod monitor;
pub mod parser;
pub mod trace;

pub use ast::{format_formula, Arg, Atom, Bound, Comparator, Formula, Interval, Threshold};
pub use monitor::{robustness, satisfies, MonitorError, ATOM_ROBUSTNESS};
pub use parser::{parse_formula, parse_formula_with, AtomVocabulary, ParseError};
pub use trace::{atom_key, numeric_trace, Record, Trace, TraceFileError, TraceView};
