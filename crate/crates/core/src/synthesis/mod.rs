//! Enumerative PSTL synthesis: length bounds, template enumeration, causal
//! pruning and instantiation.

pub mod enumerate;
pub mod prune;
pub mod template;

pub use enumerate::{compute_length_bounds, enumerate_pstl, index_canonical, Literal, Op, SynthesisBounds, SynthesisError};
pub use prune::{causal_witness, prune_causal, with_probe_intervals, BitTrace, CausalDependency, PruneReport, PrunedTemplate, DEFAULT_PROBE_HORIZON};
pub use template::{arg_slot_kind, instantiate, InstantiateError, Slot, SlotKind, SlotValue, Template, Valuation};
