//! Symbolic states, path conditions, events, traces, the chop operator,
//! concretisation, and trace well-formedness.

pub mod event;
pub mod sym;
#[allow(clippy::module_inception)]
pub mod trace;
pub mod wf;

pub use event::Event;
pub use sym::{
    pc_consistent, Concretisation, EvalError, NameGen, PathCondition, PcError, Sexp, SymState,
    Value,
};
pub use trace::{
    chop, chop_extend, concretize, insert_event, ConditionedTrace, Continuation,
    ContinuationTrace, Concretized, Trace, TraceError, TraceItem,
};
pub use wf::{wf_coop, wf_coop_can_append, wf_spawn, wf_spawn_can_react};
