//! Workbench for the semantics of cooperative scheduling.
//!
//! The crate implements four small imperative languages of increasing
//! expressiveness (`While`, `Spawn`, `Guard`, `CoopWhile`) together with:
//!
//! * a trace-based semantics that evaluates statements locally to
//!   conditioned symbolic traces and composes them globally ([`local`],
//!   [`global`]),
//! * deterministic round-robin schedulers for the three concurrent
//!   languages ([`sched`]),
//! * a classic small-step (SOS) reference interpreter used as a
//!   cross-validation oracle ([`sos`]),
//! * fairness analyses: lasso detection, weak/strong/quiescent fairness
//!   verdicts, scheduling-distance monitors and a step-by-step embedding
//!   verifier relating scheduler runs to the nondeterministic semantics
//!   ([`fairness`]).
//!
//! All values are immutable and the step functions are pure, so every
//! analysis is replayable and safe to drive from concurrent callers.

pub mod fairness;
pub mod gen;
pub mod global;
pub mod lang;
pub mod local;
pub mod sched;
pub mod sos;
pub mod trace;
pub mod util;

pub mod cli;
