//! Trace well-formedness.
//!
//! For the Spawn language, appending `callREv(m, v)` requires strictly more
//! `callEv(m, v)` than `callREv(m, v)` occurrences in the prefix; every
//! other extension preserves well-formedness. For the cooperative language
//! the predicate enforces unique task identifiers, start-after-spawn, and
//! completion-reaction-after-completion. Both predicates are prefix-closed
//! by construction.

use super::event::Event;
use super::sym::Value;
use super::trace::{Trace, TraceItem};
use crate::lang::ast::ProcName;
use std::collections::HashMap;

/// Spawn-level well-formedness of a concrete trace.
pub fn wf_spawn(sh: &Trace) -> bool {
    let mut counts: HashMap<(&ProcName, &super::sym::Sexp), (usize, usize)> = HashMap::new();
    for item in sh.items() {
        if let TraceItem::Event(ev) = item {
            match ev {
                Event::CallSpawn { proc, arg } => {
                    counts.entry((proc, arg)).or_default().0 += 1;
                }
                Event::CallRSpawn { proc, arg } => {
                    let entry = counts.entry((proc, arg)).or_default();
                    if entry.0 <= entry.1 {
                        return false;
                    }
                    entry.1 += 1;
                }
                _ => {}
            }
        }
    }
    true
}

/// Whether appending `callREv(m, v)` to `sh` keeps the trace well-formed,
/// i.e. there is an unresolved `callEv(m, v)`. Constant-time via the
/// trace's event counters.
pub fn wf_spawn_can_react(sh: &Trace, proc: &ProcName, arg: &super::sym::Sexp) -> bool {
    let calls = sh.count_event(&Event::CallSpawn {
        proc: proc.clone(),
        arg: arg.clone(),
    });
    let reactions = sh.count_event(&Event::CallRSpawn {
        proc: proc.clone(),
        arg: arg.clone(),
    });
    calls > reactions
}

/// Cooperative well-formedness of a concrete trace:
/// * `callEv(v, m, f)` requires no earlier `callEv` with the same `f`;
/// * `callREv(v, m, f)` requires a matching earlier `callEv(v, m, f)` and
///   no earlier `callREv` with the same `f`;
/// * `compREv(f)` requires an earlier `compEv(f)`;
/// * `compEv` and `doneEv` are unconstrained.
pub fn wf_coop(sh: &Trace) -> bool {
    let mut calls: HashMap<Value, (&super::sym::Sexp, &ProcName)> = HashMap::new();
    let mut reacted: HashMap<Value, ()> = HashMap::new();
    let mut completed: HashMap<Value, ()> = HashMap::new();
    for item in sh.items() {
        if let TraceItem::Event(ev) = item {
            match ev {
                Event::Call { arg, proc, tid } => {
                    let Some(f) = tid.as_value() else { return false };
                    if calls.contains_key(&f) {
                        return false;
                    }
                    calls.insert(f, (arg, proc));
                }
                Event::CallR { arg, proc, tid } => {
                    let Some(f) = tid.as_value() else { return false };
                    match calls.get(&f) {
                        Some((a, p)) if *a == arg && *p == proc => {}
                        _ => return false,
                    }
                    if reacted.contains_key(&f) {
                        return false;
                    }
                    reacted.insert(f, ());
                }
                Event::Comp { tid } => {
                    let Some(f) = tid.as_value() else { return false };
                    completed.insert(f, ());
                }
                Event::CompR { tid } => {
                    let Some(f) = tid.as_value() else { return false };
                    if !completed.contains_key(&f) {
                        return false;
                    }
                }
                Event::CallSpawn { .. } | Event::CallRSpawn { .. } => return false,
                Event::Done => {}
            }
        }
    }
    true
}

/// Whether appending this cooperative event keeps `sh` well-formed.
/// Constant-time via the trace's task-id indices.
pub fn wf_coop_can_append(sh: &Trace, ev: &Event) -> bool {
    match ev {
        Event::Call { tid, .. } => match tid.as_value() {
            Some(f) => !sh.has_call_tid(f),
            None => false,
        },
        Event::CallR { arg, proc, tid } => match tid.as_value() {
            Some(f) => {
                !sh.has_callr_tid(f)
                    && sh.count_event(&Event::Call {
                        arg: arg.clone(),
                        proc: proc.clone(),
                        tid: tid.clone(),
                    }) > 0
            }
            None => false,
        },
        Event::Comp { tid } => tid.is_concrete(),
        Event::CompR { tid } => match tid.as_value() {
            Some(f) => sh.has_comp_tid(f),
            None => false,
        },
        Event::Done => true,
        Event::CallSpawn { .. } | Event::CallRSpawn { .. } => false,
    }
}
