//! Event markers recorded in traces.
//!
//! The Spawn language uses anonymous call/call-reaction events carrying the
//! procedure name and argument. The cooperative language adds task
//! identifiers and completion events; `Done` marks call events already
//! processed by the scheduler.

use super::sym::{Sexp, Value};
use crate::lang::ast::ProcName;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Event {
    /// `callEv(m, v)`: a `spawn(m, e)` happened.
    CallSpawn { proc: ProcName, arg: Sexp },
    /// `callREv(m, v)`: a spawned procedure body started.
    CallRSpawn { proc: ProcName, arg: Sexp },
    /// `callEv(v, m, f)`: a task `f` running `m(v)` was spawned.
    Call { arg: Sexp, proc: ProcName, tid: Sexp },
    /// `callREv(v, m, f)`: task `f` started executing.
    CallR { arg: Sexp, proc: ProcName, tid: Sexp },
    /// `compEv(f)`: task `f` completed.
    Comp { tid: Sexp },
    /// `compREv(f)`: a wait on task `f` was resolved.
    CompR { tid: Sexp },
    /// `doneEv`: the scheduler has processed the preceding call event.
    Done,
}

impl Event {
    /// All event arguments are values.
    pub fn is_concrete(&self) -> bool {
        match self {
            Event::CallSpawn { arg, .. } | Event::CallRSpawn { arg, .. } => arg.is_concrete(),
            Event::Call { arg, tid, .. } | Event::CallR { arg, tid, .. } => {
                arg.is_concrete() && tid.is_concrete()
            }
            Event::Comp { tid } | Event::CompR { tid } => tid.is_concrete(),
            Event::Done => true,
        }
    }

    /// Free variables of the event arguments.
    pub fn vars(&self, out: &mut BTreeSet<crate::lang::ast::Var>) {
        match self {
            Event::CallSpawn { arg, .. } | Event::CallRSpawn { arg, .. } => arg.vars(out),
            Event::Call { arg, tid, .. } | Event::CallR { arg, tid, .. } => {
                arg.vars(out);
                tid.vars(out);
            }
            Event::Comp { tid } | Event::CompR { tid } => tid.vars(out),
            Event::Done => {}
        }
    }

    /// Applies a substitution of values for variables to the arguments.
    pub fn substitute(&self, subst: &std::collections::BTreeMap<crate::lang::ast::Var, Value>) -> Event {
        match self {
            Event::CallSpawn { proc, arg } => Event::CallSpawn {
                proc: proc.clone(),
                arg: arg.substitute(subst),
            },
            Event::CallRSpawn { proc, arg } => Event::CallRSpawn {
                proc: proc.clone(),
                arg: arg.substitute(subst),
            },
            Event::Call { arg, proc, tid } => Event::Call {
                arg: arg.substitute(subst),
                proc: proc.clone(),
                tid: tid.substitute(subst),
            },
            Event::CallR { arg, proc, tid } => Event::CallR {
                arg: arg.substitute(subst),
                proc: proc.clone(),
                tid: tid.substitute(subst),
            },
            Event::Comp { tid } => Event::Comp {
                tid: tid.substitute(subst),
            },
            Event::CompR { tid } => Event::CompR {
                tid: tid.substitute(subst),
            },
            Event::Done => Event::Done,
        }
    }

    /// Concrete task identifier carried by a cooperative event, if any.
    pub fn concrete_tid(&self) -> Option<Value> {
        match self {
            Event::Call { tid, .. }
            | Event::CallR { tid, .. }
            | Event::Comp { tid }
            | Event::CompR { tid } => tid.as_value(),
            _ => None,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::CallSpawn { proc, arg } => write!(f, "callEv({proc},{arg})"),
            Event::CallRSpawn { proc, arg } => write!(f, "callREv({proc},{arg})"),
            Event::Call { arg, proc, tid } => write!(f, "callEv({arg},{proc},{tid})"),
            Event::CallR { arg, proc, tid } => write!(f, "callREv({arg},{proc},{tid})"),
            Event::Comp { tid } => write!(f, "compEv({tid})"),
            Event::CompR { tid } => write!(f, "compREv({tid})"),
            Event::Done => f.write_str("doneEv"),
        }
    }
}
