//! Traces, the chop operator, event insertion, continuations, and
//! concretisation of conditioned traces.

use super::event::Event;
use super::sym::{pc_consistent, Concretisation, PathCondition, Sexp, SymState, Value};
use crate::lang::ast::{Stmt, Var};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

/// One element of a trace: a state or an event.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TraceItem {
    State(SymState),
    Event(Event),
}

impl fmt::Display for TraceItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceItem::State(s) => {
                write!(f, "S ")?;
                write!(f, "{s}")
            }
            TraceItem::Event(e) => write!(f, "E {e}"),
        }
    }
}

/// An append-only sequence of states and events.
///
/// Events are always preceded and succeeded by states; non-empty traces
/// produced by evaluation begin and end with a state. The trace caches
/// per-event occurrence counts and cooperative task-identifier indices so
/// the well-formedness premises of the composition rules are O(1).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    items: Vec<TraceItem>,
    event_counts: HashMap<Event, usize>,
    call_tids: BTreeSet<Value>,
    callr_tids: BTreeSet<Value>,
    comp_tids: BTreeSet<Value>,
}

impl Trace {
    pub fn empty() -> Self {
        Trace::default()
    }

    /// The singleton trace containing one state.
    pub fn singleton(sigma: SymState) -> Self {
        let mut t = Trace::empty();
        t.push_state(sigma);
        t
    }

    pub fn from_items(items: impl IntoIterator<Item = TraceItem>) -> Self {
        let mut t = Trace::empty();
        for item in items {
            match item {
                TraceItem::State(s) => t.push_state(s),
                TraceItem::Event(e) => t.push_event_unchecked(e),
            }
        }
        t
    }

    pub fn items(&self) -> &[TraceItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push_state(&mut self, sigma: SymState) {
        self.items.push(TraceItem::State(sigma));
    }

    /// Appends an event without enforcing alternation; used internally and
    /// by deserialization. Alternation is kept by the public constructors.
    pub fn push_event_unchecked(&mut self, ev: Event) {
        self.index_event(&ev);
        self.items.push(TraceItem::Event(ev));
    }

    fn index_event(&mut self, ev: &Event) {
        *self.event_counts.entry(ev.clone()).or_insert(0) += 1;
        if let Some(tid) = ev.concrete_tid() {
            match ev {
                Event::Call { .. } => {
                    self.call_tids.insert(tid);
                }
                Event::CallR { .. } => {
                    self.callr_tids.insert(tid);
                }
                Event::Comp { .. } => {
                    self.comp_tids.insert(tid);
                }
                _ => {}
            }
        }
    }

    /// Number of occurrences of exactly this event.
    pub fn count_event(&self, ev: &Event) -> usize {
        self.event_counts.get(ev).copied().unwrap_or(0)
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.items.iter().filter_map(|item| match item {
            TraceItem::Event(e) => Some(e),
            _ => None,
        })
    }

    /// Distinct events recorded, with counts.
    pub fn event_counts(&self) -> impl Iterator<Item = (&Event, usize)> {
        self.event_counts.iter().map(|(e, n)| (e, *n))
    }

    /// True if some cooperative `callEv` in the trace uses this task id.
    pub fn has_call_tid(&self, tid: Value) -> bool {
        self.call_tids.contains(&tid)
    }

    pub fn has_callr_tid(&self, tid: Value) -> bool {
        self.callr_tids.contains(&tid)
    }

    pub fn has_comp_tid(&self, tid: Value) -> bool {
        self.comp_tids.contains(&tid)
    }

    /// All concrete task ids mentioned by any event.
    pub fn all_tids(&self) -> BTreeSet<Value> {
        let mut out = self.call_tids.clone();
        out.extend(self.callr_tids.iter().copied());
        out.extend(self.comp_tids.iter().copied());
        out
    }

    pub fn first_state(&self) -> Option<&SymState> {
        self.items.iter().find_map(|item| match item {
            TraceItem::State(s) => Some(s),
            _ => None,
        })
    }

    pub fn last_state(&self) -> Option<&SymState> {
        self.items.iter().rev().find_map(|item| match item {
            TraceItem::State(s) => Some(s),
            _ => None,
        })
    }

    /// The most recent event in the trace (the scheduler's
    /// `lastEvent(sh)`); trailing states are skipped.
    pub fn last_event(&self) -> Option<&Event> {
        self.items.iter().rev().find_map(|item| match item {
            TraceItem::Event(e) => Some(e),
            _ => None,
        })
    }

    pub fn ends_with_state(&self) -> bool {
        matches!(self.items.last(), Some(TraceItem::State(_)))
    }

    /// Checks the structural trace disciplines: events surrounded by
    /// states, and each state's domain including its predecessor's.
    pub fn check_shape(&self) -> Result<(), TraceError> {
        let mut prev_state: Option<&SymState> = None;
        for (i, item) in self.items.iter().enumerate() {
            match item {
                TraceItem::Event(_) => {
                    let before = i > 0 && matches!(self.items[i - 1], TraceItem::State(_));
                    let after = matches!(self.items.get(i + 1), Some(TraceItem::State(_)));
                    if !before || !after {
                        return Err(TraceError::Alternation { index: i });
                    }
                }
                TraceItem::State(s) => {
                    if let Some(p) = prev_state {
                        if !p.domain().all(|v| s.contains(v)) {
                            return Err(TraceError::ShrinkingDomain { index: i });
                        }
                    }
                    prev_state = Some(s);
                }
            }
        }
        Ok(())
    }

    /// Whether every state binding and event argument is a value.
    pub fn is_concrete(&self) -> bool {
        self.items.iter().all(|item| match item {
            TraceItem::State(s) => s.is_concrete(),
            TraceItem::Event(e) => e.is_concrete(),
        })
    }

    /// Serializes one line per item.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            out.push_str(&item.to_string());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("chop undefined: first argument must be a finite non-empty trace ending in a state")]
    ChopUndefined,
    #[error("chop junction mismatch: second trace does not start with an extension of the first trace's last state")]
    JunctionMismatch,
    #[error("fresh variable `{0}` already bound in the state")]
    FreshClash(Var),
    #[error("event at index {index} is not surrounded by states")]
    Alternation { index: usize },
    #[error("state at index {index} drops bindings of its predecessor")]
    ShrinkingDomain { index: usize },
    #[error("concretisation does not cover symbolic variable `{0}`")]
    Uncovered(Var),
}

/// A conditioned trace `pc |> tau`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConditionedTrace {
    pub pc: PathCondition,
    pub tau: Trace,
}

impl ConditionedTrace {
    pub fn new(pc: PathCondition, tau: Trace) -> Self {
        ConditionedTrace { pc, tau }
    }

    pub fn unconditional(tau: Trace) -> Self {
        ConditionedTrace {
            pc: PathCondition::new(),
            tau,
        }
    }
}

/// The semantic chop: concatenation merging the shared junction state.
///
/// `a.tau` must be finite and non-empty with a trailing state; the first
/// state of `b.tau` must extend it as a mapping. The result's path
/// condition is the union of both.
pub fn chop(a: &ConditionedTrace, b: &ConditionedTrace) -> Result<ConditionedTrace, TraceError> {
    let junction = match a.tau.items().last() {
        Some(TraceItem::State(s)) => s,
        _ => return Err(TraceError::ChopUndefined),
    };
    let b_first = match b.tau.items().first() {
        Some(TraceItem::State(s)) => s,
        _ => return Err(TraceError::JunctionMismatch),
    };
    if !junction.extended_by(b_first) {
        return Err(TraceError::JunctionMismatch);
    }
    let mut pc = a.pc.clone();
    pc.extend(b.pc.iter().cloned());
    let items = a.tau.items()[..a.tau.len() - 1]
        .iter()
        .cloned()
        .chain(b.tau.items().iter().cloned());
    Ok(ConditionedTrace::new(pc, Trace::from_items(items)))
}

/// Appends a conditioned trace onto a trace in place (the common
/// composition move `sh ** tau`), avoiding the full copy done by [`chop`].
pub fn chop_extend(sh: &mut Trace, tau: &Trace) -> Result<(), TraceError> {
    let junction = match sh.items().last() {
        Some(TraceItem::State(s)) => s,
        _ => return Err(TraceError::ChopUndefined),
    };
    let first = match tau.items().first() {
        Some(TraceItem::State(s)) => s,
        _ => return Err(TraceError::JunctionMismatch),
    };
    if !junction.extended_by(first) {
        return Err(TraceError::JunctionMismatch);
    }
    // replace the junction with the (possibly extended) first state of tau
    sh.items.pop();
    for item in tau.items() {
        match item {
            TraceItem::State(s) => sh.push_state(s.clone()),
            TraceItem::Event(e) => sh.push_event_unchecked(e.clone()),
        }
    }
    Ok(())
}

/// Builds the length-3 event trace `<sigma> ev' sigma'`, where `sigma'`
/// extends `sigma` with the fresh symbolic variables and `ev'` has its
/// arguments evaluated in `sigma'`.
pub fn insert_event(
    sigma: &SymState,
    ev: Event,
    fresh: &[Var],
) -> Result<Trace, TraceError> {
    for v in fresh {
        if sigma.contains(v) {
            return Err(TraceError::FreshClash(v.clone()));
        }
    }
    let sigma2 = sigma.extend_symbolic(fresh);
    let eval_arg = |se: &Sexp| sigma2.eval(se).expect("event argument variables must be bound");
    let ev2 = match ev {
        Event::CallSpawn { proc, arg } => Event::CallSpawn {
            proc,
            arg: eval_arg(&arg),
        },
        Event::CallRSpawn { proc, arg } => Event::CallRSpawn {
            proc,
            arg: eval_arg(&arg),
        },
        Event::Call { arg, proc, tid } => Event::Call {
            arg: eval_arg(&arg),
            proc,
            tid: eval_arg(&tid),
        },
        Event::CallR { arg, proc, tid } => Event::CallR {
            arg: eval_arg(&arg),
            proc,
            tid: eval_arg(&tid),
        },
        Event::Comp { tid } => Event::Comp { tid: eval_arg(&tid) },
        Event::CompR { tid } => Event::CompR { tid: eval_arg(&tid) },
        Event::Done => Event::Done,
    };
    let mut t = Trace::singleton(sigma.clone());
    t.push_event_unchecked(ev2);
    t.push_state(sigma2);
    Ok(t)
}

/// Result of concretising a conditioned trace: the concrete trace plus
/// whether the fully evaluated path condition was consistent. A consistent
/// path condition is normalized away.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concretized {
    pub ct: ConditionedTrace,
    pub consistent: bool,
    /// The path condition as evaluated, before normalization.
    pub evaluated_pc: PathCondition,
}

/// Applies a concretisation mapping to states, events, and the path
/// condition. Every symbolic variable of every state must be covered.
pub fn concretize(
    rho: &Concretisation,
    ct: &ConditionedTrace,
) -> Result<Concretized, TraceError> {
    // check coverage
    for item in ct.tau.items() {
        if let TraceItem::State(s) = item {
            for v in s.symbolic_vars() {
                if rho.get(&v).is_none() {
                    return Err(TraceError::Uncovered(v));
                }
            }
        }
    }
    let subst = &rho.map;
    let mut out = Trace::empty();
    for item in ct.tau.items() {
        match item {
            TraceItem::State(s) => {
                let mut bindings = Vec::new();
                for (v, se) in s.iter() {
                    let new = match se {
                        Sexp::Star => Sexp::Val(rho.get(v).expect("coverage checked")),
                        other => other.substitute(subst),
                    };
                    bindings.push((v.clone(), new));
                }
                out.push_state(SymState::from_bindings(bindings));
            }
            TraceItem::Event(e) => out.push_event_unchecked(e.substitute(subst)),
        }
    }
    let evaluated_pc: PathCondition = ct.pc.iter().map(|e| e.substitute(subst)).collect();
    for e in &evaluated_pc {
        if !e.is_concrete() {
            let mut vs = BTreeSet::new();
            e.vars(&mut vs);
            let v = vs.into_iter().next().expect("non-concrete pc has a variable");
            return Err(TraceError::Uncovered(v));
        }
    }
    let consistent = pc_consistent(&evaluated_pc).expect("pc fully evaluated");
    let pc = if consistent {
        PathCondition::new()
    } else {
        evaluated_pc.clone()
    };
    Ok(Concretized {
        ct: ConditionedTrace::new(pc, out),
        consistent,
        evaluated_pc,
    })
}

/// A continuation marker: the not-yet-evaluated remainder of a task.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Continuation {
    /// `K(∅)`: evaluation complete.
    Empty,
    /// `K(s)`: statement `s` remains.
    Rest(Stmt),
}

impl Continuation {
    pub fn stmt(&self) -> Option<&Stmt> {
        match self {
            Continuation::Empty => None,
            Continuation::Rest(s) => Some(s),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Continuation::Empty)
    }
}

impl fmt::Display for Continuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Continuation::Empty => f.write_str("K(-)"),
            Continuation::Rest(s) => write!(f, "K({})", crate::lang::pretty::stmt_to_string(s)),
        }
    }
}

/// A local evaluation result: `pc |> tau . K(s)` with a finite non-empty
/// trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuationTrace {
    pub pc: PathCondition,
    pub tau: Trace,
    pub k: Continuation,
}

impl ContinuationTrace {
    pub fn new(pc: PathCondition, tau: Trace, k: Continuation) -> Self {
        debug_assert!(!tau.is_empty());
        ContinuationTrace { pc, tau, k }
    }

    pub fn conditioned(&self) -> ConditionedTrace {
        ConditionedTrace::new(self.pc.clone(), self.tau.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::ast::BinOp;
    use std::sync::Arc;

    fn var(s: &str) -> Var {
        Var::new(s)
    }

    fn proc(s: &str) -> crate::lang::ast::ProcName {
        crate::lang::ast::ProcName::new(s)
    }

    /// [x -> Y + 42, Y -> *]
    fn sym_state() -> SymState {
        SymState::from_bindings([
            (
                var("x"),
                Sexp::Binary(
                    BinOp::Add,
                    Arc::new(Sexp::Var(var("Y"))),
                    Arc::new(Sexp::int(42)),
                ),
            ),
            (var("Y"), Sexp::Star),
        ])
    }

    /// {Y > 0} |> <sigma> sigma[w -> 17]
    fn conditioned_example() -> ConditionedTrace {
        let sigma = sym_state();
        let mut tau = Trace::singleton(sigma.clone());
        tau.push_state(sigma.update(var("w"), Sexp::int(17)));
        let pc: PathCondition = [Sexp::Binary(
            BinOp::Lt,
            Arc::new(Sexp::int(0)),
            Arc::new(Sexp::Var(var("Y"))),
        )]
        .into_iter()
        .collect();
        ConditionedTrace::new(pc, tau)
    }

    #[test]
    fn chop_concatenates_and_merges_junction() {
        let s0 = SymState::empty();
        let s1 = s0.update(var("x"), Sexp::int(1));
        let s2 = s1.update(var("y"), Sexp::int(2));
        let mut t1 = Trace::singleton(s0.clone());
        t1.push_state(s1.clone());
        let mut t2 = Trace::singleton(s1.clone());
        t2.push_state(s2.clone());
        let r = chop(
            &ConditionedTrace::unconditional(t1),
            &ConditionedTrace::unconditional(t2),
        )
        .unwrap();
        assert_eq!(
            r.tau.items(),
            &[
                TraceItem::State(s0),
                TraceItem::State(s1),
                TraceItem::State(s2)
            ]
        );
        assert!(r.pc.is_empty());
    }

    #[test]
    fn chop_unions_path_conditions() {
        // split the running example trace at sigma and re-join
        let full = conditioned_example();
        let sigma = sym_state();
        let a = ConditionedTrace::new(full.pc.clone(), Trace::singleton(sigma.clone()));
        let mut b_tau = Trace::singleton(sigma.clone());
        b_tau.push_state(sigma.update(var("w"), Sexp::int(17)));
        let b_pc: PathCondition = [Sexp::bool(true)].into_iter().collect();
        let b = ConditionedTrace::new(b_pc.clone(), b_tau);
        let r = chop(&a, &b).unwrap();
        assert_eq!(r.tau, full.tau);
        let expected_pc: PathCondition = full.pc.union(&b_pc).cloned().collect();
        assert_eq!(r.pc, expected_pc);
    }

    #[test]
    fn chop_rejects_empty_first_argument() {
        let empty = ConditionedTrace::unconditional(Trace::empty());
        let b = ConditionedTrace::unconditional(Trace::singleton(SymState::empty()));
        assert_eq!(chop(&empty, &b), Err(TraceError::ChopUndefined));
    }

    #[test]
    fn chop_rejects_non_extending_junction() {
        let a = ConditionedTrace::unconditional(Trace::singleton(
            SymState::empty().update(var("x"), Sexp::int(1)),
        ));
        let b = ConditionedTrace::unconditional(Trace::singleton(
            SymState::empty().update(var("x"), Sexp::int(2)),
        ));
        assert_eq!(chop(&a, &b), Err(TraceError::JunctionMismatch));
    }

    #[test]
    fn insert_event_extends_state_with_fresh_symbols() {
        // inserting ev(Z) with fresh {Z} at the running example's sigma
        let sigma = sym_state();
        let t = insert_event(
            &sigma,
            Event::Comp {
                tid: Sexp::Var(var("Z")),
            },
            &[var("Z")],
        )
        .unwrap();
        let expected_state = sigma.extend_symbolic(&[var("Z")]);
        assert_eq!(
            t.items(),
            &[
                TraceItem::State(sigma.clone()),
                TraceItem::Event(Event::Comp {
                    tid: Sexp::Var(var("Z"))
                }),
                TraceItem::State(expected_state),
            ]
        );
    }

    #[test]
    fn insert_event_without_fresh_leaves_state_unchanged() {
        let sigma = sym_state();
        let t = insert_event(
            &sigma,
            Event::CallSpawn {
                proc: proc("m"),
                arg: Sexp::int(0),
            },
            &[],
        )
        .unwrap();
        assert_eq!(t.items()[0], TraceItem::State(sigma.clone()));
        assert_eq!(t.items()[2], TraceItem::State(sigma));
    }

    #[test]
    fn insert_event_rejects_fresh_clash() {
        let sigma = sym_state();
        let r = insert_event(
            &sigma,
            Event::Comp {
                tid: Sexp::Var(var("x")),
            },
            &[var("x")],
        );
        assert_eq!(r, Err(TraceError::FreshClash(var("x"))));
    }

    #[test]
    fn concretization_instantiates_states_and_pc() {
        // rho = [Y -> 3] applied to the running example
        let ct = conditioned_example();
        let rho = Concretisation::new([(var("Y"), Value::Int(3))]);
        let r = concretize(&rho, &ct).unwrap();
        assert!(r.consistent);
        assert!(r.ct.pc.is_empty(), "consistent pc is normalized away");
        let s0 = match &r.ct.tau.items()[0] {
            TraceItem::State(s) => s,
            _ => panic!(),
        };
        assert_eq!(s0.get(&var("x")), Some(&Sexp::int(45)));
        assert_eq!(s0.get(&var("Y")), Some(&Sexp::int(3)));
        let s1 = match &r.ct.tau.items()[1] {
            TraceItem::State(s) => s,
            _ => panic!(),
        };
        assert_eq!(s1.get(&var("w")), Some(&Sexp::int(17)));
    }

    #[test]
    fn concretization_identity_on_concrete_trace() {
        let s = SymState::from_bindings([(var("x"), Sexp::int(1))]);
        let ct = ConditionedTrace::unconditional(Trace::singleton(s));
        let r = concretize(&Concretisation::default(), &ct).unwrap();
        assert_eq!(r.ct, ct);
        assert!(r.consistent);
    }

    #[test]
    fn concretization_detects_inconsistent_pc() {
        let ct = conditioned_example();
        let rho = Concretisation::new([(var("Y"), Value::Int(0))]);
        let r = concretize(&rho, &ct).unwrap();
        assert!(!r.consistent);
        assert_eq!(
            r.evaluated_pc,
            [Sexp::bool(false)].into_iter().collect::<PathCondition>()
        );
    }

    #[test]
    fn concretization_requires_coverage() {
        let ct = conditioned_example();
        let r = concretize(&Concretisation::default(), &ct);
        assert_eq!(r, Err(TraceError::Uncovered(var("Y"))));
    }

    #[test]
    fn shape_check_catches_bare_events() {
        let mut t = Trace::singleton(SymState::empty());
        t.push_event_unchecked(Event::Done);
        assert!(t.check_shape().is_err());
        t.push_state(SymState::empty());
        assert!(t.check_shape().is_ok());
    }
}
