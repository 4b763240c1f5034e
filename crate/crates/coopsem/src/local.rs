//! Local evaluation of single statements to sets of continuation traces.
//!
//! Each function evaluates exactly one statement in a symbolic state and
//! returns every possible conditioned trace together with the continuation
//! holding the remaining work. Loops reduce to conditionals (the loop body
//! and the loop itself are placed inside the continuation), `;` threads
//! continuations with the rewrite `∅; s -> s` applied, and the empty
//! continuation evaluates to the empty set.
//!
//! Fresh symbolic variables (spawned task ids, procedure argument
//! placeholders, renamed parameters) are drawn from a caller-supplied
//! [`NameGen`], which keeps evaluation replayable.

use crate::lang::ast::*;
use crate::trace::{
    insert_event, Continuation, ContinuationTrace, EvalError, Event, NameGen, PathCondition,
    Sexp, SymState, Trace, TraceError,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("unknown procedure `{0}`")]
    UnknownProc(ProcName),
    #[error("statement {0} is not part of this evaluation level")]
    WrongLevel(StmtId),
}

pub type LocalResult = Result<Vec<ContinuationTrace>, LocalError>;

fn empty_pc() -> PathCondition {
    PathCondition::new()
}

/// `K(r'; s)` with the rewrite `∅; s -> s`. The rebuilt sequence node
/// reuses the original sequence's id, so repeated evaluations of the same
/// source point produce identical continuations.
fn seq_continuation(seq_id: StmtId, k: Continuation, rest: &Stmt) -> Continuation {
    match k {
        Continuation::Empty => Continuation::Rest(rest.clone()),
        Continuation::Rest(first) => Continuation::Rest(Stmt::new(
            seq_id,
            StmtKind::Seq {
                first,
                rest: rest.clone(),
            },
        )),
    }
}

/// The synthetic `body; while` statement of one loop unrolling. Its id is
/// a pure function of the loop's id, so every unrolling of the same loop
/// yields the same statement identity.
fn unrolled_loop_body(w: &Stmt) -> Stmt {
    let (body, _cond) = match w.kind() {
        StmtKind::While { body, cond } => (body, cond),
        _ => unreachable!("unrolled_loop_body on non-loop"),
    };
    let id = StmtId::new(w.id().line, w.id().col, SEQ_BASE_WHILE + w.id().seq);
    Stmt::new(
        id,
        StmtKind::Seq {
            first: body.clone(),
            rest: w.clone(),
        },
    )
}

/// Local evaluation for the sequential language.
pub fn val_while(sigma: &SymState, s: &Stmt) -> LocalResult {
    match s.kind() {
        StmtKind::Skip => Ok(vec![ContinuationTrace::new(
            empty_pc(),
            Trace::singleton(sigma.clone()),
            Continuation::Empty,
        )]),
        StmtKind::Assign { var, expr } => {
            let value = sigma.eval_expr(expr)?;
            let mut tau = Trace::singleton(sigma.clone());
            tau.push_state(sigma.update(var.clone(), value));
            Ok(vec![ContinuationTrace::new(
                empty_pc(),
                tau,
                Continuation::Empty,
            )])
        }
        StmtKind::If { cond, body } => {
            let taken = sigma.eval_expr(cond)?;
            let skipped = sigma.eval_expr(&Expr::not(cond.clone()))?;
            Ok(vec![
                ContinuationTrace::new(
                    [taken].into_iter().collect(),
                    Trace::singleton(sigma.clone()),
                    Continuation::Rest(body.clone()),
                ),
                ContinuationTrace::new(
                    [skipped].into_iter().collect(),
                    Trace::singleton(sigma.clone()),
                    Continuation::Empty,
                ),
            ])
        }
        StmtKind::Seq { first, rest } => {
            let inner = val_while(sigma, first)?;
            Ok(attach_rest(inner, s.id(), rest))
        }
        StmtKind::While { .. } => {
            let unrolled = Stmt::new(
                s.id(),
                StmtKind::If {
                    cond: match s.kind() {
                        StmtKind::While { cond, .. } => cond.clone(),
                        _ => unreachable!(),
                    },
                    body: unrolled_loop_body(s),
                },
            );
            val_while(sigma, &unrolled)
        }
        _ => Err(LocalError::WrongLevel(s.id())),
    }
}

fn attach_rest(
    inner: Vec<ContinuationTrace>,
    seq_id: StmtId,
    rest: &Stmt,
) -> Vec<ContinuationTrace> {
    inner
        .into_iter()
        .map(|ct| ContinuationTrace::new(ct.pc, ct.tau, seq_continuation(seq_id, ct.k, rest)))
        .collect()
}

/// Local evaluation for the Spawn and Guard languages. `spawn(m, e)` emits
/// an anonymous call event and is non-blocking; a guard contributes its
/// condition as the sole path condition.
pub fn val_spawn_guard(sigma: &SymState, s: &Stmt) -> LocalResult {
    match s.kind() {
        StmtKind::Spawn2 { proc, arg } => {
            let tau = insert_event(
                sigma,
                Event::CallSpawn {
                    proc: proc.clone(),
                    arg: Sexp::from_expr(arg),
                },
                &[],
            )?;
            Ok(vec![ContinuationTrace::new(
                empty_pc(),
                tau,
                Continuation::Empty,
            )])
        }
        StmtKind::Guard { cond, body } => {
            let g = sigma.eval_expr(cond)?;
            Ok(vec![ContinuationTrace::new(
                [g].into_iter().collect(),
                Trace::singleton(sigma.clone()),
                Continuation::Rest(body.clone()),
            )])
        }
        StmtKind::Seq { first, rest } => {
            let inner = val_spawn_guard(sigma, first)?;
            Ok(attach_rest(inner, s.id(), rest))
        }
        _ => val_while(sigma, s),
    }
}

/// Local evaluation for the cooperative language, parameterized by the
/// (symbolic or concrete) identifier of the current task.
pub fn val_coop(sigma: &SymState, task: &Sexp, s: &Stmt, names: &mut NameGen) -> LocalResult {
    match s.kind() {
        StmtKind::Spawn3 {
            proc,
            arg,
            task_var,
        } => {
            let fresh_tid = names.fresh_tid();
            let tau = insert_event(
                sigma,
                Event::Call {
                    arg: Sexp::from_expr(arg),
                    proc: proc.clone(),
                    tid: Sexp::Var(fresh_tid.clone()),
                },
                &[fresh_tid.clone()],
            )?;
            let extended = tau
                .last_state()
                .expect("event trace ends in a state")
                .update(task_var.clone(), Sexp::Var(fresh_tid));
            let mut tau = tau;
            tau.push_state(extended);
            Ok(vec![ContinuationTrace::new(
                empty_pc(),
                tau,
                Continuation::Empty,
            )])
        }
        StmtKind::Return => {
            let tau = insert_event(sigma, Event::Comp { tid: task.clone() }, &[])?;
            Ok(vec![ContinuationTrace::new(
                empty_pc(),
                tau,
                Continuation::Empty,
            )])
        }
        StmtKind::Await { task_var } => {
            let awaited = sigma.eval(&Sexp::Var(task_var.clone()))?;
            let tau = insert_event(sigma, Event::CompR { tid: awaited }, &[])?;
            Ok(vec![ContinuationTrace::new(
                empty_pc(),
                tau,
                Continuation::Empty,
            )])
        }
        StmtKind::Suspend => Ok(vec![ContinuationTrace::new(
            empty_pc(),
            Trace::singleton(sigma.clone()),
            Continuation::Empty,
        )]),
        StmtKind::Seq { first, rest } => {
            let inner = val_coop(sigma, task, first, names)?;
            Ok(attach_rest(inner, s.id(), rest))
        }
        StmtKind::Spawn2 { .. } | StmtKind::Guard { .. } => Err(LocalError::WrongLevel(s.id())),
        _ => val_while(sigma, s),
    }
}

/// Evaluates the body of procedure `m` on behalf of task `task`: emits the
/// call reaction event with a fresh argument placeholder `X`, binds the
/// renamed parameter to it, and appends `return` to the continuation. The
/// substituted body keeps its source statement ids.
pub fn val_proc_body(
    sigma: &SymState,
    task: &Sexp,
    m: &ProcName,
    program: &Program,
    names: &mut NameGen,
) -> LocalResult {
    let procedure = program
        .proc(m)
        .ok_or_else(|| LocalError::UnknownProc(m.clone()))?;
    let placeholder = names.fresh_sym();
    let param = names.fresh_param();
    let tau = insert_event(
        sigma,
        Event::CallR {
            arg: Sexp::Var(placeholder.clone()),
            proc: m.clone(),
            tid: task.clone(),
        },
        &[placeholder.clone()],
    )?;
    let extended = tau
        .last_state()
        .expect("event trace ends in a state")
        .update(param.clone(), Sexp::Var(placeholder));
    let mut tau = tau;
    tau.push_state(extended);
    let body = procedure
        .body_with_return
        .rename_var(&procedure.param, &param);
    Ok(vec![ContinuationTrace::new(
        empty_pc(),
        tau,
        Continuation::Rest(body),
    )])
}

/// Evaluates a continuation at the given level. `K(∅)` evaluates to the
/// empty set of traces.
pub fn val_cont(
    level: Level,
    sigma: &SymState,
    task: Option<&Sexp>,
    k: &Continuation,
    names: &mut NameGen,
) -> LocalResult {
    let s = match k {
        Continuation::Empty => return Ok(Vec::new()),
        Continuation::Rest(s) => s,
    };
    match level {
        Level::While => val_while(sigma, s),
        Level::Spawn | Level::Guard => val_spawn_guard(sigma, s),
        Level::Coop => val_coop(
            sigma,
            task.expect("cooperative evaluation needs a task id"),
            s,
            names,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;
    use crate::trace::TraceItem;

    fn var(s: &str) -> Var {
        Var::new(s)
    }

    fn main_of(src: &str, level: Level) -> (Program, Stmt) {
        let p = parse_program(src, level).unwrap();
        let main = p.main.clone();
        (p, main)
    }

    #[test]
    fn skip_returns_singleton_with_empty_continuation() {
        let (_, s) = main_of("{ skip }", Level::While);
        let sigma = SymState::empty();
        let r = val_while(&sigma, &s).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].pc.is_empty());
        assert_eq!(r[0].tau.items(), &[TraceItem::State(sigma)]);
        assert_eq!(r[0].k, Continuation::Empty);
    }

    #[test]
    fn sequence_evaluates_head_and_defers_rest() {
        // evaluating x := 1; y := x + 1 performs the first assignment and
        // leaves the second in the continuation
        let (_, s) = main_of("{ x := 1; y := x + 1 }", Level::While);
        let sigma = SymState::empty();
        let r = val_while(&sigma, &s).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].pc.is_empty());
        assert_eq!(
            r[0].tau.items(),
            &[
                TraceItem::State(sigma.clone()),
                TraceItem::State(sigma.update(var("x"), Sexp::int(1))),
            ]
        );
        match &r[0].k {
            Continuation::Rest(rest) => {
                assert!(matches!(
                    rest.kind(),
                    StmtKind::Assign { var: v, .. } if v.as_str() == "y"
                ));
            }
            other => panic!("expected pending assignment, got {other:?}"),
        }
    }

    #[test]
    fn conditional_produces_complementary_path_conditions() {
        let (_, s) = main_of("{ if b { skip } }", Level::While);
        let sigma = SymState::from_bindings([(var("b"), Sexp::Star)]);
        let r = val_while(&sigma, &s).unwrap();
        assert_eq!(r.len(), 2);
        let taken: Vec<_> = r[0].pc.iter().cloned().collect();
        assert_eq!(taken, vec![Sexp::Var(var("b"))]);
        let skipped: Vec<_> = r[1].pc.iter().cloned().collect();
        assert_eq!(
            skipped,
            vec![Sexp::Unary(UnOp::Not, Sexp::Var(var("b")).into())]
        );
        assert!(matches!(r[0].k, Continuation::Rest(_)));
        assert_eq!(r[1].k, Continuation::Empty);
    }

    #[test]
    fn empty_continuation_evaluates_to_empty_set() {
        let mut names = NameGen::new(0);
        let r = val_cont(
            Level::While,
            &SymState::empty(),
            None,
            &Continuation::Empty,
            &mut names,
        )
        .unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn loop_reduces_to_conditional_without_unrolling_state() {
        let (_, s) = main_of("{ while x < 2 { x := x + 1 } }", Level::While);
        let sigma = SymState::from_bindings([(var("x"), Sexp::int(0))]);
        let r = val_while(&sigma, &s).unwrap();
        assert_eq!(r.len(), 2);
        // true branch: continuation is body; while, trace is just <sigma>
        assert_eq!(r[0].pc.iter().next(), Some(&Sexp::bool(true)));
        assert_eq!(r[0].tau.len(), 1);
        match &r[0].k {
            Continuation::Rest(rest) => match rest.kind() {
                StmtKind::Seq { first, rest } => {
                    assert!(matches!(first.kind(), StmtKind::Assign { .. }));
                    assert!(matches!(rest.kind(), StmtKind::While { .. }));
                }
                other => panic!("expected body; while, got {other:?}"),
            },
            other => panic!("expected continuation, got {other:?}"),
        }
        assert_eq!(r[1].pc.iter().next(), Some(&Sexp::bool(false)));
        assert_eq!(r[1].k, Continuation::Empty);
    }

    #[test]
    fn repeated_unrollings_share_identity() {
        let (_, s) = main_of("{ while true { skip } }", Level::While);
        let sigma = SymState::empty();
        let r1 = val_while(&sigma, &s).unwrap();
        let r2 = val_while(&sigma, &s).unwrap();
        assert_eq!(r1[0].k, r2[0].k);
    }

    #[test]
    fn spawn_emits_call_event_and_empty_continuation() {
        let (_, s) = main_of("m(x){ skip } { spawn(m, 0) }", Level::Spawn);
        let sigma = SymState::empty();
        let r = val_spawn_guard(&sigma, &s).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].pc.is_empty());
        assert_eq!(
            r[0].tau.items(),
            &[
                TraceItem::State(sigma.clone()),
                TraceItem::Event(Event::CallSpawn {
                    proc: ProcName::new("m"),
                    arg: Sexp::int(0),
                }),
                TraceItem::State(sigma),
            ]
        );
        assert_eq!(r[0].k, Continuation::Empty);
    }

    #[test]
    fn guard_contributes_its_condition_as_path_condition() {
        let (_, s) = main_of("{ :: b; skip }", Level::Guard);
        let tt = SymState::from_bindings([(var("b"), Sexp::bool(true))]);
        let r = val_spawn_guard(&tt, &s).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].pc.iter().next(), Some(&Sexp::bool(true)));
        assert!(matches!(r[0].k, Continuation::Rest(_)));

        let ff = SymState::from_bindings([(var("b"), Sexp::bool(false))]);
        let r = val_spawn_guard(&ff, &s).unwrap();
        assert_eq!(r[0].pc.iter().next(), Some(&Sexp::bool(false)));
        assert!(matches!(r[0].k, Continuation::Rest(_)));
    }

    #[test]
    fn spawn3_introduces_fresh_symbolic_task_id() {
        let (_, s) = main_of("m(x){ skip } { spawn(m, 0, z) }", Level::Coop);
        let sigma = SymState::from_bindings([(var("z"), Sexp::int(0))]);
        let mut names = NameGen::new(0);
        let r = val_coop(&sigma, &Sexp::int(0), &s, &mut names).unwrap();
        assert_eq!(r.len(), 1);
        let items = r[0].tau.items();
        assert_eq!(items.len(), 4);
        let fresh = match &items[1] {
            TraceItem::Event(Event::Call { arg, proc, tid }) => {
                assert_eq!(arg, &Sexp::int(0));
                assert_eq!(proc.as_str(), "m");
                match tid {
                    Sexp::Var(v) => v.clone(),
                    other => panic!("expected symbolic task id, got {other}"),
                }
            }
            other => panic!("expected call event, got {other:?}"),
        };
        assert!(fresh.is_generated());
        let last = match &items[3] {
            TraceItem::State(s) => s,
            other => panic!("expected state, got {other:?}"),
        };
        assert_eq!(last.get(&var("z")), Some(&Sexp::Var(fresh.clone())));
        assert_eq!(last.get(&fresh), Some(&Sexp::Star));
        assert_eq!(r[0].k, Continuation::Empty);
    }

    #[test]
    fn suspend_is_a_stateless_step() {
        let (_, s) = main_of("{ suspend }", Level::Coop);
        let sigma = SymState::empty();
        let mut names = NameGen::new(0);
        let r = val_coop(&sigma, &Sexp::int(0), &s, &mut names).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].pc.is_empty());
        assert_eq!(r[0].tau.items(), &[TraceItem::State(sigma)]);
        assert_eq!(r[0].k, Continuation::Empty);
    }

    #[test]
    fn await_emits_completion_reaction_for_stored_id() {
        let (_, s) = main_of("{ await x }", Level::Coop);
        let sigma = SymState::from_bindings([(var("x"), Sexp::int(4))]);
        let mut names = NameGen::new(0);
        let r = val_coop(&sigma, &Sexp::int(0), &s, &mut names).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(
            r[0].tau.items()[1],
            TraceItem::Event(Event::CompR { tid: Sexp::int(4) })
        );
        assert_eq!(r[0].k, Continuation::Empty);
    }

    #[test]
    fn procedure_body_gets_renamed_parameter_and_trailing_return() {
        let (p, _) = main_of("m(x){ suspend } { spawn(m, 0, z) }", Level::Coop);
        let sigma = SymState::empty();
        let mut names = NameGen::new(0);
        let r = val_proc_body(&sigma, &Sexp::int(1), &ProcName::new("m"), &p, &mut names).unwrap();
        assert_eq!(r.len(), 1);
        match &r[0].tau.items()[1] {
            TraceItem::Event(Event::CallR { arg, tid, .. }) => {
                assert!(matches!(arg, Sexp::Var(v) if v.is_generated()));
                assert_eq!(tid, &Sexp::int(1));
            }
            other => panic!("expected call reaction, got {other:?}"),
        }
        match &r[0].k {
            Continuation::Rest(body) => match body.kind() {
                StmtKind::Seq { first, rest } => {
                    assert!(matches!(first.kind(), StmtKind::Suspend));
                    assert!(matches!(rest.kind(), StmtKind::Return));
                }
                other => panic!("expected body; return, got {other:?}"),
            },
            other => panic!("expected continuation, got {other:?}"),
        }
    }

    #[test]
    fn smallest_procedure_body_is_skip_then_return() {
        let (p, _) = main_of("m(x){ skip } { spawn(m, 0, z) }", Level::Coop);
        let mut names = NameGen::new(0);
        let r = val_proc_body(
            &SymState::empty(),
            &Sexp::int(1),
            &ProcName::new("m"),
            &p,
            &mut names,
        )
        .unwrap();
        match &r[0].k {
            Continuation::Rest(body) => match body.kind() {
                StmtKind::Seq { first, rest } => {
                    assert!(matches!(first.kind(), StmtKind::Skip));
                    assert!(matches!(rest.kind(), StmtKind::Return));
                }
                other => panic!("unexpected body {other:?}"),
            },
            other => panic!("expected continuation, got {other:?}"),
        }
    }

    #[test]
    fn unknown_procedure_is_an_error() {
        let (p, _) = main_of("m(x){ skip } { spawn(m, 0, z) }", Level::Coop);
        let mut names = NameGen::new(0);
        let r = val_proc_body(
            &SymState::empty(),
            &Sexp::int(1),
            &ProcName::new("nope"),
            &p,
            &mut names,
        );
        assert!(matches!(r, Err(LocalError::UnknownProc(_))));
    }

    #[test]
    fn substituted_body_keeps_statement_ids() {
        let (p, _) = main_of("m(x){ i := x } { spawn(m, 7, z) }", Level::Coop);
        let mut names = NameGen::new(0);
        let r = val_proc_body(
            &SymState::empty(),
            &Sexp::int(1),
            &ProcName::new("m"),
            &p,
            &mut names,
        )
        .unwrap();
        let body = r[0].k.stmt().unwrap();
        let mut ids = Vec::new();
        body.all_ids(&mut ids);
        assert!(ids.contains(&p.procs[0].body.id()));
    }
}
