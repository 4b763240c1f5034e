//! Global composition: nondeterministic interleaving semantics over
//! multisets of continuations, plus a bounded breadth-first explorer.
//!
//! Configurations pair the concrete trace produced so far with the pending
//! continuations. One composition step selects a continuation, evaluates
//! it locally, concretizes fresh symbolic variables in the only way
//! well-formedness admits, and chops the resulting concrete trace onto the
//! global one.

use crate::fairness::identity::{canonical_cont_key, source_state_key, tid_int, StmtIdentity};
use crate::lang::ast::{Level, ProcName, Program, Stmt, Var};
use crate::local::{val_coop, val_proc_body, val_spawn_guard, val_while, LocalError};
use crate::trace::{
    chop_extend, concretize, pc_consistent, wf_coop_can_append, wf_spawn, Concretisation,
    ContinuationTrace, Continuation, Event, NameGen, Sexp, SymState, Trace, TraceError,
    TraceItem, Value,
};
use crate::util::Multiset;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use thiserror::Error;

/// Identifiers of the composition and scheduler rules, using the numbering
/// of the rule definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    R2,
    R4,
    R5,
    R6,
    R7,
    R8,
    R10,
    R16,
    R17,
    R18,
    R19,
    R20,
    R21,
    R22,
    R23,
    R24,
}

impl RuleId {
    pub fn number(self) -> u32 {
        match self {
            RuleId::R2 => 2,
            RuleId::R4 => 4,
            RuleId::R5 => 5,
            RuleId::R6 => 6,
            RuleId::R7 => 7,
            RuleId::R8 => 8,
            RuleId::R10 => 10,
            RuleId::R16 => 16,
            RuleId::R17 => 17,
            RuleId::R18 => 18,
            RuleId::R19 => 19,
            RuleId::R20 => 20,
            RuleId::R21 => 21,
            RuleId::R22 => 22,
            RuleId::R23 => 23,
            RuleId::R24 => 24,
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GlobalError {
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("internal invariant broken: {0}")]
    Internal(String),
}

/// A task-id-tagged continuation `K^f(s)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskCont {
    pub tid: i64,
    pub cont: Continuation,
}

impl TaskCont {
    pub fn new(tid: i64, cont: Continuation) -> Self {
        TaskCont { tid, cont }
    }

    pub fn stmt(&self) -> Option<&Stmt> {
        self.cont.stmt()
    }

    /// A task is suspended when its statement starts with `await` or
    /// `suspend`.
    pub fn is_suspended(&self) -> bool {
        self.stmt().map(Stmt::is_suspended).unwrap_or(false)
    }
}

impl fmt::Display for TaskCont {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.cont {
            Continuation::Empty => write!(f, "K^f{}(-)", self.tid),
            Continuation::Rest(s) => write!(
                f,
                "K^f{}({})",
                self.tid,
                crate::lang::pretty::stmt_to_string(s)
            ),
        }
    }
}

/// The initial state: every program variable bound to 0.
pub fn initial_state(program: &Program) -> SymState {
    SymState::from_bindings(program.vars.iter().map(|v| (v.clone(), Sexp::int(0))))
}

// ---------------------------------------------------------------------
// While
// ---------------------------------------------------------------------

/// Sequential configuration: a concrete trace and one continuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhileConfig {
    pub sh: Trace,
    pub k: Continuation,
}

impl WhileConfig {
    pub fn initial(program: &Program) -> Self {
        WhileConfig {
            sh: Trace::singleton(initial_state(program)),
            k: Continuation::Rest(program.main.clone()),
        }
    }
}

/// One sequential composition step. Picks the unique consistent local
/// trace and chops it onto the global one. `None` when the continuation
/// is empty.
pub fn step_while(c: &WhileConfig) -> Result<Option<WhileConfig>, GlobalError> {
    let s = match &c.k {
        Continuation::Empty => return Ok(None),
        Continuation::Rest(s) => s,
    };
    let sigma = c
        .sh
        .last_state()
        .ok_or_else(|| GlobalError::Internal("empty global trace".into()))?;
    let results = val_while(sigma, s)?;
    let mut chosen: Option<ContinuationTrace> = None;
    for ct in results {
        if pc_consistent(&ct.pc).map_err(|e| GlobalError::Internal(e.to_string()))? {
            if chosen.is_some() {
                return Err(GlobalError::Internal(
                    "two consistent local traces for a sequential statement".into(),
                ));
            }
            chosen = Some(ct);
        }
    }
    let ct = chosen.ok_or_else(|| {
        GlobalError::Internal("no consistent local trace for a sequential statement".into())
    })?;
    let mut sh = c.sh.clone();
    chop_extend(&mut sh, &ct.tau)?;
    Ok(Some(WhileConfig { sh, k: ct.k }))
}

// ---------------------------------------------------------------------
// Spawn / Guard
// ---------------------------------------------------------------------

/// Pool configuration: trace plus a multiset of anonymous continuations.
/// Empty continuations are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolConfig {
    pub sh: Trace,
    pub pool: Multiset<Continuation>,
}

impl PoolConfig {
    pub fn initial(program: &Program) -> Self {
        let mut pool = Multiset::new();
        pool.insert(Continuation::Rest(program.main.clone()));
        PoolConfig {
            sh: Trace::singleton(initial_state(program)),
            pool,
        }
    }

    pub fn insert_simplified(&mut self, k: Continuation) {
        if !k.is_empty() {
            self.pool.insert(k);
        }
    }

    /// Identity multiset of the pooled continuations.
    pub fn identities(&self) -> Multiset<StmtIdentity> {
        self.pool
            .iter()
            .filter_map(|k| StmtIdentity::of_continuation(k, None))
            .collect()
    }

    /// Abstraction key: source state, canonicalized continuations, and
    /// unresolved call counters. The trace prefix is deliberately dropped.
    pub fn key(&self) -> String {
        let sigma = self.sh.last_state().expect("non-empty trace");
        let mut conts: Vec<String> = self
            .pool
            .iter()
            .filter_map(|k| k.stmt().map(|s| canonical_cont_key(s, None, sigma)))
            .collect();
        conts.sort();
        let mut unresolved: Vec<String> = Vec::new();
        for (ev, n) in self.sh.event_counts() {
            if let Event::CallSpawn { proc, arg } = ev {
                let reacted = self.sh.count_event(&Event::CallRSpawn {
                    proc: proc.clone(),
                    arg: arg.clone(),
                });
                if n > reacted {
                    unresolved.push(format!("{proc}({arg})x{}", n - reacted));
                }
            }
        }
        unresolved.sort();
        format!(
            "P|{}|{}|{}",
            source_state_key(sigma),
            conts.join(";"),
            unresolved.join(";")
        )
    }
}

/// Unresolved anonymous calls `(m, v)` in the trace, in deterministic
/// order.
pub fn unresolved_spawn_calls(sh: &Trace) -> Vec<(ProcName, Sexp)> {
    let mut out: BTreeSet<(ProcName, Sexp)> = BTreeSet::new();
    for (ev, n) in sh.event_counts() {
        if let Event::CallSpawn { proc, arg } = ev {
            let reacted = sh.count_event(&Event::CallRSpawn {
                proc: proc.clone(),
                arg: arg.clone(),
            });
            if n > reacted {
                out.insert((proc.clone(), arg.clone()));
            }
        }
    }
    out.into_iter().collect()
}

/// All configurations reachable from `c` by one composition step: either
/// evaluating one pooled continuation (rule 4) or starting an unresolved
/// procedure call (rule 5).
pub fn successors_spawn(
    c: &PoolConfig,
    program: &Program,
    names: &mut NameGen,
) -> Result<Vec<(RuleId, PoolConfig)>, GlobalError> {
    let sigma = c
        .sh
        .last_state()
        .ok_or_else(|| GlobalError::Internal("empty global trace".into()))?
        .clone();
    let mut out = Vec::new();

    // rule 4: evaluate any pooled continuation with a consistent pc
    for (k, _count) in c.pool.entries() {
        let s = k.stmt().expect("empty continuations are never pooled");
        for ct in val_spawn_guard(&sigma, s)? {
            let consistent =
                pc_consistent(&ct.pc).map_err(|e| GlobalError::Internal(e.to_string()))?;
            if !consistent {
                continue;
            }
            let mut next = c.clone();
            chop_extend(&mut next.sh, &ct.tau)?;
            next.pool.remove(k);
            next.insert_simplified(ct.k.clone());
            debug_assert!(wf_spawn(&next.sh));
            out.push((RuleId::R4, next));
        }
    }

    // rule 5: start a procedure body for any unresolved call
    for (proc, arg) in unresolved_spawn_calls(&c.sh) {
        let procedure = program
            .proc(&proc)
            .ok_or(LocalError::UnknownProc(proc.clone()))?;
        let fresh = names.fresh_param();
        let tau = crate::trace::insert_event(
            &sigma,
            Event::CallRSpawn {
                proc: proc.clone(),
                arg: arg.clone(),
            },
            &[],
        )?;
        let mut next = c.clone();
        chop_extend(&mut next.sh, &tau)?;
        next.sh.push_state(sigma.update(fresh.clone(), arg.clone()));
        let body = procedure.body.rename_var(&procedure.param, &fresh);
        next.insert_simplified(Continuation::Rest(body));
        debug_assert!(wf_spawn(&next.sh));
        out.push((RuleId::R5, next));
    }

    Ok(out)
}

// ---------------------------------------------------------------------
// CoopWhile
// ---------------------------------------------------------------------

/// Cooperative configuration: trace plus task-id-tagged continuations,
/// at most one of which is not suspended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoopConfig {
    pub sh: Trace,
    pub tasks: Multiset<TaskCont>,
}

/// The task id of the initial (main) task.
pub const INITIAL_TID: i64 = 0;

impl CoopConfig {
    pub fn initial(program: &Program) -> Self {
        let mut tasks = Multiset::new();
        tasks.insert(TaskCont::new(
            INITIAL_TID,
            Continuation::Rest(program.main.clone()),
        ));
        CoopConfig {
            sh: Trace::singleton(initial_state(program)),
            tasks,
        }
    }

    pub fn insert_simplified(&mut self, t: TaskCont) {
        if !t.cont.is_empty() {
            self.tasks.insert(t);
        }
    }

    /// The unique non-suspended task, if any.
    pub fn active(&self) -> Option<&TaskCont> {
        let mut found = None;
        for (t, n) in self.tasks.entries() {
            if !t.is_suspended() {
                debug_assert!(found.is_none() && n == 1, "more than one active task");
                found = Some(t);
            }
        }
        found
    }

    /// Quiescent: no non-suspended task.
    pub fn is_quiescent(&self) -> bool {
        self.active().is_none()
    }

    pub fn identities(&self) -> Multiset<StmtIdentity> {
        self.tasks
            .iter()
            .filter_map(|t| StmtIdentity::of_continuation(&t.cont, Some(t.tid)))
            .collect()
    }

    pub fn key(&self) -> String {
        let sigma = self.sh.last_state().expect("non-empty trace");
        let mut conts: Vec<String> = self
            .tasks
            .iter()
            .filter_map(|t| t.stmt().map(|s| canonical_cont_key(s, Some(t.tid), sigma)))
            .collect();
        conts.sort();
        let mut unresolved: Vec<String> = unresolved_coop_calls(&self.sh)
            .into_iter()
            .map(|(arg, proc, tid)| format!("{arg}:{proc}:{tid}"))
            .collect();
        unresolved.sort();
        let completed: Vec<String> = self
            .sh
            .all_tids()
            .into_iter()
            .filter(|f| self.sh.has_comp_tid(*f))
            .map(|f| f.to_string())
            .collect();
        format!(
            "C|{}|{}|{}|{}",
            source_state_key(sigma),
            conts.join(";"),
            unresolved.join(";"),
            completed.join(",")
        )
    }
}

/// Unresolved cooperative calls `(v, m, f)`: spawned tasks not yet
/// started, in task-id order.
pub fn unresolved_coop_calls(sh: &Trace) -> Vec<(Sexp, ProcName, Value)> {
    let mut out: BTreeMap<Value, (Sexp, ProcName)> = BTreeMap::new();
    for (ev, _) in sh.event_counts() {
        if let Event::Call { arg, proc, tid } = ev {
            if let Some(f) = tid.as_value() {
                if !sh.has_callr_tid(f) {
                    out.insert(f, (arg.clone(), proc.clone()));
                }
            }
        }
    }
    out.into_iter()
        .map(|(f, (arg, proc))| (arg, proc, f))
        .collect()
}

/// The smallest natural number not used as a task id. The initial task id
/// is always considered used.
pub fn fresh_concrete_tid(sh: &Trace) -> i64 {
    let used: BTreeSet<i64> = sh
        .all_tids()
        .into_iter()
        .map(tid_int)
        .chain(std::iter::once(INITIAL_TID))
        .collect();
    let mut candidate = 0;
    while used.contains(&candidate) {
        candidate += 1;
    }
    candidate
}

/// A locally evaluated step made concrete: the forced concretisation has
/// been applied and all admissibility premises hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmittedStep {
    pub tau: Trace,
    pub k: Continuation,
    pub rho: Concretisation,
}

/// Applies the concretisation forced by well-formedness to a local
/// cooperative trace and checks the step premises (`rho(pc)` consistent,
/// trace well-formedness preserved). Returns `None` when no admissible
/// concretisation exists.
pub fn admit_coop_step(
    sh: &Trace,
    ct: &ContinuationTrace,
) -> Result<Option<AdmittedStep>, GlobalError> {
    let last = ct
        .tau
        .last_state()
        .ok_or_else(|| GlobalError::Internal("local trace without final state".into()))?;
    let mut rho = BTreeMap::new();
    for sym in last.symbolic_vars() {
        // identify the event that introduced this symbolic variable
        let mut resolved = false;
        for item in ct.tau.items() {
            if let TraceItem::Event(ev) = item {
                match ev {
                    Event::Call {
                        tid: Sexp::Var(v), ..
                    } if *v == sym => {
                        rho.insert(sym.clone(), Value::Int(fresh_concrete_tid(sh)));
                        resolved = true;
                        break;
                    }
                    Event::CallR {
                        arg: Sexp::Var(v),
                        proc,
                        tid,
                    } if *v == sym => {
                        let Some(f) = tid.as_value() else {
                            return Err(GlobalError::Internal(
                                "call reaction with symbolic task id".into(),
                            ));
                        };
                        // the unique unresolved call with this id fixes the argument
                        let matching = unresolved_coop_calls(sh)
                            .into_iter()
                            .find(|(_, m, t)| m == proc && *t == f);
                        match matching {
                            Some((Sexp::Val(v), _, _)) => {
                                rho.insert(sym.clone(), v);
                                resolved = true;
                            }
                            _ => return Ok(None),
                        }
                        break;
                    }
                    _ => {}
                }
            }
        }
        if !resolved {
            return Ok(None);
        }
    }
    let concretized = concretize(&Concretisation { map: rho.clone() }, &ct.conditioned())?;
    if !concretized.consistent {
        return Ok(None);
    }
    {
        let mut events = concretized.ct.tau.events();
        if let Some(ev) = events.next() {
            let only_one = events.next().is_none();
            debug_assert!(only_one, "local traces carry at most one event");
            if !wf_coop_can_append(sh, ev) {
                return Ok(None);
            }
        }
    }
    Ok(Some(AdmittedStep {
        tau: concretized.ct.tau,
        k: ct.k.clone(),
        rho: Concretisation { map: rho },
    }))
}

/// All configurations reachable from `c` by one cooperative composition
/// step: progressing a task (rule 16) or starting a spawned one (rule 17).
pub fn successors_coop(
    c: &CoopConfig,
    program: &Program,
    names: &mut NameGen,
) -> Result<Vec<(RuleId, CoopConfig)>, GlobalError> {
    let sigma = c
        .sh
        .last_state()
        .ok_or_else(|| GlobalError::Internal("empty global trace".into()))?
        .clone();
    let mut out = Vec::new();

    // rule 16: if a task is active only it may progress; otherwise any
    // suspended task whose step is admissible may be resumed
    let candidates: Vec<TaskCont> = match c.active() {
        Some(active) => vec![active.clone()],
        None => c.tasks.entries().map(|(t, _)| t.clone()).collect(),
    };
    for task in candidates {
        let s = task.stmt().expect("empty continuations are never stored");
        let tid = Sexp::int(task.tid);
        for ct in val_coop(&sigma, &tid, s, names)? {
            if let Some(step) = admit_coop_step(&c.sh, &ct)? {
                let mut next = c.clone();
                chop_extend(&mut next.sh, &step.tau)?;
                next.tasks.remove(&task);
                next.insert_simplified(TaskCont::new(task.tid, step.k));
                debug_assert!(crate::trace::wf_coop(&next.sh));
                out.push((RuleId::R16, next));
            }
        }
    }

    // rule 17: when no task is active, start any unresolved spawned task
    if c.active().is_none() {
        for (_, proc, f) in unresolved_coop_calls(&c.sh) {
            let tid = tid_int(f);
            for ct in val_proc_body(&sigma, &Sexp::int(tid), &proc, program, names)? {
                if let Some(step) = admit_coop_step(&c.sh, &ct)? {
                    let mut next = c.clone();
                    chop_extend(&mut next.sh, &step.tau)?;
                    next.insert_simplified(TaskCont::new(tid, step.k));
                    debug_assert!(crate::trace::wf_coop(&next.sh));
                    out.push((RuleId::R17, next));
                }
            }
        }
    }

    Ok(out)
}

// ---------------------------------------------------------------------
// Bounded exploration
// ---------------------------------------------------------------------

/// A configuration of whichever level is being explored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeConfig {
    While(WhileConfig),
    Pool(PoolConfig),
    Coop(CoopConfig),
}

impl NodeConfig {
    pub fn initial(program: &Program) -> Self {
        match program.level {
            Level::While => NodeConfig::While(WhileConfig::initial(program)),
            Level::Spawn | Level::Guard => NodeConfig::Pool(PoolConfig::initial(program)),
            Level::Coop => NodeConfig::Coop(CoopConfig::initial(program)),
        }
    }

    pub fn key(&self) -> String {
        match self {
            NodeConfig::While(c) => {
                let sigma = c.sh.last_state().expect("non-empty trace");
                let cont = match &c.k {
                    Continuation::Empty => String::new(),
                    Continuation::Rest(s) => canonical_cont_key(s, None, sigma),
                };
                format!("W|{}|{}", source_state_key(sigma), cont)
            }
            NodeConfig::Pool(c) => c.key(),
            NodeConfig::Coop(c) => c.key(),
        }
    }

    pub fn identities(&self) -> Multiset<StmtIdentity> {
        match self {
            NodeConfig::While(c) => {
                let mut ms = Multiset::new();
                if let Some(id) = StmtIdentity::of_continuation(&c.k, None) {
                    ms.insert(id);
                }
                ms
            }
            NodeConfig::Pool(c) => c.identities(),
            NodeConfig::Coop(c) => c.identities(),
        }
    }

    pub fn successors(
        &self,
        program: &Program,
        names: &mut NameGen,
    ) -> Result<Vec<(RuleId, NodeConfig)>, GlobalError> {
        match self {
            NodeConfig::While(c) => Ok(step_while(c)?
                .map(|next| vec![(RuleId::R2, NodeConfig::While(next))])
                .unwrap_or_default()),
            NodeConfig::Pool(c) => Ok(successors_spawn(c, program, names)?
                .into_iter()
                .map(|(r, cfg)| (r, NodeConfig::Pool(cfg)))
                .collect()),
            NodeConfig::Coop(c) => Ok(successors_coop(c, program, names)?
                .into_iter()
                .map(|(r, cfg)| (r, NodeConfig::Coop(cfg)))
                .collect()),
        }
    }

    pub fn trace(&self) -> &Trace {
        match self {
            NodeConfig::While(c) => &c.sh,
            NodeConfig::Pool(c) => &c.sh,
            NodeConfig::Coop(c) => &c.sh,
        }
    }

    pub fn is_quiescent(&self) -> bool {
        match self {
            NodeConfig::While(_) => false,
            // every pooled continuation is schedulable at the Spawn level
            NodeConfig::Pool(_) => true,
            NodeConfig::Coop(c) => c.is_quiescent(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub key: String,
    pub config: NodeConfig,
    pub depth: usize,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub rule: RuleId,
    pub label: Multiset<StmtIdentity>,
}

#[derive(Debug, Clone)]
pub struct Graph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub truncated: bool,
}

impl Graph {
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, node) in self.nodes.iter().enumerate() {
            out.push_str(&format!("NODE {i} {}\n", node.key));
        }
        for e in &self.edges {
            out.push_str(&format!("EDGE {} {} {} {}\n", e.from, e.to, e.rule, e.label));
        }
        if self.truncated {
            out.push_str("TRUNCATED\n");
        }
        out
    }

    pub fn outgoing(&self, node: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == node)
    }
}

/// Breadth-first enumeration of configurations reachable within `depth`
/// composition steps, deduplicated by abstraction key. `node_cap` bounds
/// the graph size; exceeding it flags the graph as truncated.
pub fn explore(
    program: &Program,
    depth: usize,
    names: &mut NameGen,
    node_cap: usize,
) -> Result<Graph, GlobalError> {
    let initial = NodeConfig::initial(program);
    let mut nodes = vec![Node {
        key: initial.key(),
        config: initial,
        depth: 0,
    }];
    let mut edges: Vec<Edge> = Vec::new();
    let mut by_key: HashMap<String, usize> = HashMap::new();
    by_key.insert(nodes[0].key.clone(), 0);
    let mut frontier: VecDeque<usize> = VecDeque::from([0]);
    let mut truncated = false;

    while let Some(idx) = frontier.pop_front() {
        if nodes[idx].depth >= depth {
            continue;
        }
        let from_identities = nodes[idx].config.identities();
        let succs = nodes[idx].config.successors(program, names)?;
        for (rule, cfg) in succs {
            let label = cfg.identities().difference(&from_identities);
            let key = cfg.key();
            let to = match by_key.get(&key) {
                Some(&i) => i,
                None => {
                    if nodes.len() >= node_cap {
                        truncated = true;
                        continue;
                    }
                    let i = nodes.len();
                    nodes.push(Node {
                        key: key.clone(),
                        config: cfg,
                        depth: nodes[idx].depth + 1,
                    });
                    by_key.insert(key, i);
                    frontier.push_back(i);
                    i
                }
            };
            if !edges
                .iter()
                .any(|e| e.from == idx && e.to == to && e.rule == rule)
            {
                edges.push(Edge {
                    from: idx,
                    to,
                    rule,
                    label,
                });
            }
        }
    }

    Ok(Graph {
        nodes,
        edges,
        truncated,
    })
}

/// Program variables assigned anywhere (used by analyses and generators).
pub fn assigned_vars(program: &Program) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    let mut stack = vec![&program.main];
    for p in &program.procs {
        stack.push(&p.body);
    }
    use crate::lang::ast::StmtKind;
    while let Some(s) = stack.pop() {
        match s.kind() {
            StmtKind::Assign { var, .. } => {
                out.insert(var.clone());
            }
            StmtKind::Spawn3 { task_var, .. } => {
                out.insert(task_var.clone());
            }
            StmtKind::If { body, .. }
            | StmtKind::While { body, .. }
            | StmtKind::Guard { body, .. } => stack.push(body),
            StmtKind::Seq { first, rest } => {
                stack.push(first);
                stack.push(rest);
            }
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    fn example1() -> Program {
        parse_program(
            "m(x){ while true { suspend; i := 1 } } { spawn(m,0,z); suspend; j := 2 }",
            Level::Coop,
        )
        .unwrap()
    }

    #[test]
    fn while_steps_through_sequence() {
        let p = parse_program("{ x := 1; y := x + 1 }", Level::While).unwrap();
        let c0 = WhileConfig::initial(&p);
        let c1 = step_while(&c0).unwrap().unwrap();
        let sigma1 = c1.sh.last_state().unwrap();
        assert_eq!(sigma1.get(&Var::new("x")), Some(&Sexp::int(1)));
        assert!(matches!(c1.k, Continuation::Rest(_)));
        let c2 = step_while(&c1).unwrap().unwrap();
        let sigma2 = c2.sh.last_state().unwrap();
        assert_eq!(sigma2.get(&Var::new("y")), Some(&Sexp::int(2)));
        assert_eq!(c2.k, Continuation::Empty);
        assert!(step_while(&c2).unwrap().is_none());
    }

    #[test]
    fn while_skip_extends_trace_by_nothing() {
        let p = parse_program("{ skip }", Level::While).unwrap();
        let c0 = WhileConfig::initial(&p);
        let c1 = step_while(&c0).unwrap().unwrap();
        assert_eq!(c1.sh.len(), 1);
        assert_eq!(c1.k, Continuation::Empty);
    }

    #[test]
    fn while_conditional_picks_consistent_branch() {
        let p = parse_program("{ x := 1; if x == 1 { y := 5 } }", Level::While).unwrap();
        let mut c = WhileConfig::initial(&p);
        while let Some(next) = step_while(&c).unwrap() {
            c = next;
        }
        assert_eq!(
            c.sh.last_state().unwrap().get(&Var::new("y")),
            Some(&Sexp::int(5))
        );
    }

    #[test]
    fn spawn_rule4_emits_call_and_rule5_starts_body() {
        let p = parse_program("m(x){ skip } { spawn(m, 0) }", Level::Spawn).unwrap();
        let c0 = PoolConfig::initial(&p);
        let mut names = NameGen::new(0);
        let succ1 = successors_spawn(&c0, &p, &mut names).unwrap();
        assert_eq!(succ1.len(), 1);
        let (rule, c1) = &succ1[0];
        assert_eq!(*rule, RuleId::R4);
        assert!(c1.pool.is_empty(), "spawn's continuation is empty");
        assert_eq!(
            c1.sh.count_event(&Event::CallSpawn {
                proc: ProcName::new("m"),
                arg: Sexp::int(0)
            }),
            1
        );

        let succ2 = successors_spawn(c1, &p, &mut names).unwrap();
        assert_eq!(succ2.len(), 1);
        let (rule, c2) = &succ2[0];
        assert_eq!(*rule, RuleId::R5);
        assert_eq!(c2.pool.len(), 1);
        let body = c2.pool.iter().next().unwrap().stmt().unwrap();
        assert!(matches!(body.kind(), crate::lang::ast::StmtKind::Skip));
        // the fresh parameter is bound to the argument
        let sigma = c2.sh.last_state().unwrap();
        assert!(sigma
            .iter()
            .any(|(v, se)| v.is_generated() && se == &Sexp::int(0)));

        // after the body runs: empty pool, no unresolved calls, no successors
        let succ3 = successors_spawn(c2, &p, &mut names).unwrap();
        assert_eq!(succ3.len(), 1);
        let (_, c3) = &succ3[0];
        let succ4 = successors_spawn(c3, &p, &mut names).unwrap();
        assert!(succ4.is_empty());
    }

    #[test]
    fn coop_spawn_forces_fresh_task_id() {
        let p = example1();
        let c0 = CoopConfig::initial(&p);
        let mut names = NameGen::new(0);
        let succ = successors_coop(&c0, &p, &mut names).unwrap();
        assert_eq!(succ.len(), 1, "only the active main task may step");
        let (rule, c1) = &succ[0];
        assert_eq!(*rule, RuleId::R16);
        let expected = Event::Call {
            arg: Sexp::int(0),
            proc: ProcName::new("m"),
            tid: Sexp::int(1),
        };
        assert_eq!(c1.sh.count_event(&expected), 1);
        let sigma = c1.sh.last_state().unwrap();
        assert_eq!(sigma.get(&Var::new("z")), Some(&Sexp::int(1)));
    }

    #[test]
    fn coop_branches_when_all_tasks_suspended() {
        let p = example1();
        let mut names = NameGen::new(0);
        let mut c = CoopConfig::initial(&p);
        // step until both tasks exist and are suspended, preferring the
        // task-starting rule so the spawned task actually comes to life
        let mut steps = 0;
        loop {
            let succ = successors_coop(&c, &p, &mut names).unwrap();
            assert!(!succ.is_empty());
            c = succ.last().unwrap().1.clone();
            if c.tasks.len() == 2 && c.is_quiescent() {
                break;
            }
            steps += 1;
            assert!(steps < 20, "never reached the two-suspended-tasks state");
        }
        let succ = successors_coop(&c, &p, &mut names).unwrap();
        let resume_rules: Vec<_> = succ.iter().map(|(r, _)| *r).collect();
        assert_eq!(
            resume_rules,
            vec![RuleId::R16, RuleId::R16],
            "either suspended task may resume"
        );
    }

    #[test]
    fn await_on_unfinished_task_deadlocks() {
        let p = parse_program("m(x){ await w } { spawn(m, 0, z); await z }", Level::Coop).unwrap();
        let mut names = NameGen::new(0);
        let mut c = CoopConfig::initial(&p);
        let mut steps = 0;
        loop {
            let succ = successors_coop(&c, &p, &mut names).unwrap();
            if succ.is_empty() {
                break;
            }
            c = succ[0].1.clone();
            steps += 1;
            assert!(steps < 50, "expected a deadlock");
        }
        assert!(!c.tasks.is_empty(), "deadlocked with pending tasks");
    }

    #[test]
    fn explore_while_program_is_a_chain() {
        let p = parse_program("{ x := 1; y := x + 1 }", Level::While).unwrap();
        let mut names = NameGen::new(0);
        let g = explore(&p, 10, &mut names, 1000).unwrap();
        assert!(!g.truncated);
        for i in 0..g.nodes.len() {
            assert!(g.outgoing(i).count() <= 1);
        }
        assert_eq!(g.nodes.len(), 3);
    }

    #[test]
    fn explore_depth_zero_is_a_single_node() {
        let p = example1();
        let mut names = NameGen::new(0);
        let g = explore(&p, 0, &mut names, 1000).unwrap();
        assert_eq!(g.nodes.len(), 1);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn explore_example1_contains_a_branch_point() {
        let p = example1();
        let mut names = NameGen::new(0);
        let g = explore(&p, 6, &mut names, 10_000).unwrap();
        let branching = (0..g.nodes.len())
            .filter(|&i| g.outgoing(i).count() > 1)
            .count();
        assert!(
            branching > 0,
            "expected a configuration where both tasks are schedulable"
        );
    }
}
