//! Statement identities and abstraction keys.
//!
//! A continuation is identified by the statement-id chain along the
//! leftmost sequence spine of its statement, plus the task identifier at
//! the cooperative level. Position-based ids disambiguate syntactically
//! identical statements from different code contexts, and identities are
//! insensitive to the spelling of generated variables, so two runs that
//! differ only in fresh-name seeds produce equal identities.

use crate::lang::ast::{Stmt, StmtId, Var};
use crate::trace::{Continuation, Sexp, SymState, Value};
use std::collections::BTreeMap;
use std::fmt;

/// Identity of a continuation for fairness purposes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StmtIdentity {
    /// Ids along the leftmost sequence spine, ending at the head statement.
    pub chain: Vec<StmtId>,
    /// Task identifier, present at the cooperative level.
    pub tid: Option<i64>,
    /// Pretty-printed head statement with generated names canonicalized,
    /// kept for readable reports.
    pub head: String,
}

impl StmtIdentity {
    pub fn of_stmt(s: &Stmt, tid: Option<i64>) -> Self {
        let chain = s.spine_ids();
        let head = canonical_stmt_string(s.head());
        StmtIdentity { chain, tid, head }
    }

    pub fn of_continuation(k: &Continuation, tid: Option<i64>) -> Option<Self> {
        k.stmt().map(|s| Self::of_stmt(s, tid))
    }
}

impl fmt::Display for StmtIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tid {
            Some(t) => write!(f, "K^f{}({})", t, self.head)?,
            None => write!(f, "K({})", self.head)?,
        }
        write!(f, "@")?;
        for (i, id) in self.chain.iter().enumerate() {
            if i > 0 {
                write!(f, "/")?;
            }
            write!(f, "{id}")?;
        }
        Ok(())
    }
}

/// Renames the generated (`@`-prefixed) variables of a statement by first
/// occurrence, so spellings produced under different name seeds coincide.
pub fn canonical_rename_map(s: &Stmt) -> BTreeMap<Var, Var> {
    let mut order = Vec::new();
    s.generated_vars(&mut order);
    let mut map = BTreeMap::new();
    let mut next = 0usize;
    for v in order {
        if !map.contains_key(&v) {
            map.insert(v.clone(), Var::new(format!("@a{next}")));
            next += 1;
        }
    }
    map
}

/// Pretty-prints a statement with generated variables canonicalized.
pub fn canonical_stmt_string(s: &Stmt) -> String {
    let map = canonical_rename_map(s);
    let mut renamed = s.clone();
    for (from, to) in &map {
        renamed = renamed.rename_var(from, to);
    }
    crate::lang::pretty::stmt_to_string(&renamed)
}

/// Canonical rendering of one continuation for abstraction keys: the
/// id chain, the canonicalized statement text, and the values its
/// generated variables are bound to in the given state.
pub fn canonical_cont_key(s: &Stmt, tid: Option<i64>, sigma: &SymState) -> String {
    let map = canonical_rename_map(s);
    let mut renamed = s.clone();
    let mut bindings = String::new();
    for (from, to) in &map {
        renamed = renamed.rename_var(from, to);
        let bound = sigma
            .get(from)
            .map(|se| se.to_string())
            .unwrap_or_else(|| "?".to_string());
        bindings.push_str(&format!("{to}={bound},"));
    }
    let chain: Vec<String> = s.spine_ids().iter().map(|id| id.to_string()).collect();
    let tid_part = tid.map(|t| format!("f{t}:")).unwrap_or_default();
    format!(
        "{tid_part}[{}]{}|{}",
        chain.join("/"),
        crate::lang::pretty::stmt_to_string(&renamed),
        bindings
    )
}

/// Canonical rendering of the source-variable part of a state.
pub fn source_state_key(sigma: &SymState) -> String {
    let mut out = String::new();
    for (v, se) in sigma.source_bindings() {
        out.push_str(&format!("{v}={se},"));
    }
    out
}

/// Extracts the integer task id from a concrete task-id value.
pub fn tid_int(v: Value) -> i64 {
    match v {
        Value::Int(n) => n,
        Value::Bool(b) => i64::from(b),
    }
}

/// Renders an event argument for keys.
pub fn sexp_key(se: &Sexp) -> String {
    se.to_string()
}
