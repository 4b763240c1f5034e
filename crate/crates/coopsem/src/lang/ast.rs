//! Abstract syntax for the four language levels.
//!
//! Every statement node carries a [`StmtId`] unique within its program, so
//! syntactically identical statements from different source positions never
//! compare equal. Statement equality is derived and therefore includes the
//! id; use [`Stmt::same_shape`] for position-insensitive comparison.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Language level a program is parsed and executed at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    While,
    Spawn,
    Guard,
    Coop,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::While => "while",
            Level::Spawn => "spawn",
            Level::Guard => "guard",
            Level::Coop => "coop",
        }
    }

    /// Levels at which programs may declare procedures.
    pub fn has_procedures(self) -> bool {
        !matches!(self, Level::While)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A program variable name.
///
/// Names produced by the semantics (renamed parameters, symbolic variables)
/// start with `@`, which the lexer rejects, so they can never clash with
/// source identifiers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True for names generated by the semantics rather than parsed.
    pub fn is_generated(&self) -> bool {
        self.0.starts_with('@')
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A procedure name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProcName(String);

impl ProcName {
    pub fn new(name: impl Into<String>) -> Self {
        ProcName(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ProcName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Unary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnOp {
    Not,
}

/// Binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    And,
    Or,
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        };
        f.write_str(s)
    }
}

/// Side-effect-free expressions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(Var),
    Unary(UnOp, Arc<Expr>),
    Binary(BinOp, Arc<Expr>, Arc<Expr>),
}

impl Expr {
    pub fn not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Arc::new(e))
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Arc::new(l), Arc::new(r))
    }

    /// All variables occurring in the expression.
    pub fn vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Int(_) | Expr::Bool(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Unary(_, e) => e.vars(out),
            Expr::Binary(_, l, r) => {
                l.vars(out);
                r.vars(out);
            }
        }
    }

    /// Replaces every occurrence of `from` by `to`.
    pub fn rename_var(&self, from: &Var, to: &Var) -> Expr {
        match self {
            Expr::Int(_) | Expr::Bool(_) => self.clone(),
            Expr::Var(v) => {
                if v == from {
                    Expr::Var(to.clone())
                } else {
                    self.clone()
                }
            }
            Expr::Unary(op, e) => Expr::Unary(*op, Arc::new(e.rename_var(from, to))),
            Expr::Binary(op, l, r) => Expr::Binary(
                *op,
                Arc::new(l.rename_var(from, to)),
                Arc::new(r.rename_var(from, to)),
            ),
        }
    }
}

/// Source identity of a statement: position plus a per-program sequence
/// number. Statements manufactured by the semantics (loop unrollings, the
/// trailing `return` of procedure bodies) use reserved sequence ranges so
/// they stay distinct from parsed statements and deterministic across runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StmtId {
    pub line: u32,
    pub col: u32,
    pub seq: u32,
}

/// Sequence base for the synthetic `body; while` node of a loop unrolling.
pub const SEQ_BASE_WHILE: u32 = 1 << 24;
/// Sequence base for the synthetic `body; return` node of a procedure.
pub const SEQ_BASE_PROC: u32 = 2 << 24;
/// Sequence base for the `return` statement appended to a procedure body.
pub const SEQ_BASE_RETURN: u32 = 3 << 24;

impl StmtId {
    pub fn new(line: u32, col: u32, seq: u32) -> Self {
        StmtId { line, col, seq }
    }

    pub fn is_synthetic(&self) -> bool {
        self.seq >= SEQ_BASE_WHILE
    }
}

impl fmt::Display for StmtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.line, self.col, self.seq)
    }
}

/// Statement kinds across all four levels. `Return` only appears at
/// runtime, appended to procedure bodies.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StmtKind {
    Skip,
    Assign { var: Var, expr: Expr },
    If { cond: Expr, body: Stmt },
    Seq { first: Stmt, rest: Stmt },
    While { cond: Expr, body: Stmt },
    Spawn2 { proc: ProcName, arg: Expr },
    Guard { cond: Expr, body: Stmt },
    Spawn3 { proc: ProcName, arg: Expr, task_var: Var },
    Suspend,
    Await { task_var: Var },
    Return,
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StmtNode {
    pub id: StmtId,
    pub kind: StmtKind,
}

/// A reference-counted statement tree node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Stmt(Arc<StmtNode>);

impl Stmt {
    pub fn new(id: StmtId, kind: StmtKind) -> Self {
        Stmt(Arc::new(StmtNode { id, kind }))
    }

    pub fn id(&self) -> StmtId {
        self.0.id
    }

    pub fn kind(&self) -> &StmtKind {
        &self.0.kind
    }

    /// Head statement of a sequence spine: the first non-`Seq` node.
    pub fn head(&self) -> &Stmt {
        match self.kind() {
            StmtKind::Seq { first, .. } => first.head(),
            _ => self,
        }
    }

    /// Ids along the leftmost spine, ending at the first non-`Seq` node.
    pub fn spine_ids(&self) -> Vec<StmtId> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            out.push(cur.id());
            match cur.kind() {
                StmtKind::Seq { first, .. } => cur = first,
                _ => break,
            }
        }
        out
    }

    /// True if execution of this statement starts with a yield point
    /// (`await` or `suspend`), looking through sequencing.
    pub fn is_suspended(&self) -> bool {
        matches!(
            self.head().kind(),
            StmtKind::Suspend | StmtKind::Await { .. }
        )
    }

    /// Renames a variable throughout the statement, preserving every
    /// statement id.
    pub fn rename_var(&self, from: &Var, to: &Var) -> Stmt {
        let ren = |v: &Var| if v == from { to.clone() } else { v.clone() };
        let kind = match self.kind() {
            StmtKind::Skip => StmtKind::Skip,
            StmtKind::Assign { var, expr } => StmtKind::Assign {
                var: ren(var),
                expr: expr.rename_var(from, to),
            },
            StmtKind::If { cond, body } => StmtKind::If {
                cond: cond.rename_var(from, to),
                body: body.rename_var(from, to),
            },
            StmtKind::Seq { first, rest } => StmtKind::Seq {
                first: first.rename_var(from, to),
                rest: rest.rename_var(from, to),
            },
            StmtKind::While { cond, body } => StmtKind::While {
                cond: cond.rename_var(from, to),
                body: body.rename_var(from, to),
            },
            StmtKind::Spawn2 { proc, arg } => StmtKind::Spawn2 {
                proc: proc.clone(),
                arg: arg.rename_var(from, to),
            },
            StmtKind::Guard { cond, body } => StmtKind::Guard {
                cond: cond.rename_var(from, to),
                body: body.rename_var(from, to),
            },
            StmtKind::Spawn3 {
                proc,
                arg,
                task_var,
            } => StmtKind::Spawn3 {
                proc: proc.clone(),
                arg: arg.rename_var(from, to),
                task_var: ren(task_var),
            },
            StmtKind::Suspend => StmtKind::Suspend,
            StmtKind::Await { task_var } => StmtKind::Await {
                task_var: ren(task_var),
            },
            StmtKind::Return => StmtKind::Return,
        };
        Stmt::new(self.id(), kind)
    }

    /// Variables generated by the semantics (`@`-prefixed) occurring in the
    /// statement, in a deterministic traversal order with duplicates kept.
    pub fn generated_vars(&self, out: &mut Vec<Var>) {
        let push_expr = |e: &Expr, out: &mut Vec<Var>| {
            let mut vs = BTreeSet::new();
            e.vars(&mut vs);
            for v in vs {
                if v.is_generated() {
                    out.push(v);
                }
            }
        };
        match self.kind() {
            StmtKind::Skip | StmtKind::Suspend | StmtKind::Return => {}
            StmtKind::Assign { var, expr } => {
                if var.is_generated() {
                    out.push(var.clone());
                }
                push_expr(expr, out);
            }
            StmtKind::If { cond, body } | StmtKind::While { cond, body } => {
                push_expr(cond, out);
                body.generated_vars(out);
            }
            StmtKind::Guard { cond, body } => {
                push_expr(cond, out);
                body.generated_vars(out);
            }
            StmtKind::Seq { first, rest } => {
                first.generated_vars(out);
                rest.generated_vars(out);
            }
            StmtKind::Spawn2 { arg, .. } => push_expr(arg, out),
            StmtKind::Spawn3 { arg, task_var, .. } => {
                push_expr(arg, out);
                if task_var.is_generated() {
                    out.push(task_var.clone());
                }
            }
            StmtKind::Await { task_var } => {
                if task_var.is_generated() {
                    out.push(task_var.clone());
                }
            }
        }
    }

    /// Structural comparison that ignores statement ids.
    pub fn same_shape(&self, other: &Stmt) -> bool {
        match (self.kind(), other.kind()) {
            (StmtKind::Skip, StmtKind::Skip)
            | (StmtKind::Suspend, StmtKind::Suspend)
            | (StmtKind::Return, StmtKind::Return) => true,
            (
                StmtKind::Assign { var: v1, expr: e1 },
                StmtKind::Assign { var: v2, expr: e2 },
            ) => v1 == v2 && e1 == e2,
            (
                StmtKind::If { cond: c1, body: b1 },
                StmtKind::If { cond: c2, body: b2 },
            )
            | (
                StmtKind::While { cond: c1, body: b1 },
                StmtKind::While { cond: c2, body: b2 },
            )
            | (
                StmtKind::Guard { cond: c1, body: b1 },
                StmtKind::Guard { cond: c2, body: b2 },
            ) => c1 == c2 && b1.same_shape(b2),
            (
                StmtKind::Seq { first: f1, rest: r1 },
                StmtKind::Seq { first: f2, rest: r2 },
            ) => f1.same_shape(f2) && r1.same_shape(r2),
            (
                StmtKind::Spawn2 { proc: p1, arg: a1 },
                StmtKind::Spawn2 { proc: p2, arg: a2 },
            ) => p1 == p2 && a1 == a2,
            (
                StmtKind::Spawn3 {
                    proc: p1,
                    arg: a1,
                    task_var: t1,
                },
                StmtKind::Spawn3 {
                    proc: p2,
                    arg: a2,
                    task_var: t2,
                },
            ) => p1 == p2 && a1 == a2 && t1 == t2,
            (
                StmtKind::Await { task_var: t1 },
                StmtKind::Await { task_var: t2 },
            ) => t1 == t2,
            _ => false,
        }
    }

    /// Collects every statement id in the subtree.
    pub fn all_ids(&self, out: &mut Vec<StmtId>) {
        out.push(self.id());
        match self.kind() {
            StmtKind::If { body, .. }
            | StmtKind::While { body, .. }
            | StmtKind::Guard { body, .. } => body.all_ids(out),
            StmtKind::Seq { first, rest } => {
                first.all_ids(out);
                rest.all_ids(out);
            }
            _ => {}
        }
    }

    /// Collects variables read or written anywhere in the subtree.
    pub fn vars(&self, out: &mut BTreeSet<Var>) {
        match self.kind() {
            StmtKind::Skip | StmtKind::Suspend | StmtKind::Return => {}
            StmtKind::Assign { var, expr } => {
                out.insert(var.clone());
                expr.vars(out);
            }
            StmtKind::If { cond, body }
            | StmtKind::While { cond, body }
            | StmtKind::Guard { cond, body } => {
                cond.vars(out);
                body.vars(out);
            }
            StmtKind::Seq { first, rest } => {
                first.vars(out);
                rest.vars(out);
            }
            StmtKind::Spawn2 { arg, .. } => arg.vars(out),
            StmtKind::Spawn3 { arg, task_var, .. } => {
                arg.vars(out);
                out.insert(task_var.clone());
            }
            StmtKind::Await { task_var } => {
                out.insert(task_var.clone());
            }
        }
    }
}

/// A procedure declaration `m(x){ body }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Procedure {
    pub name: ProcName,
    pub param: Var,
    pub body: Stmt,
    /// Declaration position, anchor for the synthetic ids below.
    pub line: u32,
    pub col: u32,
    /// Zero-based declaration index.
    pub index: u32,
    /// `body; return`, built once at parse time so the appended `return`
    /// and its enclosing sequence node have stable ids.
    pub body_with_return: Stmt,
}

/// A parsed program: procedure table, main statement, and the set of
/// source variables (used to build initial states).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub level: Level,
    pub procs: Vec<Procedure>,
    pub main: Stmt,
    pub vars: BTreeSet<Var>,
    /// Fingerprint of the source text this program was parsed from.
    pub source_hash: u64,
}

impl Program {
    pub fn proc(&self, name: &ProcName) -> Option<&Procedure> {
        self.procs.iter().find(|p| &p.name == name)
    }
}
